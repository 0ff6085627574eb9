"""Permissible centers, chart transforms and the projected cone PC(x, Y).

Centers are coordinate subspaces V(Z, {u_j : j in J}).  A center is
Hironaka-permissible when the projected slope delta(y) is >= 1; permissible
of the first kind when additionally eps(y) = eps(x); of the second kind when
eps(y) = eps(x) - 1, i0(y) <= i0(x) and the reduction cl0 of the localized
J-space is nonzero.  The chart transform substitutes
u_j := u_{j0}(u'_j + c_j), Z := u_{j0} Z' and divides f_i by u_{j0}^i.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from fractions import Fraction

from .fields import ExtensionField, PrimeField, extend_field
from .invariants import (
    InvariantRecord,
    MaxCone,
    invariant_core,
    invariant_record,
    rref_forms,
)
from .linalg import eval_form
from .poly import SparsePolynomial
from .prepare import minimize
from .state import HypersurfaceState, StateError

NOT_PERMISSIBLE = "not_permissible"
HIRONAKA = "hironaka"
FIRST_KIND = "first_kind"
SECOND_KIND = "second_kind"


@dataclass
class Center:
    J: tuple  # 0-based variable indices
    classification: str
    delta_y: Fraction | None = None
    eps_y: int | None = None
    i0_y: int | None = None
    cl0J: tuple = ()
    second_kind_j0: int | None = None

    def is_permissible(self):
        return self.classification in (FIRST_KIND, SECOND_KIND)


@dataclass
class ChartChoice:
    j0: int
    translations: dict = dfield(default_factory=dict)  # j -> field element
    extension: tuple | None = None  # (j, modulus_ints, gen_name)


def _cl0_j_space(state, core, J):
    """Reduction cl0 of the localized J-space, read off the closed point.

    Spanned by the restrictions to k[U_J] of H^{-1} dF_p/dU_{j'} over the
    non-exceptional outside variables j'.
    """
    inf = state.initial_form((Fraction(1),) * state.n)
    Fp = inf.F(state.p)
    if Fp is None:
        return []
    Hm = tuple(core.H_exp) + (0,) * (state.n - state.e)
    outside = [j for j in range(state.n) if j not in J]
    gens = []
    for j in outside:
        if j < state.e:
            continue
        g = Fp.derivative(j).div_monomial(Hm).subst_zero(outside)
        if not g.is_zero():
            gens.append(g)
    return rref_forms(gens)


def classify_center(state: HypersurfaceState, J) -> Center:
    """Classify the coordinate center V(Z, u_J) on a minimal state."""
    J = tuple(sorted(J))
    if state.mode == "arithmetic":
        raise StateError("centers are classified in equicharacteristic mode only")
    if not J or any(j < 0 or j >= state.n for j in J):
        raise StateError(f"bad center {J}")
    proj = state.polyhedron().project(J)
    delta_y = proj.delta()
    if delta_y is None or delta_y < 1:
        return Center(J, NOT_PERMISSIBLE, delta_y=delta_y)
    core = invariant_core(state)
    if len(J) == state.n:
        return Center(J, FIRST_KIND, delta_y=core.delta, eps_y=core.eps, i0_y=core.i0)
    loc = state.localize(J)
    loc, status = minimize(loc)
    if status != "minimal":
        raise StateError("localized state failed to minimize within budget")
    lcore = invariant_core(loc)
    if lcore.eps == core.eps:
        return Center(J, FIRST_KIND, delta_y=lcore.delta, eps_y=lcore.eps, i0_y=lcore.i0)
    if lcore.eps == core.eps - 1 and lcore.i0 <= core.i0:
        cl0 = _cl0_j_space(state, core, J)
        if cl0:
            j0 = None
            if core.i0 == state.p - 1:
                outs = [j for j in range(state.e) if j not in J and core.G_exp[j] > 0]
                j0 = outs[0] if outs else None
            return Center(
                J,
                SECOND_KIND,
                delta_y=lcore.delta,
                eps_y=lcore.eps,
                i0_y=lcore.i0,
                cl0J=tuple(cl0),
                second_kind_j0=j0,
            )
    return Center(J, HIRONAKA, delta_y=lcore.delta, eps_y=lcore.eps, i0_y=lcore.i0)


def pc_cone(state: HypersurfaceState, center: Center):
    """Generators (forms in the U_J chart coordinates) of C(x, Y).

    Chart points with unchanged invariant lie inside the associated
    projective cone PC; membership is tested by evaluating the generators.
    """
    core = invariant_core(state)
    if center.classification == FIRST_KIND:
        from .invariants import adapted_cone

        mx, _, _, _ = adapted_cone(state, core)
        outside = [j for j in range(state.n) if j not in center.J]
        gens = [g.subst_zero(outside) for g in mx.gens]
        return [g for g in gens if not g.is_zero()], True
    if center.classification == SECOND_KIND:
        bj = [j for j in core.B_set if j != center.second_kind_j0]
        field = state.residue_field()
        extra = [SparsePolynomial.variable(field, state.n, j) for j in bj]
        mx = MaxCone.of_forms(list(center.cl0J), extra_linear=extra)
        return list(mx.gens), True
    raise StateError("PC(x, Y) needs a permissible center")


def chart_point_in_cone(gens, state, center: Center, chart: ChartChoice) -> bool:
    if not gens:
        return True
    field = gens[0].field
    point = []
    for j in range(state.n):
        if j == chart.j0:
            point.append(field.one())
        elif j in center.J:
            point.append(chart.translations.get(j, field.zero()))
        else:
            point.append(field.zero())
    return all(field.is_zero(eval_form(g, point)) for g in gens)


def _expand_substitution(f: SparsePolynomial, J, j0, trans, field):
    """u_j := u_{j0} * (u_j + c_j) for j in J minus {j0}; u_{j0} unchanged."""
    out = SparsePolynomial(field, f.n)
    shifted = {}

    def shifted_power(j, k):
        if (j, k) not in shifted:
            base = SparsePolynomial.variable(field, f.n, j)
            c = trans.get(j)
            if c is not None and not field.is_zero(c):
                base = base + SparsePolynomial.constant(field, f.n, c)
            shifted[(j, k)] = base.pow(k)
        return shifted[(j, k)]

    for exps, c in f.terms.items():
        tot = sum(exps[j] for j in J)
        base = [0] * f.n
        for j in range(f.n):
            if j == j0:
                base[j] = tot
            elif j not in J:
                base[j] = exps[j]
        term = SparsePolynomial.monomial(field, f.n, tuple(base), c)
        for j in J:
            if j != j0 and exps[j]:
                term = term * shifted_power(j, exps[j])
        out = out + term
    return out


def blowup_chart(state: HypersurfaceState, center, chart: ChartChoice):
    """Blow up V(Z, u_J) and localize at the chosen chart point.

    Returns (new minimal state, report).  The report carries the origin-chart
    polyhedron check, the H-transform identity and the new invariant record;
    every number is recomputed from scratch on the transformed equation.
    """
    J = tuple(sorted(center.J if isinstance(center, Center) else center))
    if chart.j0 not in J:
        raise StateError("chart variable must belong to the center")
    proj = state.polyhedron().project(J)
    if proj.delta() is None or proj.delta() < 1:
        raise StateError("center is not Hironaka-permissible (delta(y) < 1)")
    field = state.field
    coeffs = state.coeffs
    trans = dict(chart.translations)
    names = list(state.names)
    if chart.extension is not None:
        jx, modulus, gen_name = chart.extension
        if field.kind not in ("prime", "extension"):
            raise StateError("field extensions only over prime/extension bases")
        new_field = extend_field(field, modulus, gen_name=gen_name)
        coeffs = tuple(f.map_coeffs(new_field.embed, new_field) for f in coeffs)
        trans = {j: new_field.embed(c) for j, c in trans.items()}
        trans[jx] = new_field.gen()
        field = new_field
    new_coeffs = []
    for i, f in enumerate(coeffs, start=1):
        g = _expand_substitution(f, J, chart.j0, trans, field)
        div = [0] * state.n
        div[chart.j0] = i
        try:
            g = g.div_monomial(tuple(div))
        except ValueError:
            raise StateError(f"f_{i} is not divisible by the {i}-th power of the chart equation")
        new_coeffs.append(g)
    # exceptional bookkeeping: strict transforms through the point, plus the
    # new exceptional u_{j0}
    exc = set()
    for j in range(state.e):
        if j == chart.j0:
            continue
        if j not in J or field.is_zero(trans.get(j, field.zero())):
            exc.add(j)
    exc.add(chart.j0)
    order = sorted(exc) + [j for j in range(state.n) if j not in exc]
    perm = list(order)
    permuted = tuple(f.permute_vars(perm) for f in new_coeffs)
    raw = HypersurfaceState(
        state.p,
        tuple(names[j] for j in perm),
        len(exc),
        permuted,
        field=field,
        mode="equichar",
    )
    new_state, status = minimize(raw)
    report = {
        "center": [state.names[j] for j in J],
        "chart": state.names[chart.j0],
        "permutation": perm,
        "minimize_status": status,
        "minimize_steps": len(new_state.z_history) - len(state.z_history),
    }
    origin = all(field.is_zero(c) for c in trans.values()) and chart.extension is None
    if origin:
        image = state.polyhedron().chart_image(J, chart.j0)
        image_pts = sorted(
            tuple(q[j] for j in perm) for q in image.points
        )
        from .polyhedron import NewtonPolyhedron

        expected = NewtonPolyhedron(state.n, image_pts)
        report["origin_chart_law"] = (
            expected.vertices == raw.polyhedron().vertices
            and report["minimize_steps"] == 0
        )
    if isinstance(center, Center) and center.eps_y is not None:
        report["H_transform"] = _check_h_transform(state, new_state, center, chart, perm)
    rec = invariant_record(new_state)
    report["invariants"] = rec
    return new_state, report


def _check_h_transform(state, new_state, center: Center, chart, perm):
    """H(x') = u^{eps(y) - p} H(x) as monomial ideals, coordinatewise."""
    try:
        old = invariant_core(state)
        new = invariant_core(new_state)
    except StateError:
        return None
    p = state.p
    inv = {old_j: new_pos for new_pos, old_j in enumerate(perm)}
    je_sum = sum(old.H_exp[j] for j in center.J if j < state.e)
    expected_j0 = center.eps_y - p + je_sum
    pos0 = inv[chart.j0]
    if pos0 >= new_state.e or new.H_exp[pos0] != expected_j0:
        return False
    for j in range(state.e):
        if j == chart.j0:
            continue
        pos = inv[j]
        if pos < new_state.e and new.H_exp[pos] != old.H_exp[j]:
            return False
    return True


def enumerate_chart_points(state: HypersurfaceState, J):
    """All k-rational chart choices for the exceptional P^{|J|-1} (finite k)."""
    field = state.field
    if field.size() is None:
        raise StateError("rational-point sweeps need a finite field")
    J = tuple(sorted(J))
    elems = list(field.elements())

    def rec(prefix):
        if len(prefix) == len(J):
            yield tuple(prefix)
            return
        for c in elems:
            yield from rec(prefix + [c])

    seen = set()
    for coords in rec([]):
        nz = next((i for i, c in enumerate(coords) if not field.is_zero(c)), None)
        if nz is None:
            continue
        inv = field.inv(coords[nz])
        norm = tuple(field.mul(c, inv) for c in coords)
        if norm in seen:
            continue
        seen.add(norm)
        j0 = J[nz]
        trans = {J[i]: norm[i] for i in range(len(J)) if J[i] != j0 and not field.is_zero(norm[i])}
        yield ChartChoice(j0=j0, translations=trans)
