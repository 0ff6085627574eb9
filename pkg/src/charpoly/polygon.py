"""Projected plane polygons and their secondary invariants.

Three projection modes, all stereographic from an apex vertex of the
characteristic polyhedron followed by a homothety:

* ``star``       -- kappa = 2 monic expansions (classes *1, *2, *3), apex
                    third coordinate omega/p;
* ``doublestar`` -- kappa >= 3 monic expansions (**), apex (1+omega)/p;
* ``maxcontact`` -- the maximal-contact polygon, projecting along the first
                    coordinate from d_1 + omega/p.

2-solvable vertices are dissolved by translations u_3 := u_3 - c u^y, the
plane analogue of vertex preparation.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from fractions import Fraction
from math import comb

from .invariants import invariant_core, invariant_record, derived_spaces, adapted_cone
from .linalg import rref_forms, span_contains
from .poly import SparsePolynomial
from .polyhedron import _in_hull_plus_orthant, vertex_normal
from .prepare import minimize
from .state import HypersurfaceState, StateError

STAR1, STAR2, STAR3 = "star1", "star2", "star3"
DOUBLESTAR = "doublestar"
TSTAR_I, TSTAR_II, TSTAR_III = "Tstar_i", "Tstar_ii", "Tstar_iii"
NONE_CLASS = "none"

PREPARED = "prepared"
BUDGET_EXCEEDED = "budget_exceeded"


def _vp(m: int, p: int) -> int:
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def hull2(points):
    """Vertices of conv(points) + R^2_{>=0} (coordinates may be negative)."""
    pts = sorted(set(points))
    return tuple(
        q for q in pts if not _in_hull_plus_orthant(q, [r for r in pts if r != q])
    )


@dataclass
class Polygon2:
    mode: str
    star_class: str
    apex: tuple
    base: tuple  # the (b0) origin used by the affine projection
    points: tuple
    vertices: tuple
    A1: Fraction | None = None
    A2: Fraction | None = None
    A3: Fraction | None = None
    B: Fraction | None = None
    C: Fraction | None = None
    beta: Fraction | None = None
    beta2: Fraction | None = None
    alpha2: Fraction | None = None
    prepared: dict = dfield(default_factory=dict)
    empty: bool = False
    plus_vertices: tuple = ()
    renumbering_sensitive: bool = False

    def gamma(self, e: int) -> int:
        """The secondary invariant gamma for this mode/class."""
        from math import ceil, floor

        if self.empty:
            return 0
        if self.mode == "star":
            if self.star_class == STAR1:
                return max(0, -(-self.beta.numerator // self.beta.denominator))
            if self.star_class == STAR2:
                return 1 + (self.C.numerator // self.C.denominator)
            if self.star_class == STAR3:
                return 1 + (self.beta.numerator // self.beta.denominator)
        if self.mode == "doublestar":
            if e == 1:
                return max(0, -(-self.beta.numerator // self.beta.denominator))
            return 1 + (self.C.numerator // self.C.denominator)
        if self.mode == "maxcontact":
            if self.star_class == "case3":
                return max(1 + (self.beta.numerator // self.beta.denominator), 1)
            if e >= 3:
                return 1 + (self.C.numerator // self.C.denominator)
            return max(1, -(-self.beta.numerator // self.beta.denominator))
        raise StateError(f"gamma undefined for {self.mode}/{self.star_class}")

    def to_json(self):
        fmt = lambda q: None if q is None else f"{q.numerator}/{q.denominator}"
        return {
            "mode": self.mode,
            "class": self.star_class,
            "apex": [fmt(x) for x in self.apex],
            "vertices": [[fmt(x) for x in v] for v in self.vertices],
            "invariants": {
                nm: fmt(getattr(self, nm))
                for nm in ("A1", "A2", "A3", "B", "C", "beta", "beta2", "alpha2")
                if getattr(self, nm) is not None
            },
            "prepared": {str(list(map(str, v))): flag for v, flag in self.prepared.items()},
            "empty": self.empty,
        }


# ---------------------------------------------------------------------------
# classification of monic expansions
# ---------------------------------------------------------------------------


def classify_monic(state: HypersurfaceState, rec=None) -> str:
    """Which monic-expansion normal form the state is in (n = 3)."""
    if state.n != 3:
        raise StateError("monic-expansion classes need n = 3")
    rec = rec or invariant_record(state)
    if rec.m < state.p or not rec.omega:
        return NONE_CLASS
    p, omega, eps = state.p, rec.omega, rec.eps
    poly = state.polyhedron()
    d1 = poly.min_coord(0)
    d2 = poly.min_coord(1)
    d3 = poly.min_coord(2)
    u3 = SparsePolynomial.variable(state.field, 3, 2)
    if rec.kappa == 2 and omega % p == 0:
        spaces = derived_spaces(state, rec)
        dirb = list(rec.dir_basis)
        if span_contains(rref_forms(dirb), u3):
            if omega == eps:
                unitary = any(
                    not state.field.is_zero(f.coeff((0, 0, eps))) for f in spaces.J_basis
                )
                if unitary:
                    return STAR1 if state.e == 1 else STAR2
            else:
                inf = state.initial_form((Fraction(1),) * 3)
                Fp = inf.F(p)
                if Fp is not None and state.e == 1:
                    Hm = (rec.H_exp[0], 0, 0)
                    D = Fp.derivative(1)
                    if not D.is_zero():
                        D = D.div_monomial(Hm)
                        if not state.field.is_zero(D.coeff((0, 0, omega))):
                            return STAR3
    if rec.kappa is not None and rec.kappa >= 3 and (1 + omega) % p != 0:
        v = (d1, d2, Fraction(1 + omega, p))
        region = [w for w in poly.vertices if w[0] == d1]
        if state.e == 1 and region == [v]:
            return DOUBLESTAR
        if state.e == 2 and v in region:
            return DOUBLESTAR
    if rec.kappa == 4:
        u1 = SparsePolynomial.variable(state.field, 3, 0)
        if eps == omega and state.e >= 1:
            if rec.dir_basis and rref_forms(list(rec.dir_basis)) == rref_forms([u1]):
                return TSTAR_I
        if eps == omega and state.e >= 2:
            v = (d1 + Fraction(omega, p), d2, d3)
            if [w for w in poly.vertices if w[1] == d2] == [v]:
                return TSTAR_II
        if state.e == 2:
            v = (d1 + Fraction(omega, p), d2, Fraction(1, p))
            if [w for w in poly.vertices if w[1] == d2] == [v]:
                return TSTAR_III
    return NONE_CLASS


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def _apex_and_base(state, mode, cls, rec):
    poly = state.polyhedron()
    p, omega = state.p, rec.omega
    d1, d2, d3 = (poly.min_coord(j) for j in range(3))
    if mode == "star":
        b0 = (d1, Fraction(1, p)) if cls == STAR3 else (d1, d2)
        return (b0[0], b0[1], Fraction(omega, p)), b0, 2, (0, 1)
    if mode == "doublestar":
        b0 = (d1, d2)
        return (d1, d2, Fraction(1 + omega, p)), b0, 2, (0, 1)
    if mode == "maxcontact":
        third = Fraction(1, p) if cls == "case3" else d3
        b0 = (d2, third)
        return (d1 + Fraction(omega, p), d2, third), b0, 0, (1, 2)
    raise StateError(f"unknown polygon mode {mode!r}")


def _project_point(x, apex, h, spread):
    depth = apex[h] - x[h]
    if depth <= 0:
        return None
    return tuple((x[j] - apex[j]) / depth for j in spread)


def project_polygon(state: HypersurfaceState, mode: str, rec=None, cls=None) -> Polygon2:
    """The mode's plane polygon with its invariants and prepared flags."""
    rec = rec or invariant_record(state)
    if cls is None:
        if mode in ("star", "doublestar"):
            cls = classify_monic(state, rec)
            want = (STAR1, STAR2, STAR3) if mode == "star" else (DOUBLESTAR,)
            if cls not in want:
                raise StateError(f"state is not in a {mode} class (got {cls})")
        else:
            if state.e < 2 or rec.eps not in (rec.omega, rec.omega + 1):
                raise StateError("maxcontact mode needs div(u1*u2) <= E and eps in {omega, omega+1}")
            cls = "case3" if rec.eps == rec.omega + 1 else f"case{state.e - 1}"
    apex, b0, h, spread = _apex_and_base(state, mode, cls, rec)
    poly = state.polyhedron()
    pts = []
    for v in poly.vertices:
        q = _project_point(v, apex, h, spread)
        if q is not None:
            pts.append(q)
    if not pts:
        return Polygon2(mode, cls, apex, b0, (), (), empty=True)
    verts = hull2(pts)
    B = min(q[0] + q[1] for q in verts)
    beta2 = max(q[1] for q in verts if q[0] + q[1] == B)
    alpha2 = B - beta2
    plus = hull2([q for q in pts if q[1] >= beta2]) if any(q[1] >= beta2 for q in pts) else ()
    pol = Polygon2(
        mode,
        cls,
        apex,
        b0,
        tuple(sorted(pts)),
        verts,
        B=B,
        beta2=beta2,
        alpha2=alpha2,
        plus_vertices=plus,
    )
    scope_plus = mode == "star" and cls == STAR3
    region = plus if scope_plus else verts
    pol.A1 = min(q[0] for q in region)
    pol.A2 = min(q[1] for q in region)
    if mode == "maxcontact":
        pol.A3 = Fraction(0) if (state.e == 2 or cls == "case3") else pol.A2
        pol.A2 = min(q[0] for q in region)
        a_sum = pol.A2 + (pol.A3 if cls != "case3" and state.e == 3 else 0)
        pol.C = B - a_sum if cls != "case3" else B - pol.A2
        left = min(q for q in region)
        pol.beta = left[1]
    else:
        exc_As = [pol.A1] + ([pol.A2] if state.e == 2 else [])
        pol.C = B - sum(exc_As)
        left_region = plus if plus else verts
        leftx = min(q[0] for q in left_region)
        pol.beta = min(q[1] for q in left_region if q[0] == leftx)
    if mode in ("star", "doublestar"):
        _mark_prepared(state, rec, pol)
    if state.e == 2:
        d1, d2 = poly.min_coord(0), poly.min_coord(1)
        pol.renumbering_sensitive = d1 < d2
    return pol


def face_weight(state, pol: Polygon2, vertex):
    """A positive weight vector defining the face over a polygon vertex."""
    scope = pol.plus_vertices if (pol.mode == "star" and pol.star_class == STAR3) else pol.vertices
    n = vertex_normal(scope, vertex)
    m = n[0] * vertex[0] + n[1] * vertex[1]
    if m <= 0:
        return None
    apex, h = pol.apex, 2 if pol.mode != "maxcontact" else 0
    spread = (0, 1) if pol.mode != "maxcontact" else (1, 2)
    alpha = [None] * 3
    alpha[spread[0]], alpha[spread[1]], alpha[h] = n[0], n[1], m
    # supporting value is attained at the apex
    return tuple(alpha)


def _extract_binomial_power(Q, var_idx, M_exps, w, field):
    """Match Q == mu * (U_v - c * U^M)^w exactly; returns (mu, c) or None."""
    n = Q.n
    p = field.p
    lead = [0] * n
    lead[var_idx] = w
    mu = Q.coeff(tuple(lead))
    if field.is_zero(mu):
        return None
    v = _vp(w, p)
    m0 = (w // p**v) % p
    pos = [e * p**v for e in M_exps]
    pos[var_idx] += w - p**v
    r = Q.coeff(tuple(pos))
    sign = field.one() if p == 2 or p**v % 2 == 0 else field.neg(field.one())
    denom = field.mul(mu, field.from_int(m0))
    c_pv = field.mul(field.div(r, denom), sign)
    c = c_pv
    for _ in range(v):
        c = field.pth_root(c)
        if c is None:
            return None
    # verify exactly
    binom = SparsePolynomial.variable(field, n, var_idx) - SparsePolynomial.monomial(
        field, n, M_exps, c
    )
    if binom.pow(w).scale(mu) != Q:
        return None
    return mu, c


def _star_solvable(state, rec, pol, vertex, inf):
    """2-solvability witness c at an integer polygon vertex (star modes)."""
    p = state.p
    field = state.field
    if any(i < p for i in inf.forms):
        return None
    F = inf.F(p)
    if F is None:
        return None
    omega = rec.omega
    y = tuple(int(q) for q in vertex)
    M = (y[0], y[1], 0)
    poly = state.polyhedron()
    d1, d2 = poly.min_coord(0), poly.min_coord(1)
    if pol.star_class == STAR3:
        Hb = (int(p * d1), 1, 0)
        nonp = SparsePolynomial(field, 3)
        ppart = SparsePolynomial(field, 3)
        for e, cc in F.terms.items():
            (ppart if all(x % p == 0 for x in e) else nonp)._add_term(e, cc)
        if nonp.is_zero():
            return None
        try:
            Q = nonp.div_monomial(Hb)
        except ValueError:
            return None
        got = _extract_binomial_power(Q, 2, M, omega, field)
        if got is None:
            return None
        _, c = got
        if field.is_zero(c):
            return None
        if not ppart.is_zero():
            try:
                comps = ppart.kp_components()
            except ValueError:
                return None
            if any(t != () * 0 and t != tuple() and t != ((0,) * len(t)) for t in comps if t):
                if any(_nonzero_tag(t) for t in comps):
                    return None
        return c
    # cases *1 / *2: everything lives in the p-divisible support
    H1, H2 = int(p * d1), int(p * d2)
    try:
        comps = F.kp_components()
    except ValueError:
        return None
    others = {t: g for t, g in comps.items() if _nonzero_tag(t)}
    if not others:
        return None
    basis = rref_forms(list(others.values()))
    if len(basis) != 1:
        return None
    P = basis[0]
    try:
        Q = P.div_monomial((H1 // p, H2 // p, 0))
    except ValueError:
        return None
    got = _extract_binomial_power(Q, 2, M, omega // p, field)
    if got is None:
        return None
    _, c = got
    return None if field.is_zero(c) else c


def _nonzero_tag(t):
    return t != () and any(t)


def _doublestar_unprepared(state, rec, pol, vertex, inf):
    """Witness lambda' when the vertex fails all three prepared clauses."""
    p = state.p
    field = state.field
    if any(i == p - 1 for i in inf.forms):
        return None  # clause 1: G != 0
    F = inf.F(p)
    if F is None:
        return None
    poly = state.polyhedron()
    d1, d2 = poly.min_coord(0), poly.min_coord(1)
    Hm = (int(p * d1), int(p * d2), 0)
    D = F.derivative(2)
    if D.is_zero():
        return None
    try:
        D = D.div_monomial(Hm)
    except ValueError:
        return None
    omega = rec.omega
    if len(D.terms) == 1 and not field.is_zero(D.coeff((0, 0, omega))):
        return None  # clause 3: proportional to V^omega
    y = tuple(int(q) for q in vertex)
    got = _extract_binomial_power(D, 2, (y[0], y[1], 0), omega, field)
    if got is None:
        return None  # clause 2: not an omega-th power
    _, c = got
    return None if field.is_zero(c) else c  # translation u3 := u3 - lift(c)*M


def _scope_vertices(state, pol: Polygon2):
    if pol.mode == "star":
        verts = pol.plus_vertices if pol.star_class == STAR3 else pol.vertices
        return verts
    # doublestar: left vertices when p*d2 = 0, all vertices otherwise
    poly = state.polyhedron()
    d2 = poly.min_coord(1)
    if d2 > 0 and state.e == 2:
        return pol.vertices
    return tuple(v for v in pol.vertices if v[1] >= pol.beta2)


def _mark_prepared(state, rec, pol: Polygon2):
    for v in _scope_vertices(state, pol):
        if any(Fraction(x).denominator != 1 or x < 0 for x in v):
            pol.prepared[v] = True
            continue
        alpha = face_weight(state, pol, v)
        if alpha is None:
            pol.prepared[v] = True
            continue
        inf = state.initial_form(alpha)
        if pol.mode == "star":
            c = _star_solvable(state, rec, pol, v, inf)
        else:
            c = _doublestar_unprepared(state, rec, pol, v, inf)
        pol.prepared[v] = c is None


def two_prepare(state: HypersurfaceState, mode: str, max_iter: int = 64):
    """Dissolve 2-solvable/unprepared vertices until totally prepared.

    Each dissolution substitutes u_3 := u_3 - c u_1^{y_1} u_2^{y_2}, then
    re-minimizes the Z-polyhedron.  Returns (state, polygon, status).
    """
    cur, status = minimize(state)
    if status != "minimal":
        return cur, None, BUDGET_EXCEEDED
    for _ in range(max_iter):
        rec = invariant_record(cur)
        pol = project_polygon(cur, mode, rec)
        if pol.empty:
            return cur, pol, PREPARED
        todo = sorted(
            (v for v, ok in pol.prepared.items() if not ok), key=lambda v: (sum(v), v)
        )
        if not todo:
            return cur, pol, PREPARED
        v = todo[0]
        inf = cur.initial_form(face_weight(cur, pol, v))
        if mode == "star":
            c = _star_solvable(cur, rec, pol, v, inf)
        else:
            c = _doublestar_unprepared(cur, rec, pol, v, inf)
        if c is None:
            return cur, pol, PREPARED
        y = (int(v[0]), int(v[1]), 0)
        cur = cur.translate_u(2, y, cur.field.neg(c))
        cur, status = minimize(cur)
        if status != "minimal":
            return cur, None, BUDGET_EXCEEDED
    rec = invariant_record(cur)
    pol = project_polygon(cur, mode, rec)
    if all(pol.prepared.values()):
        return cur, pol, PREPARED
    return cur, pol, BUDGET_EXCEEDED


# ---------------------------------------------------------------------------
# B(x) by monomial valuations, and the joyeux binomial form
# ---------------------------------------------------------------------------


def b_by_valuation(state: HypersurfaceState, pol: Polygon2) -> Fraction:
    """B(x) = sup{a/b : v_{(b,b,a)}(h) = p}, the valuation route.

    The weight pins the apex at value 1; the supremum over the constraint
    line is computed exactly by intersecting per-vertex halflines in the
    ratio t = a/b.
    """
    apex = pol.apex
    h = 2 if pol.mode != "maxcontact" else 0
    spread = (0, 1) if pol.mode != "maxcontact" else (1, 2)
    upper = None
    lower = Fraction(0)
    for v in state.polyhedron().vertices:
        # constraint: b*(v_i + v_j - s) >= a*(apex_h - v_h), with s the apex spread sum
        lhs = (v[spread[0]] - apex[spread[0]]) + (v[spread[1]] - apex[spread[1]])
        rhs = apex[h] - v[h]
        if rhs > 0:
            bound = lhs / rhs
            upper = bound if upper is None else min(upper, bound)
        elif rhs < 0:
            bound = lhs / rhs
            lower = max(lower, bound)
        elif lhs < 0:
            raise StateError("no valid weight: apex is not a vertex")
    if upper is None:
        raise StateError("B valuation search is unbounded")
    return upper


def joyeux_phi(a_vec, i: int, lam, field, n: int = 3) -> SparsePolynomial:
    """The closed binomial sum Phi_i(U_1, lambda*U_2).

    Requires a-hat := i mod p != 0 and a1-hat + a2-hat + a-hat = p with both
    a1-hat, a2-hat nonzero (so p >= 3); lambda must be a nonzero constant.
    """
    p = field.p
    a1, a2, _ = (x % p for x in a_vec)
    a = i % p
    if a == 0 or a1 == 0 or a2 == 0 or a1 + a2 + a != p:
        raise StateError(f"inadmissible joyeux data: residues ({a1},{a2},{a}) must be nonzero with sum p")
    if field.is_zero(lam):
        raise StateError("lambda must be nonzero")
    U1 = SparsePolynomial.variable(field, n, 0)
    U2s = SparsePolynomial.variable(field, n, 1).scale(lam)
    total = SparsePolynomial(field, n)
    for k in range(a + 1):
        coeff = field.from_int(comb(a2 + k - 1, k))
        if field.is_zero(coeff):
            continue
        term = U1.pow(a - k) * (U1 + U2s).pow(i - a + k)
        total = total + term.scale(coeff)
    sign = field.one() if a2 % 2 == 0 else field.neg(field.one())
    pref_exps = [a_vec[0], a_vec[1]] + [0] * (n - 2)
    prefix = SparsePolynomial.monomial(field, n, tuple(pref_exps), field.mul(sign, field.pow(lam, a_vec[1])))
    return prefix * total
