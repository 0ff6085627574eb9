"""The resolution-invariant ladder at a closed point.

Computes, on a minimal (well adapted) state: the multiplicity m, the slope
delta, the per-exceptional-component slopes d_j with H_j = p*d_j, the
normalized slope eps = p(delta - sum d_j), the least nonzero initial index
i0, the truncated form TF with its derived spaces V and J, the adapted order
omega, the projection number kappa, the directrix/Max data with tau', and
the validators for the structural hypotheses on (S, h, E).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dfield
from fractions import Fraction

from .linalg import eval_form, linear_form_coeffs, rref_forms, span_contains, spans_equal
from .poly import SparsePolynomial
from .state import HypersurfaceState, StateError, p_order


class ConditionError(StateError):
    """The initial form violates the structural dichotomy (bad (G)/(E) data)."""


ONE = Fraction(1)


def _ones(n):
    return (ONE,) * n


# ---------------------------------------------------------------------------
# core numbers
# ---------------------------------------------------------------------------


@dataclass
class InvariantRecord:
    m: int
    delta: Fraction | None
    d: tuple
    H_exp: tuple
    eps: int | None
    i0: int | None
    G_exp: tuple | None = None
    G_residue: object = None
    B_set: tuple = ()
    omega: int | None = None
    kappa: int | None = None  # 1..4 (n = 3) or 1/2 meaning {1, >=2}
    kappa_coarse: int | None = None
    tau: int | None = None
    tau_prime: int | None = None
    dir_basis: tuple = ()
    max_neq_dir: bool = False
    kappa3_search_exhaustive: bool | None = None
    notes: tuple = ()

    def iota(self, p):
        if self.m < p:
            return (self.m, 0, 1)
        return (self.m, self.omega, self.kappa)

    def to_json(self, names=None):
        fmt = lambda q: None if q is None else f"{q.numerator}/{q.denominator}" if isinstance(q, Fraction) else q
        out = {
            "m": self.m,
            "delta": fmt(self.delta),
            "d": [fmt(x) for x in self.d],
            "H": list(self.H_exp),
            "eps": self.eps,
            "i0": self.i0,
            "omega": self.omega,
            "kappa": self.kappa,
            "tau": self.tau,
            "tau_prime": self.tau_prime,
            "B": list(self.B_set),
            "max_neq_dir": self.max_neq_dir,
        }
        if self.G_exp is not None:
            out["G_exponent"] = list(self.G_exp)
        if names and self.dir_basis:
            out["directrix"] = [f.format(["U" + nm[1:] if nm.startswith("u") else nm for nm in names]) for f in self.dir_basis]
        if self.kappa3_search_exhaustive is not None:
            out["kappa3_search_exhaustive"] = self.kappa3_search_exhaustive
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def multiplicity(state: HypersurfaceState) -> int:
    """ord of h at the origin of the chart (= p iff delta >= 1)."""
    p = state.p
    best = p
    for i, f in enumerate(state.coeffs, start=1):
        if state.mode == "arithmetic":
            o = p_order(f, p, cap=state.precision)
        else:
            o = None if f.is_zero() else min(sum(e) for e in f.terms)
        if o is not None:
            best = min(best, (p - i) + o)
    return best


def invariant_core(state: HypersurfaceState) -> InvariantRecord:
    """(m, delta, d_j, H, eps, i0, G) of a minimal state."""
    p = state.p
    poly = state.polyhedron()
    m = multiplicity(state)
    if poly.is_empty():
        raise ConditionError("empty polyhedron: h is a p-th power")
    delta = poly.delta()
    d = tuple(poly.min_coord(j) for j in range(state.e))
    H = []
    for dj in d:
        hj = p * dj
        if hj.denominator != 1:
            raise ConditionError(f"H_j = p*d_j = {hj} is not an integer")
        H.append(int(hj))
    eps_q = p * (delta - sum(d, Fraction(0)))
    if eps_q.denominator != 1 or eps_q < 0:
        raise ConditionError(f"eps = {eps_q} is not a nonnegative integer")
    eps = int(eps_q)
    inf = state.initial_form(_ones(state.n))
    i0 = inf.i0()
    rec = InvariantRecord(m=m, delta=delta, d=d, H_exp=tuple(H), eps=eps, i0=i0)
    if eps > 0 and any(1 <= i <= p - 2 for i in inf.forms):
        raise ConditionError(
            "initial form has a middle coefficient F_i, 1 <= i <= p-2; "
            "the structural dichotomy fails"
        )
    if i0 == p - 1:
        k = state.residue_field()
        Fpm1 = inf.F(p - 1)
        if len(Fpm1.terms) != 1:
            raise ConditionError("F_{p-1} on the initial face is not a monomial")
        ((exps, c),) = Fpm1.terms.items()
        if any(x % (p - 1) for x in exps):
            raise ConditionError("F_{p-1} exponent is not divisible by p-1")
        b = tuple(x // (p - 1) for x in exps)
        if any(b[j] for j in range(state.e, state.n)):
            raise ConditionError("F_{p-1} is not supported on the exceptional variables")
        g = k.kth_root(k.neg(c), p - 1)
        if g is None:
            raise ConditionError("-F_{p-1} is not a (p-1)-th power")
        rec.G_exp = b
        rec.G_residue = g
        rec.B_set = tuple(j for j in range(state.e) if p * b[j] - H[j] > 0)
    return rec


# ---------------------------------------------------------------------------
# truncation operator and derived spaces
# ---------------------------------------------------------------------------


@dataclass
class DerivedSpaces:
    F_trunc: SparsePolynomial
    V_basis: list
    J_basis: list
    T_applied: bool
    kernel_removed: SparsePolynomial


def truncate_form(F: SparsePolynomial, p, d, H, b, e):
    """T F: drop the terms U^{px} with b + p(x - b) still in Delta_H(d)."""
    keep = SparsePolynomial(F.field, F.n)
    removed = SparsePolynomial(F.field, F.n)
    for exps, c in F.terms.items():
        y = tuple(Fraction(bj) + (x - p * bj) for bj, x in zip(b, exps))
        in_a = all(yj >= 0 for yj in y) and all(
            y[j] >= Fraction(H[j], p) for j in range(e)
        )
        (removed if in_a else keep)._add_term(exps, c)
    return keep, removed


def derived_spaces(state: HypersurfaceState, core: InvariantRecord | None = None) -> DerivedSpaces:
    """V(TF) and J(TF) bases from the initial form of f_p."""
    core = core or invariant_core(state)
    p, n, e = state.p, state.n, state.e
    k = state.residue_field()
    inf = state.initial_form(_ones(n))
    F = inf.F(p) or SparsePolynomial(k, n)
    applied = False
    removed = SparsePolynomial(k, n)
    if core.i0 == p - 1 and core.delta.denominator == 1:
        F, removed = truncate_form(F, p, int(core.delta), core.H_exp, core.G_exp, e)
        applied = not removed.is_zero()
    Hm = tuple(core.H_exp) + (0,) * (n - e)
    V = rref_forms([F.derivative(j).div_monomial(Hm) for j in range(e, n)])
    J_gens = [F.log_derivative(j).div_monomial(Hm) for j in range(e)]
    for t in k.transcendentals():
        J_gens.append(F.const_derivative(t).div_monomial(Hm))
    J = rref_forms(J_gens)
    return DerivedSpaces(F_trunc=F, V_basis=V, J_basis=J, T_applied=applied, kernel_removed=removed)


def omega_kappa(state: HypersurfaceState, core=None, spaces=None):
    """(omega, coarse kappa in {1, 2=at least 2})."""
    core = core or invariant_core(state)
    if core.eps == 0:
        omega = 0
    else:
        spaces = spaces or derived_spaces(state, core)
        omega = core.eps - 1 if spaces.V_basis else core.eps
    kappa1 = 1 if (omega == core.eps and core.i0 == state.p - 1) else 2
    return omega, kappa1


# ---------------------------------------------------------------------------
# directrix and Hilbert-Samuel cone
# ---------------------------------------------------------------------------


def hasse_span_linear(forms):
    """Span of the order-(deg-1) Hasse-Schmidt derivatives (linear forms)."""
    out = []
    for f in forms:
        d = f.degree()
        if d <= 0:
            continue
        n = f.n
        for alpha in itertools.product(*(range(d) for _ in range(n))):
            if sum(alpha) != d - 1:
                continue
            g = f.hasse_derivative(alpha)
            if not g.is_zero():
                out.append(g)
    return rref_forms(out)


def vdir_basis(forms):
    """Smallest subspace W with every form in k[W]: layered Frobenius descent.

    Alternates two reductions: linear Hasse-Schmidt derivatives must lie in W
    (then their pivot variables are eliminated), and once no linear
    derivatives remain every residual exponent is divisible by p, so the
    residuals split over a basis of k/k^p into p-th roots which are processed
    recursively.  Returns an echelon basis of linear forms in the original
    coordinates.
    """
    gens = [f for f in forms if f is not None and not f.is_zero()]
    if not gens:
        return []
    field = gens[0].field
    n = gens[0].n
    W = []  # rref'ed linear forms

    def eliminate(gens, new_linear):
        # change coordinates so each new linear form becomes its pivot
        # variable, then split every generator into cofactors along the
        # pivot monomials: F is a polynomial in W+rest iff every cofactor
        # of a pivot monomial is a polynomial in the rest
        pivots = []
        for lf in new_linear:
            piv = max(lf.terms, key=lambda e: (sum(e), e))
            (j,) = [i for i, e in enumerate(piv) if e]
            coeffs = linear_form_coeffs(lf)
            repl = SparsePolynomial.variable(field, n, j).scale(field.inv(coeffs[j]))
            for i, c in enumerate(coeffs):
                if i != j and not field.is_zero(c):
                    repl = repl + SparsePolynomial.variable(field, n, i).scale(
                        field.neg(field.div(c, coeffs[j]))
                    )
            gens = [g.subst_var(j, repl) for g in gens]
            pivots.append(j)
        out = []
        for g in gens:
            cofs: dict[tuple, SparsePolynomial] = {}
            for e, c in g.terms.items():
                ykey = tuple(e[j] for j in pivots)
                rest = list(e)
                for j in pivots:
                    rest[j] = 0
                cofs.setdefault(ykey, SparsePolynomial(field, n))._add_term(tuple(rest), c)

            out.extend(cf for cf in cofs.values() if not cf.is_zero())
        return [g for g in out if g.degree() >= 1]

    guard = 0
    while gens:
        guard += 1
        if guard > 200:
            raise StateError("directrix descent failed to terminate")
        linear = [g for g in gens if g.degree() == 1]
        higher = [g for g in gens if g.degree() > 1]
        L = hasse_span_linear(higher)
        new_W = rref_forms(W + linear + L)
        if len(new_W) > len(W):
            fresh = [f for f in new_W if not span_contains(rref_forms(W), f)]
            W = new_W
            gens = eliminate(higher, fresh)
            continue
        # no linear progress: all exponents are p-divisible now
        next_gens = []
        for g in higher:
            next_gens.extend(g.kp_components().values())
        gens = [g for g in next_gens if not g.is_zero()]
    return W


@dataclass
class MaxCone:
    """Reduced zero locus of all Hasse-Schmidt derivatives of the given forms."""

    gens: list

    @classmethod
    def of_forms(cls, forms, extra_linear=()):
        gens = []
        for f in forms:
            if f is None or f.is_zero():
                continue
            d = f.degree()
            n = f.n
            for alpha in itertools.product(*(range(d + 1) for _ in range(n))):
                if sum(alpha) >= d:
                    continue
                g = f.hasse_derivative(alpha)
                if not g.is_zero():
                    gens.append(g)
        gens.extend(extra_linear)
        # reduce per degree to keep membership tests small
        by_deg: dict[int, list] = {}
        for g in gens:
            by_deg.setdefault(g.degree(), []).append(g)
        out = []
        for dg in sorted(by_deg):
            out.extend(rref_forms(by_deg[dg]))
        return cls(out)

    def contains_point(self, point) -> bool:
        if not self.gens:
            return True
        k = self.gens[0].field
        return all(k.is_zero(eval_form(g, point)) for g in self.gens)

    def same_locus_basis(self, other) -> bool:
        return spans_equal(self.gens, other.gens)


def directrix_max(forms, B_set=(), nvars=None):
    """(MaxCone, directrix basis, tau', max_neq_dir) of same-degree forms.

    The directrix is cut with {U_B = 0} first (the B variables join the
    basis).  ``max_neq_dir`` flags Hironaka's p = 2 four-variable quadric,
    the only shape (dimension <= 4) where Dir is a proper subcone of Max.
    """
    forms = [f for f in forms if f is not None and not f.is_zero()]
    if not forms:
        return MaxCone([]), [], 0, False
    field = forms[0].field
    n = forms[0].n
    ub = [SparsePolynomial.variable(field, n, j) for j in B_set]
    restricted = [f.subst_zero(B_set) for f in forms]
    dir_basis = rref_forms(ub + vdir_basis(restricted))
    mx = MaxCone.of_forms(restricted, extra_linear=ub)
    flag = _detect_quadric_exception(forms)
    return mx, dir_basis, len(dir_basis), flag


def _kp_span_solve(field, target, gens):
    """Solve target = sum_j lambda_j^p * gens[j]; returns the lambdas or None."""
    vecs = [dict(field.kp_decompose(g)) for g in gens]
    tvec = dict(field.kp_decompose(target))
    tags = sorted({t for v in vecs for t in v} | set(tvec))
    # gaussian elimination on the (tags x gens) system over the field
    rows = [[v.get(t, field.zero()) for v in vecs] + [tvec.get(t, field.zero())] for t in tags]
    m, n = len(rows), len(gens)
    piv_cols = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if not field.is_zero(rows[i][c])), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = field.inv(rows[r][c])
        rows[r] = [field.mul(x, inv) for x in rows[r]]
        for i in range(m):
            if i != r and not field.is_zero(rows[i][c]):
                f = rows[i][c]
                rows[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, m):
        if not field.is_zero(rows[i][-1]):
            return None
    sol = [field.zero()] * n
    for i, c in enumerate(piv_cols):
        sol[c] = rows[i][-1]
    return sol


def _detect_quadric_exception(forms) -> bool:
    """p = 2, one diagonal quadric in 4 variables whose coefficients are
    2-independent and span (up to scaling by one of them) a subfield of
    degree 4 over k^2.  This is the only Dir != Max shape in ambient
    dimension <= 4; any such quadric is linearly equivalent to
    Z^2 + b U^2 + a V^2 + ab W^2 with a, b 2-independent."""
    if len(forms) != 1:
        return False
    f = forms[0]
    k = f.field
    if k.p != 2 or f.degree() != 2:
        return False
    diag = {}
    for exps, c in f.terms.items():
        if any(e not in (0, 2) for e in exps) or sum(exps) != 2:
            return False  # a cross term: polar form nonzero, Dir = Max
        (j,) = [i for i, e in enumerate(exps) if e]
        diag[j] = c
    if len(diag) != 4:
        return False
    cs = list(diag.values())
    if len(vdir_basis([f])) != 4:
        return False  # coefficients 2-dependent: descent succeeds, Dir = Max
    for i in range(4):
        scaled = [k.div(c, cs[i]) for c in cs]
        closed = all(
            _kp_span_solve(k, k.mul(a, b), scaled) is not None
            for a in scaled
            for b in scaled
        )
        if closed:
            return True
    return False


def adapted_cone(state: HypersurfaceState, core=None, spaces=None):
    """Max(x), Vdir(x) and tau'(x) per the adapted-order convention."""
    core = core or invariant_core(state)
    spaces = spaces or derived_spaces(state, core)
    omega, _ = omega_kappa(state, core, spaces)
    forms = spaces.V_basis if omega == core.eps - 1 else spaces.J_basis
    return directrix_max(forms, B_set=core.B_set)


# ---------------------------------------------------------------------------
# full kappa (n = 3) and the multiplicity tau
# ---------------------------------------------------------------------------


def _dir_in_exceptional(dir_basis, e):
    return all(all(i < e or c == lf.field.zero() for i, c in enumerate(linear_form_coeffs(lf))) for lf in dir_basis)


def kappa_full(state: HypersurfaceState, core=None, spaces=None):
    """kappa in {1,2,3,4}; requires n = 3 and m = p.

    Returns (kappa, search_exhaustive_flag).  The kappa = 3 clause (1)
    quantifies over well adapted coordinates; the directrix pins the U_3
    candidate, so only a single substitution (with re-preparation) is tried,
    and the flag reports when a failed search was not provably exhaustive.
    """
    from .prepare import minimize

    if state.n != 3:
        raise StateError("the full projection number needs n = 3")
    core = core or invariant_core(state)
    spaces = spaces or derived_spaces(state, core)
    omega, kappa1 = omega_kappa(state, core, spaces)
    if kappa1 == 1:
        return 1, True
    if omega == 0:
        return 2, True
    _, dir_basis, tau_p, _ = adapted_cone(state, core, spaces)
    e = state.e
    if _dir_in_exceptional(dir_basis, e):
        return 4, True
    if omega != core.eps - 1:
        return 2, True
    if e == 2:
        return 3, True
    if e != 1:
        return 2, True
    # e = 1: search for adapted coordinates with Vdir <= <U1,U3> and
    # H^{-1} dF_p/dU_2 inside <U_1^omega>
    k = state.field
    quotient = rref_forms([lf.subst_zero([0]) for lf in dir_basis])
    if len(quotient) > 1:
        return 2, True  # Vdir not contained in any <U1, U3'>
    cur = state
    exhaustive = True
    if quotient:
        coeffs = linear_form_coeffs(quotient[0])
        if not k.is_zero(coeffs[2]):
            if not (k.is_zero(coeffs[1]) and coeffs[2] == k.one()):
                repl = SparsePolynomial.variable(k, 3, 2).scale(k.inv(coeffs[2]))
                repl = repl + SparsePolynomial.variable(k, 3, 1).scale(
                    k.neg(k.div(coeffs[1], coeffs[2]))
                )
                cur = state.substitute_var(2, repl)
                exhaustive = False
        else:
            cur = state.replace(coeffs=tuple(f.permute_vars([0, 2, 1]) for f in state.coeffs))
            exhaustive = False
    if cur is not state:
        cur, status = minimize(cur)
        if status != "minimal":
            return 2, False
    ccore = invariant_core(cur)
    inf = cur.initial_form(_ones(3))
    Fp = inf.F(cur.p)
    ok = False
    if Fp is not None:
        Hm = tuple(ccore.H_exp) + (0,) * 2
        dF2 = Fp.derivative(1).div_monomial(Hm)
        target = SparsePolynomial.monomial(k, 3, (omega, 0, 0))
        ok = dF2.is_zero() or span_contains(rref_forms([target]), dF2)
    if ok:
        return 3, True
    return 2, exhaustive


def tau_multiplicity(state: HypersurfaceState, core=None):
    """tau(x): directrix dimension of the degree-m initial form in (Z, U) jointly.

    Also returns the Dir != Max flag of the ambient 4-variable cone.
    """
    core = core or invariant_core(state)
    p, n = state.p, state.n
    k = state.residue_field()
    if core.m < p:
        return None, False
    # build in_{m_x} h in variables (Z, U_1..U_n): degree-p part of h
    form = SparsePolynomial(k, n + 1)
    form._add_term((p,) + (0,) * n, k.one())
    if state.mode == "arithmetic":
        for i, f in enumerate(state.coeffs, start=1):
            o = p_order(f, p, cap=state.precision)
            if o is not None and (p - i) + o == p:
                c = k.from_int((f // p**o) % p)
                form._add_term((p - i, o), c)
    else:
        for i, f in enumerate(state.coeffs, start=1):
            for exps, c in f.terms.items():
                if (p - i) + sum(exps) == p:
                    form._add_term((p - i,) + exps, c)
    flag = _detect_quadric_exception([form])
    basis = vdir_basis([form])
    return len(basis), flag


# ---------------------------------------------------------------------------
# conditions (G), (E), (E'), initial-form dichotomy
# ---------------------------------------------------------------------------


def _poly_exact_div(a, b):
    """Exact division in the polynomial ring (raises when not divisible)."""
    field = a.field
    q = SparsePolynomial(field, a.n)
    r = a
    key = lambda e: (sum(e), e)
    while not r.is_zero():
        lb = max(b.terms, key=key)
        lr = max(r.terms, key=key)
        exps = tuple(x - y for x, y in zip(lr, lb))
        if any(x < 0 for x in exps):
            raise ValueError("not divisible")
        c = field.div(r.coeff(lr), b.coeff(lb))
        t = SparsePolynomial.monomial(field, a.n, exps, c)
        q = q + t
        r = r - t * b
    return q


def _det_bareiss(mat, one, is_int):
    """Fraction-free determinant (Bareiss) over Z or a polynomial ring."""
    m = [row[:] for row in mat]
    n = len(m)
    if n == 0:
        return one
    prev = one
    sign = 1
    for k in range(n - 1):
        if (m[k][k] == 0) if is_int else m[k][k].is_zero():
            swap = next(
                (i for i in range(k + 1, n) if not ((m[i][k] == 0) if is_int else m[i][k].is_zero())),
                None,
            )
            if swap is None:
                return 0 if is_int else m[k][k]
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = num // prev if is_int else _poly_exact_div(num, prev) if not _is_one(prev, is_int) else num
        prev = m[k][k]
    det = m[n - 1][n - 1]
    if sign < 0:
        det = -det
    return det


def _is_one(x, is_int):
    if is_int:
        return x == 1
    return x.is_constant() and x.field.is_zero(x.field.sub(x.constant_term(), x.field.one()))


def discriminant(state: HypersurfaceState):
    """Disc_Z(h) via the Sylvester resultant of (h, dh/dZ).

    Returns an integer in arithmetic mode, a SparsePolynomial otherwise;
    dh/dZ is taken with its formal degree p-1 (leading coefficients may
    vanish in characteristic p, only the divisor of the result is used).
    """
    p = state.p
    if state.mode == "arithmetic":
        h = [1] + list(state.coeffs)  # degree p .. 0
        dh = [(p - i) * h[i] for i in range(p)]
        size = 2 * p - 1
        mat = [[0] * size for _ in range(size)]
        for r in range(p - 1):
            for c, v in enumerate(h):
                mat[r][r + c] = v
        for r in range(p):
            for c, v in enumerate(dh):
                mat[p - 1 + r][r + c] = v
        return _det_bareiss(mat, 1, True)
    k = state.field
    one = SparsePolynomial.constant(k, state.n, k.one())
    zero = SparsePolynomial(k, state.n)
    h = [one] + list(state.coeffs)
    dh = [h[i].scale(k.from_int(p - i)) for i in range(p)]
    size = 2 * p - 1
    mat = [[zero] * size for _ in range(size)]
    for r in range(p - 1):
        for c, v in enumerate(h):
            mat[r][r + c] = v
    for r in range(p):
        for c, v in enumerate(dh):
            mat[p - 1 + r][r + c] = v
    return _det_bareiss(mat, one, False)


def _monomial_unit_split(f: SparsePolynomial):
    """f = u^m * f' with m the componentwise support minimum; returns (m, f')."""
    m = tuple(min(e[j] for e in f.terms) for j in range(f.n))
    return m, f.div_monomial(m)


def _insep_singular_outside_E(state: HypersurfaceState):
    """Detect multiplicity-p codimension-one loci off E for h = Z^p + f_p."""
    fp = state.coeffs[-1]
    if fp.is_zero():
        return True  # h a p-th power: degenerate, flagged elsewhere
    # coordinate directions: d_(u_j) >= 1 for a non-exceptional j
    for j in range(state.e, state.n):
        if min(Fraction(min(e[j] for e in f.terms), i) if not f.is_zero() else Fraction(10**9)
               for i, f in enumerate(state.coeffs, start=1)) >= 1:
            return True
    # non-coordinate components: a p-th-power factor of f_p off the axes
    try:
        factors = _factor_over_prime(state, fp)
    except StateError:
        return None  # unknown
    for g_support, mult in factors:
        if mult >= state.p and not _is_axis(g_support, state):
            return True
    return False


def _is_axis(g_vars, state):
    if len(g_vars) != 1:
        return False
    (j,) = g_vars
    return j < state.e


def _factor_over_prime(state, fp):
    """Factor f_p over GF(p) via sympy; transcendentals count as variables.

    Returns [(support_variable_set, multiplicity)] for the non-unit factors;
    factors purely in the transcendentals are units in the localized base and
    are skipped.
    """
    import sympy

    k = state.field
    names = list(state.names)
    tnames = list(k.transcendentals()) if k.transcendentals() else []
    if k.kind not in ("prime", "ratfunc"):
        raise StateError("factorization only over prime/ratfunc coefficients")
    syms = sympy.symbols(names + tnames)
    expr = sympy.Integer(0)
    for exps, c in fp.terms.items():
        if k.kind == "prime":
            ce = sympy.Integer(c)
        else:
            num = _polyelem_to_sympy(c.numer, tnames, syms[len(names):], state.p)
            den = _polyelem_to_sympy(c.denom, tnames, syms[len(names):], state.p)
            ce = num  # multiply out denominators: units at the closed point
            if den != 1:
                raise StateError("factorization needs polynomial coefficients")
        mono = sympy.Integer(1)
        for s, e in zip(syms, exps):
            mono *= s**e
        expr += ce * mono
    _, factors = sympy.factor_list(sympy.Poly(expr, *syms, modulus=state.p))
    out = []
    for fac, mult in factors:
        fvars = {i for i, s in enumerate(syms[: len(names)]) if fac.has(s)}
        if not fvars:
            continue  # unit (transcendentals only)
        out.append((fvars, mult))
    return out


def _polyelem_to_sympy(pe, names, syms, p):
    import sympy

    out = sympy.Integer(0)
    for mono, c in pe.terms():
        term = sympy.Integer(int(c) % p)
        for s, e in zip(syms, mono):
            term *= s**e
        out += term
    return out


def validate_conditions(state: HypersurfaceState) -> dict:
    """Report {"G","E","Eprime","initform"} -> bool (True = pass)."""
    from .prepare import minimize

    p = state.p
    report = {}
    insep = state.is_purely_inseparable()
    D = discriminant(state)
    d_zero = (D == 0) if state.mode == "arithmetic" else D.is_zero()
    # (G): purely inseparable shape or separable (nonzero discriminant), and
    # h reduced (minimal polyhedron nonempty)
    reduced = True
    try:
        mstate, status = minimize(state)
        reduced = not mstate.polyhedron().is_empty()
    except StateError:
        mstate, status = state, "error"
    report["G"] = (insep or not d_zero) and reduced
    # (E)
    if state.mode == "arithmetic":
        report["E"] = True if state.e == 1 else (not d_zero and p_order(D, p) == 0)
    elif not d_zero:
        mexp, unit_part = _monomial_unit_split(D)
        const_ok = not state.field.is_zero(unit_part.constant_term())
        support_ok = all(mexp[j] == 0 for j in range(state.e, state.n))
        report["E"] = const_ok and support_ok
    else:
        bad = _insep_singular_outside_E(mstate if reduced else state)
        report["E"] = (bad is False) if bad is not None else True
        if bad is None:
            report["E_unknown"] = True
    # initial-form dichotomy
    try:
        core = invariant_core(mstate)
        report["initform"] = True
    except (ConditionError, StateError):
        core = None
        report["initform"] = False
    # (E'): E pass and (omega >= p implies every component of E is in Sing_p)
    if core is None:
        report["Eprime"] = False
    else:
        try:
            omega, _ = omega_kappa(mstate, core)
        except StateError:
            omega = None
        if omega is None:
            report["Eprime"] = False
        elif omega < p:
            report["Eprime"] = report["E"]
        else:
            report["Eprime"] = report["E"] and all(dj >= 1 for dj in core.d)
    return report


# ---------------------------------------------------------------------------
# assembled record
# ---------------------------------------------------------------------------


def invariant_record(state: HypersurfaceState, full_kappa: bool | None = None) -> InvariantRecord:
    """The full ladder on a minimal state; kappa in {1..4} when n = 3."""
    core = invariant_core(state)
    p = state.p
    if core.m < p:
        core.omega = 0
        core.kappa = 1
        core.kappa_coarse = 1
        tau, flag = tau_multiplicity(state, core)
        core.tau = tau
        core.max_neq_dir = flag
        return core
    spaces = derived_spaces(state, core) if core.eps > 0 else None
    omega, kappa1 = omega_kappa(state, core, spaces)
    core.omega = omega
    core.kappa_coarse = kappa1
    tau, tflag = tau_multiplicity(state, core)
    core.tau = tau
    core.max_neq_dir = tflag
    if omega > 0 and spaces is not None:
        mx, dirb, taup, dflag = adapted_cone(state, core, spaces)
        core.dir_basis = tuple(dirb)
        core.tau_prime = taup
        core.max_neq_dir = core.max_neq_dir or dflag
    do_full = full_kappa if full_kappa is not None else (state.n == 3)
    if do_full and state.n == 3 and omega > 0:
        kappa, exhaustive = kappa_full(state, core, spaces)
        core.kappa = kappa
        core.kappa3_search_exhaustive = exhaustive
    else:
        core.kappa = kappa1
    return core
