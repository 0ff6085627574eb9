"""Vertex preparation: solvable-vertex detection, dissolution, minimization.

A vertex v of the characteristic polyhedron is solvable when v has integer
coordinates, the middle initial-form coefficients F_1..F_{p-1} vanish on the
face {v} (the binomial coefficients C(p,i) die in residue characteristic p,
so this is the right criterion in both modes) and the vertex coefficient mu
of F_p satisfies lambda^p = -mu for some residue lambda.  Dissolving is the
translation Z := Z - gamma*u^v with gamma a lift of lambda.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .poly import SparsePolynomial
from .state import HypersurfaceState, StateError, p_order

MINIMAL = "minimal"
BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class SolvableWitness:
    vertex: tuple
    residue: object  # dissolving residue lambda in the residue field
    lift: object  # polynomial (equichar) or integer (arithmetic) gamma


def _integral(v):
    return all(Fraction(x).denominator == 1 for x in v)


def find_solvable_vertex(state: HypersurfaceState):
    """First solvable vertex in (|v|, lex) scan order, or None (= minimal)."""
    poly = state.polyhedron()
    p = state.p
    k = state.residue_field()
    for v in sorted(poly.vertices, key=lambda v: (sum(v), v)):
        if not _integral(v):
            continue
        inf = state.vertex_initial_form(v)
        if any(i < p for i in inf.forms):
            continue
        Fp = inf.F(p)
        if Fp is None:
            continue
        ((exps, mu),) = Fp.terms.items()
        lam = k.pth_root(k.neg(mu))
        if lam is None or k.is_zero(lam):
            continue
        if state.mode == "arithmetic":
            v0 = int(v[0])
            cof = state.coeffs[-1] // p**(p * v0)
            lift = -cof  # an integer lift of lambda (== -mu mod p)
            return SolvableWitness(tuple(v), lam, lift)
        iv = tuple(int(x) for x in v)
        lift = SparsePolynomial.monomial(state.field, state.n, iv, lam)
        return SolvableWitness(tuple(v), lam, lift)
    return None


def dissolve(state: HypersurfaceState, w: SolvableWitness) -> HypersurfaceState:
    """Apply Z := Z - gamma*u^v and recompute the coefficients exactly."""
    if state.mode == "arithmetic":
        phi = w.lift * state.p ** int(w.vertex[0])
        new = state.translate_z(phi)
        for f in new.coeffs:
            p_order(f, state.p, cap=state.precision)
    else:
        new = state.translate_z(w.lift)
    assert w.vertex not in new.polyhedron().vertices, "dissolution failed to remove vertex"
    return new


def minimize(state: HypersurfaceState, max_iter: int = 64):
    """Dissolve solvable vertices until the polyhedron is minimal.

    Returns (state, status); status is BUDGET_EXCEEDED when max_iter greedy
    dissolutions were not enough (the minimizing translation can be a genuine
    power series, in which case we surface the partial state).
    """
    if max_iter < 1:
        raise StateError("max_iter must be >= 1")
    cur = state
    for _ in range(max_iter):
        w = find_solvable_vertex(cur)
        if w is None:
            return cur, MINIMAL
        cur = dissolve(cur, w)
    if find_solvable_vertex(cur) is None:
        return cur, MINIMAL
    return cur, BUDGET_EXCEEDED


def dissolution_trace(state: HypersurfaceState, max_iter: int = 64):
    """Like minimize, but records (vertex, lambda, new vertex set) per step."""
    cur = state
    steps = []
    status = MINIMAL
    for it in range(max_iter + 1):
        w = find_solvable_vertex(cur)
        if w is None:
            break
        if it == max_iter:
            status = BUDGET_EXCEEDED
            break
        cur = dissolve(cur, w)
        k = cur.residue_field()
        steps.append(
            {
                "vertex": [str(x) for x in w.vertex],
                "lambda": k.format(w.residue),
                "new_vertices": [[str(x) for x in v] for v in cur.polyhedron().vertices],
            }
        )
    return cur, steps, status
