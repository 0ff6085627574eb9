"""Tiny linear algebra over the exact fields, with forms as vectors."""

from __future__ import annotations

from .poly import SparsePolynomial


def rref_forms(forms):
    """Row-reduce a list of forms; returns an echelon basis of their span.

    Monomials are ordered grevlex-ish (total degree, then exponent tuple);
    works for mixed degrees too since distinct degrees never share monomials.
    """
    forms = [f for f in forms if f is not None and not f.is_zero()]
    if not forms:
        return []
    field = forms[0].field
    basis = []  # list of (pivot_monomial, form) with leading coeff 1
    for f in forms:
        g = f
        for piv, bf in basis:
            c = g.coeff(piv)
            if not field.is_zero(c):
                g = g - bf.scale(c)
        if g.is_zero():
            continue
        piv = max(g.terms, key=lambda e: (sum(e), e))
        g = g.scale(field.inv(g.coeff(piv)))
        basis.append((piv, g))
        # back-substitute to keep reduced form
        for i, (pv, bf) in enumerate(basis[:-1]):
            c = bf.coeff(piv)
            if not field.is_zero(c):
                basis[i] = (pv, bf - g.scale(c))
    basis.sort(key=lambda t: (sum(t[0]), t[0]), reverse=True)
    return [bf for _, bf in basis]


def span_contains(basis, f) -> bool:
    """Is f in the span of an rref basis?"""
    if f.is_zero():
        return True
    field = f.field
    g = f
    for bf in basis:
        piv = max(bf.terms, key=lambda e: (sum(e), e))
        c = g.coeff(piv)
        if not field.is_zero(c):
            g = g - bf.scale(c)
    return g.is_zero()


def spans_equal(a, b) -> bool:
    ra, rb = rref_forms(a), rref_forms(b)
    return len(ra) == len(rb) and all(span_contains(rb, f) for f in ra)


def eval_form(f: SparsePolynomial, point):
    """Evaluate at a tuple of field elements."""
    k = f.field
    total = k.zero()
    for exps, c in f.terms.items():
        v = c
        for x, e in zip(point, exps):
            if e:
                v = k.mul(v, k.pow(x, e))
        total = k.add(total, v)
    return total


def linear_form_coeffs(f: SparsePolynomial):
    """Coefficient vector of a degree-one form."""
    out = [f.field.zero()] * f.n
    for exps, c in f.terms.items():
        (j,) = [i for i, e in enumerate(exps) if e]
        if exps[j] != 1:
            raise ValueError("not a linear form")
        out[j] = c
    return out
