"""Sparse multivariate polynomials over an exact coefficient field.

Terms are stored as ``{exponent_tuple: nonzero coefficient}``.  These double
as graded forms over residue fields (initial forms, derived-space bases), so
derivations and Hasse-Schmidt derivatives live here too.
"""

from __future__ import annotations

from math import comb

from .fields import Field, FieldError


class SparsePolynomial:
    __slots__ = ("field", "n", "terms")

    def __init__(self, field: Field, n: int, terms=None):
        self.field = field
        self.n = n
        self.terms: dict[tuple[int, ...], object] = {}
        if terms:
            for exps, c in terms.items() if isinstance(terms, dict) else terms:
                self._add_term(exps, c)

    def _add_term(self, exps, c):
        exps = tuple(exps)
        if len(exps) != self.n or any(e < 0 for e in exps):
            raise ValueError(f"bad exponent vector {exps} for n={self.n}")
        if self.field.is_zero(c):
            return
        cur = self.terms.get(exps)
        if cur is None:
            self.terms[exps] = c
        else:
            s = self.field.add(cur, c)
            if self.field.is_zero(s):
                del self.terms[exps]
            else:
                self.terms[exps] = s

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, field, n):
        return cls(field, n)

    @classmethod
    def constant(cls, field, n, c):
        p = cls(field, n)
        p._add_term((0,) * n, c)
        return p

    @classmethod
    def monomial(cls, field, n, exps, c=None):
        p = cls(field, n)
        p._add_term(exps, field.one() if c is None else c)
        return p

    @classmethod
    def variable(cls, field, n, j):
        exps = [0] * n
        exps[j] = 1
        return cls.monomial(field, n, exps)

    # -- predicates --------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(sum(e) == 0 for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.n, self.field.zero())

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self):
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def support(self):
        return set(self.terms)

    def coeff(self, exps):
        return self.terms.get(tuple(exps), self.field.zero())

    def __eq__(self, other):
        return (
            isinstance(other, SparsePolynomial)
            and other.n == self.n
            and other.terms == self.terms
        )

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        return f"<poly {self.format(['u%d' % (i + 1) for i in range(self.n)])}>"

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        out = SparsePolynomial(self.field, self.n, dict(self.terms))
        for exps, c in other.terms.items():
            out._add_term(exps, c)
        return out

    def __neg__(self):
        out = SparsePolynomial(self.field, self.n)
        for exps, c in self.terms.items():
            out.terms[exps] = self.field.neg(c)
        return out

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = SparsePolynomial(self.field, self.n)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out._add_term(
                    tuple(a + b for a, b in zip(e1, e2)), self.field.mul(c1, c2)
                )
        return out

    def scale(self, c):
        out = SparsePolynomial(self.field, self.n)
        if self.field.is_zero(c):
            return out
        for exps, cc in self.terms.items():
            out.terms[exps] = self.field.mul(cc, c)
        return out

    def pow(self, k: int):
        out = SparsePolynomial.constant(self.field, self.n, self.field.one())
        b = self
        while k:
            if k & 1:
                out = out * b
            if k > 1:
                b = b * b
            k >>= 1
        return out

    def mul_monomial(self, exps, c=None):
        out = SparsePolynomial(self.field, self.n)
        c = self.field.one() if c is None else c
        for e, cc in self.terms.items():
            out._add_term(tuple(a + b for a, b in zip(e, exps)), self.field.mul(cc, c))
        return out

    def div_monomial(self, exps):
        """Exact division by u^exps; raises if not divisible."""
        out = SparsePolynomial(self.field, self.n)
        for e, cc in self.terms.items():
            ne = tuple(a - b for a, b in zip(e, exps))
            if any(x < 0 for x in ne):
                raise ValueError("monomial division is not exact")
            out.terms[ne] = cc
        return out

    # -- substitutions ---------------------------------------------------------
    def subst_var(self, j: int, repl: "SparsePolynomial"):
        """Substitute variable j by an arbitrary polynomial."""
        out = SparsePolynomial(self.field, self.n)
        cache = {0: SparsePolynomial.constant(self.field, self.n, self.field.one())}

        def rp(k):
            if k not in cache:
                cache[k] = rp(k - 1) * repl
            return cache[k]

        for e, c in self.terms.items():
            rest = list(e)
            k = rest[j]
            rest[j] = 0
            term = rp(k).mul_monomial(tuple(rest), c)
            for ee, cc in term.terms.items():
                out._add_term(ee, cc)
        return out

    def subst_zero(self, js):
        """Set the variables in ``js`` to 0."""
        out = SparsePolynomial(self.field, self.n)
        js = set(js)
        for e, c in self.terms.items():
            if all(e[j] == 0 for j in js):
                out._add_term(e, c)
        return out

    def translate_var(self, j: int, exps, c):
        """Substitute u_j := u_j + c * u^exps (binomial expansion per term)."""
        if self.field.is_zero(c):
            return self
        repl = SparsePolynomial.variable(self.field, self.n, j) + SparsePolynomial.monomial(
            self.field, self.n, exps, c
        )
        return self.subst_var(j, repl)

    def permute_vars(self, perm):
        """perm[i] = old index shown at new position i."""
        out = SparsePolynomial(self.field, self.n)
        for e, c in self.terms.items():
            out.terms[tuple(e[perm[i]] for i in range(self.n))] = c
        return out

    def map_coeffs(self, fn, new_field=None):
        out = SparsePolynomial(new_field or self.field, self.n)
        for e, c in self.terms.items():
            out._add_term(e, fn(c))
        return out

    # -- derivations -----------------------------------------------------------
    def derivative(self, j: int):
        """Plain d/du_j; the degree drops by one, char-p terms vanish."""
        out = SparsePolynomial(self.field, self.n)
        for e, c in self.terms.items():
            if e[j] == 0:
                continue
            ne = list(e)
            ne[j] -= 1
            out._add_term(tuple(ne), self.field.mul(c, self.field.from_int(e[j])))
        return out

    def log_derivative(self, j: int):
        """u_j * d/du_j (degree preserved)."""
        out = SparsePolynomial(self.field, self.n)
        for e, c in self.terms.items():
            out._add_term(e, self.field.mul(c, self.field.from_int(e[j])))
        return out

    def const_derivative(self, name: str):
        """d/dt_name applied coefficientwise (rational function fields)."""
        out = SparsePolynomial(self.field, self.n)
        for e, c in self.terms.items():
            out._add_term(e, self.field.diff_const(c, name))
        return out

    def hasse_derivative(self, alpha):
        """Hasse-Schmidt derivative D^alpha (divided-power derivative)."""
        out = SparsePolynomial(self.field, self.n)
        for e, c in self.terms.items():
            coeff = 1
            ne = []
            for ei, ai in zip(e, alpha):
                if ei < ai:
                    coeff = 0
                    break
                coeff = coeff * comb(ei, ai)
                ne.append(ei - ai)
            if coeff == 0:
                continue
            fc = self.field.from_int(coeff % self.field.p)
            out._add_term(tuple(ne), self.field.mul(c, fc))
        return out

    def frobenius_root(self):
        """Return g with g**p == self, or None (coefficientwise p-th roots)."""
        p = self.field.p
        out = SparsePolynomial(self.field, self.n)
        for e, c in self.terms.items():
            if any(x % p for x in e):
                return None
            r = self.field.pth_root(c)
            if r is None:
                return None
            out._add_term(tuple(x // p for x in e), r)
        return out

    def kp_components(self):
        """Split ``F = sum_t b_t * (G_t)**p`` over the k/k^p basis.

        Requires all exponents divisible by p; returns ``{tag: G_t}``.
        """
        p = self.field.p
        comps: dict[tuple, SparsePolynomial] = {}
        for e, c in self.terms.items():
            if any(x % p for x in e):
                raise ValueError("kp_components needs p-divisible exponents")
            root_e = tuple(x // p for x in e)
            for tag, r in self.field.kp_decompose(c):
                comps.setdefault(tag, SparsePolynomial(self.field, self.n))._add_term(
                    root_e, r
                )
        return {t: g for t, g in comps.items() if not g.is_zero()}

    # -- output ------------------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]))

    def format(self, names) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            cs = self.field.format(c)
            factors = []
            for nm, k in zip(names, e):
                if k == 1:
                    factors.append(nm)
                elif k > 1:
                    factors.append(f"{nm}^{k}")
            if not factors:
                parts.append(f"({cs})" if ("+" in cs or "/" in cs or "*" in cs) else cs)
            else:
                mono = "*".join(factors)
                if cs == "1":
                    parts.append(mono)
                else:
                    cs = f"({cs})" if ("+" in cs or "/" in cs) else cs
                    parts.append(f"{cs}*{mono}")
        return " + ".join(parts)


def monomial_expansion(f: SparsePolynomial, J) -> list[tuple[tuple[int, ...], SparsePolynomial]]:
    """Minimal monomial generators of the J-exponents of supp(f), with cofactors.

    Returns pairs ``(a, gamma)`` where the ``u^a`` (a on the J coordinates)
    minimally generate the monomial ideal of J-exponents and ``gamma``
    collects every term whose J-exponent dominates ``a``, assigned to the
    lexicographically smallest applicable generator.  Each cofactor keeps a
    term with J-part exactly ``a``, hence lies outside (u_j, j in J).
    """
    if f.is_zero():
        raise ValueError("monomial_expansion of the zero polynomial")
    J = sorted(J)
    projected = {tuple(e[j] for j in J) for e in f.terms}
    gens = sorted(
        a
        for a in projected
        if not any(b != a and all(bi <= ai for bi, ai in zip(b, a)) for b in projected)
    )
    cofactors = {a: SparsePolynomial(f.field, f.n) for a in gens}
    for e, c in f.terms.items():
        ej = tuple(e[j] for j in J)
        target = next(a for a in gens if all(ai <= xi for ai, xi in zip(a, ej)))
        rest = list(e)
        for a_i, j in zip(target, J):
            rest[j] -= a_i
        cofactors[target]._add_term(tuple(rest), c)
    return [(a, cofactors[a]) for a in gens]


# ---------------------------------------------------------------------------
# Polynomial text grammar (shared with the CLI):
#   terms like  c*Z^2*u1^3*u2 ;  coefficients are integer literals,
#   transcendental names and + - * / ( ) ^ over them.
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} (at column {pos + 1})")
        self.pos = pos


class _Tok:
    def __init__(self, kind, val, pos):
        self.kind, self.val, self.pos = kind, val, pos


def _tokenize(text):
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", int(text[i:j]), i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("name", text[i:j], i))
            i = j
        elif ch in "+-*/^()":
            toks.append(_Tok(ch, ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    toks.append(_Tok("end", None, len(text)))
    return toks


class PolyParser:
    """Recursive-descent parser into k[Z, u_1..u_n].

    Values are pairs of a Z-degree-indexed dict of SparsePolynomials; scalars
    are degree-0 entries that may also be pure field elements.  Division is
    legal only by field elements (degree 0 in Z and the u's).
    """

    def __init__(self, field, names, zvars=("Z", "X")):
        self.field = field
        self.names = list(names)
        self.zvars = set(zvars)
        self.n = len(names)

    def parse(self, text) -> dict[int, SparsePolynomial]:
        self.toks = _tokenize(text)
        self.i = 0
        val = self._expr()
        if self._peek().kind != "end":
            raise ParseError("trailing input", self._peek().pos)
        return val

    def _peek(self):
        return self.toks[self.i]

    def _next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def _zero(self):
        return {}

    def _const(self, c):
        if self.field.is_zero(c):
            return {}
        return {0: SparsePolynomial.constant(self.field, self.n, c)}

    def _add(self, a, b):
        out = dict(a)
        for d, p in b.items():
            out[d] = out[d] + p if d in out else p
            if out[d].is_zero():
                del out[d]
        return out

    def _negv(self, a):
        return {d: -p for d, p in a.items()}

    def _mul(self, a, b):
        out = {}
        for d1, p1 in a.items():
            for d2, p2 in b.items():
                q = p1 * p2
                d = d1 + d2
                if d in out:
                    q = out[d] + q
                if q.is_zero():
                    out.pop(d, None)
                else:
                    out[d] = q
        return out

    def _as_scalar(self, a, pos):
        if not a:
            return self.field.zero()
        if set(a) == {0} and a[0].is_constant():
            return a[0].constant_term()
        raise ParseError("division only by scalar coefficients", pos)

    def _expr(self):
        t = self._peek()
        neg = False
        if t.kind in "+-":
            self._next()
            neg = t.kind == "-"
        val = self._term()
        if neg:
            val = self._negv(val)
        while self._peek().kind in "+-":
            op = self._next().kind
            rhs = self._term()
            val = self._add(val, self._negv(rhs) if op == "-" else rhs)
        return val

    def _term(self):
        val = self._power()
        while self._peek().kind in "*/":
            op = self._next()
            rhs = self._power()
            if op.kind == "*":
                val = self._mul(val, rhs)
            else:
                c = self._as_scalar(rhs, op.pos)
                if self.field.is_zero(c):
                    raise ParseError("division by zero", op.pos)
                val = self._mul(val, self._const(self.field.inv(c)))
        return val

    def _power(self):
        base = self._atom()
        if self._peek().kind == "^":
            pos = self._next().pos
            t = self._next()
            if t.kind != "int":
                raise ParseError("exponent must be an integer literal", pos)
            out = self._const(self.field.one())
            for _ in range(t.val):
                out = self._mul(out, base)
            return out
        return base

    def _atom(self):
        t = self._next()
        if t.kind == "int":
            return self._const(self.field.from_int(t.val))
        if t.kind == "(":
            val = self._expr()
            if self._next().kind != ")":
                raise ParseError("missing closing parenthesis", t.pos)
            return val
        if t.kind == "-":
            return self._negv(self._atom())
        if t.kind == "name":
            if t.val in self.zvars:
                return {1: SparsePolynomial.constant(self.field, self.n, self.field.one())}
            if t.val in self.names:
                j = self.names.index(t.val)
                return {0: SparsePolynomial.variable(self.field, self.n, j)}
            if t.val in self.field.transcendentals():
                return self._const(self.field.gen_element(t.val))
            raise ParseError(f"unknown name {t.val!r}", t.pos)
        raise ParseError(f"unexpected token {t.val!r}", t.pos)
