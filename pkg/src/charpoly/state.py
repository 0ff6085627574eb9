"""Hypersurface data (S, h, E) and the operations that move it around.

A state holds h = Z^p + f_1 Z^{p-1} + ... + f_p over either

* equicharacteristic mode: S = k[u_1..u_n] localized at the origin, k one of
  the exact coefficient fields, E = div(u_1 ... u_e);
* arithmetic mode: S = Z_(p) with the single "variable" u_1 = p, the f_i
  being plain integers tracked exactly (a precision cap turns runaway p-order
  growth into an explicit error instead of silent truncation).

States are immutable; every operation returns a fresh state.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

from .fields import Field, PrimeField, RationalFunctionField, is_prime
from .poly import SparsePolynomial, monomial_expansion
from .polyhedron import NewtonPolyhedron


class StateError(ValueError):
    pass


class PrecisionError(StateError):
    """Raised when an arithmetic-mode p-order exceeds the precision cap."""


def p_order(n: int, p: int, cap: int | None = None):
    """Exact p-adic order of an integer; None stands for +infinity (n = 0)."""
    if n == 0:
        return None
    k = 0
    while n % p == 0:
        n //= p
        k += 1
        if cap is not None and k > cap:
            raise PrecisionError(f"p-order exceeds precision cap {cap}")
    return k


class HypersurfaceState:
    __slots__ = ("mode", "p", "field", "names", "e", "coeffs", "z_history", "precision", "_cache")

    def __init__(self, p, names, e, coeffs, field=None, mode="equichar", z_history=(), precision=512):
        if not is_prime(p):
            raise StateError(f"p = {p} must be prime")
        self.mode = mode
        self.p = p
        self.names = tuple(names)
        self.e = e
        self.z_history = tuple(z_history)
        self.precision = precision
        if not 0 <= e <= len(names):
            raise StateError(f"exceptional count {e} out of range")
        coeffs = tuple(coeffs)
        if len(coeffs) != p:
            raise StateError(f"need exactly p = {p} coefficients f_1..f_p")
        if mode == "equichar":
            if field is None or field.p != p:
                raise StateError("equicharacteristic mode needs a field of characteristic p")
            for f in coeffs:
                if not isinstance(f, SparsePolynomial) or f.n != len(names):
                    raise StateError("coefficients must be polynomials in the u-variables")
        elif mode == "arithmetic":
            if len(names) != 1:
                raise StateError("arithmetic mode is only legal with n = 1 (u_1 = p)")
            if field is not None:
                raise StateError("arithmetic mode has no coefficient field")
            for f in coeffs:
                if not isinstance(f, int):
                    raise StateError("arithmetic-mode coefficients are integers")
                p_order(f, p, cap=precision)
        else:
            raise StateError(f"unknown mode {mode!r}")
        self.field = field
        self.coeffs = coeffs
        self._cache = {}

    # -- basic views -------------------------------------------------------
    @property
    def n(self):
        return len(self.names)

    def residue_field(self) -> Field:
        return PrimeField(self.p) if self.mode == "arithmetic" else self.field

    def exceptional_names(self):
        return self.names[: self.e]

    def is_purely_inseparable(self):
        if self.mode == "arithmetic":
            return all(f == 0 for f in self.coeffs[:-1])
        return all(f.is_zero() for f in self.coeffs[:-1])

    def __eq__(self, other):
        return (
            isinstance(other, HypersurfaceState)
            and other.mode == self.mode
            and other.p == self.p
            and other.names == self.names
            and other.e == self.e
            and other.field == self.field
            and other.coeffs == self.coeffs
        )

    def __repr__(self):
        return f"<state p={self.p} n={self.n} e={self.e} mode={self.mode}>"

    def replace(self, **kw):
        args = dict(
            p=self.p,
            names=self.names,
            e=self.e,
            coeffs=self.coeffs,
            field=self.field,
            mode=self.mode,
            z_history=self.z_history,
            precision=self.precision,
        )
        args.update(kw)
        return HypersurfaceState(**args)

    # -- polyhedron ------------------------------------------------------------
    def generating_points(self, J=None):
        """The points a/i for a in the minimal J-support generators of f_i."""
        J = list(range(self.n)) if J is None else sorted(J)
        pts = []
        if self.mode == "arithmetic":
            for i, f in enumerate(self.coeffs, start=1):
                v = p_order(f, self.p, cap=self.precision)
                if v is not None:
                    pts.append((Fraction(v, i),))
            return pts
        for i, f in enumerate(self.coeffs, start=1):
            if f.is_zero():
                continue
            for a, _ in monomial_expansion(f, J):
                pts.append(tuple(Fraction(x, i) for x in a))
        return pts

    def polyhedron(self, J=None) -> NewtonPolyhedron:
        key = ("poly", tuple(sorted(J)) if J is not None else None)
        if key not in self._cache:
            J_ = list(range(self.n)) if J is None else sorted(J)
            self._cache[key] = NewtonPolyhedron(len(J_), self.generating_points(J))
        return self._cache[key]

    def delta(self):
        return self.polyhedron().delta()

    # -- initial forms ----------------------------------------------------------
    def initial_form(self, alpha) -> "InitialForm":
        """in_alpha h for a strictly positive weight vector on all coordinates."""
        alpha = tuple(Fraction(a) for a in alpha)
        if len(alpha) != self.n or any(a <= 0 for a in alpha):
            raise StateError(f"weight vector must be strictly positive, got {alpha}")
        poly = self.polyhedron()
        if poly.is_empty():
            raise StateError("initial form of an empty polyhedron (h = Z^p)")
        d = poly.weighted_min(alpha)
        k = self.residue_field()
        forms: dict[int, SparsePolynomial] = {}
        if self.mode == "arithmetic":
            for i, f in enumerate(self.coeffs, start=1):
                v = p_order(f, self.p, cap=self.precision)
                if v is not None and Fraction(v, i) * alpha[0] == d:
                    c = (f // self.p**v) % self.p
                    forms[i] = SparsePolynomial.monomial(k, 1, (v,), k.from_int(c))
        else:
            for i, f in enumerate(self.coeffs, start=1):
                g = SparsePolynomial(k, self.n)
                for exps, c in f.terms.items():
                    w = sum(a * Fraction(x, i) for a, x in zip(alpha, exps))
                    if w == d:
                        g._add_term(exps, c)
                if not g.is_zero():
                    forms[i] = g
        return InitialForm(self.p, alpha, d, forms)

    def vertex_initial_form(self, v) -> "InitialForm":
        """Initial form at a vertex (face = {v}); v given as Fractions."""
        v = tuple(Fraction(x) for x in v)
        k = self.residue_field()
        forms = {}
        if self.mode == "arithmetic":
            for i, f in enumerate(self.coeffs, start=1):
                w = p_order(f, self.p, cap=self.precision)
                if w is not None and Fraction(w, i) == v[0]:
                    c = (f // self.p**w) % self.p
                    forms[i] = SparsePolynomial.monomial(k, 1, (w,), k.from_int(c))
        else:
            for i, f in enumerate(self.coeffs, start=1):
                target = tuple(x * i for x in v)
                if any(x.denominator != 1 for x in target):
                    continue
                target = tuple(int(x) for x in target)
                c = f.coeff(target)
                if not k.is_zero(c):
                    # only counts when the exponent sits on the face {v}, which
                    # it does by construction (a/i == v)
                    forms[i] = SparsePolynomial.monomial(k, self.n, target, c)
        return InitialForm(self.p, None, sum(v), forms)

    # -- moves --------------------------------------------------------------------
    def translate_z(self, phi) -> "HypersurfaceState":
        """Tschirnhausen-type move Z := Z - phi, coefficients via the binomial rule."""
        p = self.p
        if self.mode == "arithmetic":
            if not isinstance(phi, int):
                raise StateError("arithmetic mode translates by integers")
            new = []
            for i in range(1, p + 1):
                acc = comb(p, i) * phi**i
                for j in range(1, i + 1):
                    acc += comb(p - j, i - j) * self.coeffs[j - 1] * phi ** (i - j)
                new.append(acc)
            label = str(phi)
        else:
            if not isinstance(phi, SparsePolynomial):
                raise StateError("equicharacteristic mode translates by polynomials")
            k = self.field
            new = []
            for i in range(1, p + 1):
                acc = phi.pow(i).scale(k.from_int(comb(p, i)))
                for j in range(1, i + 1):
                    c = k.from_int(comb(p - j, i - j))
                    if not k.is_zero(c):
                        acc = acc + (self.coeffs[j - 1] * phi.pow(i - j)).scale(c)
                new.append(acc)
            label = phi.format(self.names)
        return self.replace(coeffs=tuple(new), z_history=self.z_history + (label,))

    def translate_u(self, j: int, exps, c) -> "HypersurfaceState":
        """Coordinate move u_j := u_j + c*u^exps applied to every coefficient."""
        if self.mode == "arithmetic":
            raise StateError("no coordinate moves in arithmetic mode")
        new = tuple(f.translate_var(j, exps, c) for f in self.coeffs)
        return self.replace(coeffs=new)

    def substitute_var(self, j: int, repl: SparsePolynomial) -> "HypersurfaceState":
        if self.mode == "arithmetic":
            raise StateError("no coordinate moves in arithmetic mode")
        return self.replace(coeffs=tuple(f.subst_var(j, repl) for f in self.coeffs))

    def localize(self, J) -> "HypersurfaceState":
        """Pass to the point s^J: outside variables become transcendentals.

        The residue field of the localized base is the rational function
        field over the old one, transcendentals ordered (old t's, then the
        departing u_j ascending).
        """
        if self.mode == "arithmetic":
            raise StateError("localization is unsupported in arithmetic mode")
        J = sorted(J)
        if not J:
            raise StateError("localization needs a nonempty index set")
        if J == list(range(self.n)):
            return self
        outside = [j for j in range(self.n) if j not in J]
        out_names = tuple(self.names[j] + "_bar" for j in outside)
        k = self.field
        if isinstance(k, RationalFunctionField):
            new_field = k.extended(out_names)

            def lift(c):
                return k.cast(c, new_field)

        elif isinstance(k, PrimeField):
            new_field = RationalFunctionField(self.p, out_names)

            def lift(c):
                return new_field.from_int(c)

        else:
            raise StateError(f"localization over {k!r} is unsupported")
        new_n = len(J)
        new_coeffs = []
        for f in self.coeffs:
            g = SparsePolynomial(new_field, new_n)
            for exps, c in f.terms.items():
                cc = lift(c)
                for pos, j in enumerate(outside):
                    if exps[j]:
                        cc = new_field.mul(cc, new_field.pow(new_field.gen_element(out_names[pos]), exps[j]))
                g._add_term(tuple(exps[j] for j in J), cc)
            new_coeffs.append(g)
        new_e = sum(1 for j in J if j < self.e)
        # J is sorted, exceptional indices come first, so names stay adapted
        if [j for j in J if j < self.e] != J[:new_e]:
            raise StateError("localization must keep exceptional variables first")
        return HypersurfaceState(
            self.p,
            tuple(self.names[j] for j in J),
            new_e,
            tuple(new_coeffs),
            field=new_field,
            mode="equichar",
        )


class InitialForm:
    """in_alpha h = Z^p + sum_i F_i Z^{p-i}, graded with deg Z = delta_alpha."""

    __slots__ = ("p", "alpha", "delta", "forms")

    def __init__(self, p, alpha, delta, forms):
        self.p = p
        self.alpha = alpha
        self.delta = delta
        self.forms = forms  # {i: SparsePolynomial}, zero F_i omitted
        if alpha is not None:
            for i, g in forms.items():
                for exps in g.terms:
                    w = sum(a * Fraction(x, i) for a, x in zip(alpha, exps))
                    assert w == delta, "initial-form term off the face"

    def i0(self):
        """Least i with F_i != 0 (p when h is a pure power on the face)."""
        return min(self.forms, default=self.p)

    def F(self, i) -> SparsePolynomial:
        return self.forms.get(i)

    def format(self, names, zname="Z"):
        parts = [f"{zname}^{self.p}"]
        for i in sorted(self.forms):
            g = self.forms[i].format(names)
            zpow = "" if i == self.p else (f"*{zname}" if i == self.p - 1 else f"*{zname}^{self.p - i}")
            parts.append(f"({g}){zpow}")
        return " + ".join(parts)
