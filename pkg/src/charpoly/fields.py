"""Exact coefficient arithmetic in characteristic p.

Three field kinds are supported, all with decidable equality and exact
p-th-root extraction:

* ``PrimeField(p)`` -- elements are ints in ``[0, p)``;
* ``ExtensionField(base, modulus)`` -- tuples of base-field elements modulo a
  monic irreducible polynomial (towers allowed, so one extension per blow-up
  step composes fine);
* ``RationalFunctionField(p, names)`` -- reduced fractions of multivariate
  polynomials over F_p, backed by sympy's sparse ``FracField``.  The
  transcendental names double as an absolute p-basis of the field.
"""

from __future__ import annotations

from functools import lru_cache

from sympy.polys.domains import GF
from sympy.polys.fields import FracField


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class Field:
    """Common interface; element representation is field-kind specific."""

    p: int
    kind: str

    # -- ring structure ------------------------------------------------
    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def from_int(self, n: int):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, n: int):
        if n < 0:
            return self.pow(self.inv(a), -n)
        r, b = self.one(), a
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    def is_zero(self, a) -> bool:
        return a == self.zero()

    # -- p-structure -----------------------------------------------------
    def pth_root(self, a):
        """Return r with r**p == a, or None when a is not a p-th power."""
        raise NotImplementedError

    def kth_root(self, a, k: int):
        """Return r with r**k == a (k coprime to p), or None."""
        raise NotImplementedError

    def kp_decompose(self, a):
        """Decompose ``a = sum_t  b_t * r_t**p`` over a fixed basis of k/k^p.

        Returns a list of ``(tag, r_t)`` with nonzero ``r_t``; ``tag`` is
        ``()`` for the basis element 1.  Perfect fields always yield a single
        ``((), a**(1/p))`` component.
        """
        raise NotImplementedError

    def kp_basis_element(self, tag):
        """The field element b_t this tag stands for."""
        raise NotImplementedError

    # -- enumeration / misc -----------------------------------------------
    def size(self):
        """Number of elements, or None when infinite."""
        return None

    def elements(self):
        raise FieldError(f"cannot enumerate elements of {self!r}")

    def random(self, rng):
        raise NotImplementedError

    def transcendentals(self) -> tuple[str, ...]:
        return ()

    def diff_const(self, a, name: str):
        raise FieldError(f"no transcendental derivation d/d{name} on {self!r}")

    def format(self, a) -> str:
        raise NotImplementedError


class PrimeField(Field):
    kind = "prime"

    def __init__(self, p: int):
        if not is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        self.p = p

    def __repr__(self):
        return f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("prime", self.p))

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def pow(self, a, n):
        if n < 0:
            return pow(self.inv(a), -n, self.p)
        return pow(a, n, self.p)

    def pth_root(self, a):
        # Frobenius is the identity on F_p.
        return a % self.p

    def kth_root(self, a, k):
        a %= self.p
        if a == 0:
            return 0
        for r in range(1, self.p):
            if pow(r, k, self.p) == a:
                return r
        return None

    def kp_decompose(self, a):
        a %= self.p
        return [((), a)] if a else []

    def kp_basis_element(self, tag):
        return 1

    def size(self):
        return self.p

    def elements(self):
        return range(self.p)

    def random(self, rng):
        return rng.randrange(self.p)

    def format(self, a):
        return str(a % self.p)


class ExtensionField(Field):
    """F_{q^d} = base[x]/(modulus), elements as coefficient tuples (low first).

    ``modulus`` lists the monic modulus' coefficients of degree 0..d-1; the
    leading 1 is implicit.  Irreducibility over the base is verified by trial
    division at construction.
    """

    kind = "extension"

    def __init__(self, base: Field, modulus, gen_name: str = "g"):
        if base.size() is None:
            raise FieldError("extensions only over finite base fields")
        self.base = base
        self.p = base.p
        self.modulus = tuple(modulus)
        self.degree = len(self.modulus)
        self.gen_name = gen_name
        if self.degree < 2:
            raise FieldError("extension degree must be >= 2")
        self._size = base.size() ** self.degree
        if not self._irreducible():
            raise FieldError("modulus polynomial is reducible over the base")

    def __repr__(self):
        return f"GF({self.base.size()}^{self.degree}; {self.gen_name})"

    def __eq__(self, other):
        return (
            isinstance(other, ExtensionField)
            and other.base == self.base
            and other.modulus == self.modulus
        )

    def __hash__(self):
        return hash(("ext", self.base, self.modulus))

    # polynomial helpers over the base field
    def _poly_mul(self, u, v):
        b = self.base
        out = [b.zero()] * (len(u) + len(v) - 1)
        for i, ci in enumerate(u):
            if b.is_zero(ci):
                continue
            for j, cj in enumerate(v):
                out[i + j] = b.add(out[i + j], b.mul(ci, cj))
        return out

    def _poly_rem(self, u, mod):
        b = self.base
        u = list(u)
        d = len(mod)  # monic of degree d with coeffs mod[0..d-1]
        for i in range(len(u) - 1, d - 1, -1):
            c = u[i]
            if b.is_zero(c):
                continue
            u[i] = b.zero()
            for j in range(d):
                u[i - d + j] = b.sub(u[i - d + j], b.mul(c, mod[j]))
        return u[:d] + [b.zero()] * (d - len(u))

    def _irreducible(self):
        # trial division by monic polys of degree <= d/2
        b = self.base
        for deg in range(1, self.degree // 2 + 1):
            for tail in _tuples(list(b.elements()), deg):
                divisor = list(tail) + [b.one()]
                if self._poly_divides(divisor, list(self.modulus) + [b.one()]):
                    return False
        return True

    def _poly_divides(self, div, poly):
        b = self.base
        poly = list(poly)
        dd = len(div) - 1
        while len(poly) - 1 >= dd:
            lead = poly[-1]
            if b.is_zero(lead):
                poly.pop()
                continue
            inv = b.inv(div[-1])
            f = b.mul(lead, inv)
            off = len(poly) - 1 - dd
            for j in range(dd + 1):
                poly[off + j] = b.sub(poly[off + j], b.mul(f, div[j]))
            poly.pop()
        return all(b.is_zero(c) for c in poly)

    def zero(self):
        return (self.base.zero(),) * self.degree

    def one(self):
        return (self.base.one(),) + (self.base.zero(),) * (self.degree - 1)

    def gen(self):
        z, o = self.base.zero(), self.base.one()
        return (z, o) + (z,) * (self.degree - 2)

    def embed(self, a):
        """Embed a base-field element."""
        return (a,) + (self.base.zero(),) * (self.degree - 1)

    def from_int(self, n):
        return self.embed(self.base.from_int(n))

    def add(self, a, b):
        return tuple(self.base.add(x, y) for x, y in zip(a, b))

    def neg(self, a):
        return tuple(self.base.neg(x) for x in a)

    def mul(self, a, b):
        return tuple(self._poly_rem(self._poly_mul(list(a), list(b)), self.modulus))

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError("inverse of zero")
        # a^(q-2) in the multiplicative group
        return self.pow(a, self._size - 2)

    def degree_over_prime(self):
        d, f = self.degree, self.base
        while isinstance(f, ExtensionField):
            d *= f.degree
            f = f.base
        return d

    def pth_root(self, a):
        return self.pow(a, self._size // self.p)

    def kth_root(self, a, k):
        if self.is_zero(a):
            return self.zero()
        for r in self.elements():
            if not self.is_zero(r) and self.pow(r, k) == a:
                return r
        return None

    def kp_decompose(self, a):
        if self.is_zero(a):
            return []
        return [((), self.pth_root(a))]

    def kp_basis_element(self, tag):
        return self.one()

    def size(self):
        return self._size

    def elements(self):
        for tail in _tuples(list(self.base.elements()), self.degree):
            yield tuple(tail)

    def random(self, rng):
        return tuple(self.base.random(rng) for _ in range(self.degree))

    def format(self, a):
        parts = []
        for i, c in enumerate(a):
            if self.base.is_zero(c):
                continue
            cs = self.base.format(c)
            if i == 0:
                parts.append(cs)
            else:
                mono = self.gen_name if i == 1 else f"{self.gen_name}^{i}"
                parts.append(mono if cs == "1" else f"{cs}*{mono}")
        return " + ".join(parts) if parts else "0"


def _tuples(pool, n):
    if n == 0:
        yield ()
        return
    for rest in _tuples(pool, n - 1):
        for x in pool:
            yield rest + (x,)


@lru_cache(maxsize=None)
def _frac_field(p: int, names: tuple[str, ...]) -> FracField:
    return FracField(list(names), GF(p))


class RationalFunctionField(Field):
    """F_p(t_1, ..., t_m), elements as reduced fractions with monic denominator.

    sympy's sparse field keeps fractions reduced (gcd cancelled) and the
    denominator normalised, which gives canonical equality testing.  The
    generators are simultaneously an absolute p-basis, so d/dt_l derivations
    live here.
    """

    kind = "ratfunc"

    def __init__(self, p: int, names):
        if not is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        names = tuple(names)
        if len(set(names)) != len(names) or not names:
            raise FieldError(f"bad transcendental names {names!r}")
        self.p = p
        self.names = names
        self._field = _frac_field(p, names)
        self._ring = self._field.ring

    def __repr__(self):
        return f"GF({self.p})({', '.join(self.names)})"

    def __eq__(self, other):
        return (
            isinstance(other, RationalFunctionField)
            and other.p == self.p
            and other.names == self.names
        )

    def __hash__(self):
        return hash(("ratfunc", self.p, self.names))

    def extended(self, extra_names) -> "RationalFunctionField":
        return RationalFunctionField(self.p, self.names + tuple(extra_names))

    def gen_element(self, name: str):
        return self._field.gens[self.names.index(name)]

    def cast(self, a, target: "RationalFunctionField"):
        """Re-express ``a`` in a field with more transcendentals."""
        idx = [target.names.index(nm) for nm in self.names]

        def lift(poly):
            out = target._ring.zero
            for mono, c in poly.terms():
                exps = [0] * len(target.names)
                for i, e in zip(idx, mono):
                    exps[i] = e
                out += target._ring.from_terms([(tuple(exps), target._ring.domain(int(c)))])
            return out

        return target._field.new(lift(a.numer), lift(a.denom))

    def zero(self):
        return self._field.zero

    def one(self):
        return self._field.one

    def from_int(self, n):
        return self._field.one * n

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a

    def pow(self, a, n):
        return a**n

    def is_zero(self, a):
        return not a

    # p-th powers: every exponent must be divisible by p; coefficients are
    # in F_p where Frobenius is the identity.
    def _poly_kp_split(self, poly):
        """Split a PolyElement as  sum_gamma  t^gamma * (R_gamma)**p."""
        comps: dict[tuple[int, ...], object] = {}
        for mono, c in poly.terms():
            gamma = tuple(e % self.p for e in mono)
            root_mono = tuple(e // self.p for e in mono)
            term = self._ring.from_terms([(root_mono, c)])
            comps[gamma] = comps.get(gamma, self._ring.zero) + term
        return {g: q for g, q in comps.items() if q}

    def kp_decompose(self, a):
        if not a:
            return []
        num = a.numer * a.denom ** (self.p - 1)
        den = a.denom
        out = []
        for gamma, root in sorted(self._poly_kp_split(num).items()):
            out.append((gamma, self._field.new(root, den)))
        return out

    def kp_basis_element(self, tag):
        mono = self._ring.from_terms([(tuple(tag), self._ring.domain.one)])
        return self._field.new(mono, self._ring.one)

    def pth_root(self, a):
        comps = self.kp_decompose(a)
        if not comps:
            return self.zero()
        if len(comps) == 1 and comps[0][0] == (0,) * len(self.names):
            return comps[0][1]
        return None

    def _poly_kth_root(self, poly, k):
        """Greedy k-th root of a PolyElement (k coprime to p), or None."""
        if not poly:
            return self._ring.zero
        terms = sorted(poly.terms(), key=lambda t: (sum(t[0]), t[0]), reverse=True)
        lead_mono, lead_c = terms[0]
        if any(e % k for e in lead_mono):
            return None
        rc = PrimeField(self.p).kth_root(int(lead_c) % self.p, k)
        if rc is None:
            return None
        root = self._ring.from_terms([(tuple(e // k for e in lead_mono), self._ring.domain(rc))])
        lead_pow = root ** (k - 1)
        for _ in range(len(poly) * k + 10):
            resid = poly - root**k
            if not resid:
                return root
            rt = sorted(resid.terms(), key=lambda t: (sum(t[0]), t[0]), reverse=True)[0]
            # next term = lead(resid) / (k * root_lead^(k-1))
            lt = self._ring.from_terms([rt])
            den_terms = sorted(lead_pow.terms(), key=lambda t: (sum(t[0]), t[0]), reverse=True)
            dm, dc = den_terms[0]
            mono = tuple(a - b for a, b in zip(rt[0], dm))
            if any(e < 0 for e in mono):
                return None
            c = self._ring.domain(int(rt[1]) * pow(int(dc) * k % self.p, self.p - 2, self.p))
            root += self._ring.from_terms([(mono, c)])
            del lt
        return None

    def kth_root(self, a, k):
        if not a:
            return self.zero()
        num = self._poly_kth_root(a.numer * a.denom ** (k - 1), k)
        if num is None:
            return None
        r = self._field.new(num, a.denom)
        return r if r**k == a else None

    def random(self, rng, max_deg: int = 2):
        # random small polynomial (denominator 1 mostly; occasionally a fraction)
        def rand_poly():
            out = self._ring.zero
            for _ in range(rng.randrange(1, 3)):
                mono = tuple(rng.randrange(0, max_deg + 1) for _ in self.names)
                out += self._ring.from_terms([(mono, self._ring.domain(rng.randrange(self.p)))])
            return out

        num = rand_poly()
        if rng.random() < 0.2:
            den = rand_poly()
            if den:
                return self._field.new(num, den) if num else self.zero()
        return self._field.new(num, self._ring.one)

    def transcendentals(self):
        return self.names

    def diff_const(self, a, name):
        return a.diff(self._field.gens[self.names.index(name)])

    def _poly_format(self, poly):
        if not poly:
            return "0"
        parts = []
        for mono, c in sorted(poly.terms(), key=lambda t: (sum(t[0]), t[0]), reverse=True):
            ci = int(c) % self.p
            factors = []
            for nm, e in zip(self.names, mono):
                if e == 1:
                    factors.append(nm)
                elif e > 1:
                    factors.append(f"{nm}^{e}")
            if not factors:
                parts.append(str(ci))
            elif ci == 1:
                parts.append("*".join(factors))
            else:
                parts.append(f"{ci}*" + "*".join(factors))
        return " + ".join(parts)

    def format(self, a):
        num = self._poly_format(a.numer)
        if a.denom == self._ring.one:
            return num
        den = self._poly_format(a.denom)
        if " + " in num:
            num = f"({num})"
        if " + " in den or "*" in den or "^" in den:
            den = f"({den})"
        return f"{num}/{den}"


def extend_field(base: Field, modulus_ints, gen_name: str = "g") -> ExtensionField:
    """Adjoin a root of a monic irreducible given by integer coefficients.

    The modulus lists coefficients of degree 0..d-1 as integers (mapped into
    the base field); the leading coefficient 1 is implicit.
    """
    mod = tuple(base.from_int(c) for c in modulus_ints)
    return ExtensionField(base, mod, gen_name=gen_name)
