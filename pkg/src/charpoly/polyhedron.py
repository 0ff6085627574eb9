"""Rational Newton/characteristic polyhedra with nonnegative-orthant recession.

All geometry is exact: points are tuples of ``fractions.Fraction`` and vertex
detection runs a small rational-pivot simplex.  A point q of a generating set
is a vertex iff it does not lie in conv(remaining points) + R^n_{>=0}.
"""

from __future__ import annotations

from fractions import Fraction


def simplex_feasible(A, b) -> bool:
    """Exact phase-1 simplex: is {x >= 0 : Ax = b} nonempty?  Needs b >= 0."""
    m, n = len(A), len(A[0]) if A else 0
    rows = [[Fraction(x) for x in row] + [Fraction(0)] * m + [Fraction(bi)] for row, bi in zip(A, b)]
    for i in range(m):
        rows[i][n + i] = Fraction(1)
    # reduced-cost row for  min sum(artificials)
    z = [Fraction(0)] * (n + m + 1)
    for i in range(m):
        for j in range(n + m + 1):
            z[j] -= rows[i][j]
    for i in range(m):
        z[n + i] = Fraction(0)
    basis = list(range(n, n + m))
    while True:
        enter = next((j for j in range(n + m) if z[j] < 0), None)
        if enter is None:
            break
        # Bland's rule: smallest ratio, ties by smallest basis variable
        leave, best = None, None
        for i in range(m):
            if rows[i][enter] > 0:
                ratio = rows[i][-1] / rows[i][enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            break  # unbounded direction; cannot happen for our bounded systems
        piv = rows[leave][enter]
        rows[leave] = [x / piv for x in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter]:
                f = rows[i][enter]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[leave])]
        if z[enter]:
            f = z[enter]
            z = [x - f * y for x, y in zip(z, rows[leave])]
        basis[leave] = enter
    return -z[-1] == 0


def _in_hull_plus_orthant(point, gens) -> bool:
    """point in conv(gens) + R^n_{>=0}?  (gens nonempty)"""
    n = len(point)
    # lambda_k >= 0, slack_i >= 0:  sum lambda = 1,  sum lambda*q + slack = point
    A = []
    for i in range(n):
        A.append([Fraction(q[i]) for q in gens] + [Fraction(1 if j == i else 0) for j in range(n)])
    A.append([Fraction(1)] * len(gens) + [Fraction(0)] * n)
    b = [Fraction(x) for x in point] + [Fraction(1)]
    return simplex_feasible(A, b)


class NewtonPolyhedron:
    """conv(points) + R^n_{>=0}, queried through its generating points."""

    __slots__ = ("dim", "points", "vertices")

    def __init__(self, dim: int, points):
        self.dim = dim
        pts = sorted({tuple(Fraction(x) for x in p) for p in points})
        for p in pts:
            if len(p) != dim or any(x < 0 for x in p):
                raise ValueError(f"bad point {p}")
        self.points = tuple(pts)
        self.vertices = tuple(
            p for p in pts if not _in_hull_plus_orthant(p, [q for q in pts if q != p])
        )

    def __eq__(self, other):
        return (
            isinstance(other, NewtonPolyhedron)
            and other.dim == self.dim
            and other.vertices == self.vertices
        )

    def __hash__(self):
        return hash((self.dim, self.vertices))

    def __repr__(self):
        return f"NewtonPolyhedron({self.dim}, vertices={[tuple(map(str, v)) for v in self.vertices]})"

    def is_empty(self):
        return not self.points

    def contains(self, point) -> bool:
        if self.is_empty():
            return False
        return _in_hull_plus_orthant(point, list(self.vertices))

    def delta(self) -> Fraction:
        """min |x|_1 over the polyhedron (None when empty)."""
        if self.is_empty():
            return None
        return min(sum(p) for p in self.vertices)

    def min_coord(self, j: int) -> Fraction:
        if self.is_empty():
            return None
        return min(p[j] for p in self.vertices)

    def weighted_min(self, alpha) -> Fraction:
        if self.is_empty():
            return None
        return min(sum(a * x for a, x in zip(alpha, p)) for p in self.points)

    def face_points(self, alpha):
        """Generating points on the compact face defined by alpha > 0."""
        d = self.weighted_min(alpha)
        return [p for p in self.points if sum(a * x for a, x in zip(alpha, p)) == d]

    def face_vertices(self, alpha):
        d = self.weighted_min(alpha)
        return [p for p in self.vertices if sum(a * x for a, x in zip(alpha, p)) == d]

    def project(self, J) -> "NewtonPolyhedron":
        """Coordinate projection onto the (sorted) index set J."""
        J = sorted(J)
        return NewtonPolyhedron(len(J), [tuple(p[j] for j in J) for p in self.points])

    def chart_image(self, J, j0: int) -> "NewtonPolyhedron":
        """The blow-up origin-chart map: x_{j0} := sum_{j in J} x_j - 1."""
        out = []
        for p in self.points:
            q = list(p)
            q[j0] = sum(p[j] for j in J) - 1
            if q[j0] < 0:
                raise ValueError("chart map needs delta(center) >= 1")
            out.append(tuple(q))
        return NewtonPolyhedron(self.dim, out)

    def translate(self, vec) -> "NewtonPolyhedron":
        return NewtonPolyhedron(
            self.dim, [tuple(x + v for x, v in zip(p, vec)) for p in self.points]
        )


def vertex_normal(polygon_vertices, v):
    """A strictly positive rational normal supporting a 2-D polygon at v only.

    ``polygon_vertices`` generate conv(...) + R^2_{>=0}; the vertex list is
    sorted by abscissa (so ordinates decrease).  The returned weight is the
    sum of the two adjacent edge normals (vertical/horizontal rays count as
    normals (1,0) and (0,1)).
    """
    vs = sorted(polygon_vertices)
    i = vs.index(tuple(v))
    left = (Fraction(1), Fraction(0))
    if i > 0:
        a, b = vs[i - 1], vs[i]
        left = (a[1] - b[1], b[0] - a[0])
    right = (Fraction(0), Fraction(1))
    if i + 1 < len(vs):
        a, b = vs[i], vs[i + 1]
        right = (a[1] - b[1], b[0] - a[0])

    def norm(t):
        s = t[0] + t[1]
        return (t[0] / s, t[1] / s)

    left, right = norm(left), norm(right)
    n = (left[0] + right[0], left[1] + right[1])
    return n
