"""Exact rational polyhedral cones.

Cones are stored by generators (rays plus lineality) and carry a lazily
computed facet description.  All arithmetic is over ``Fraction``; the small
dense linear algebra goes through sympy's ``DomainMatrix`` over QQ.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

Vec = tuple[Fraction, ...]


def _frac_vec(v: Iterable) -> Vec:
    return tuple(Fraction(x) for x in v)


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    v = _frac_vec(v)
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _dm(rows: Sequence[Sequence], ncols: int) -> DomainMatrix:
    data = [[QQ(Fraction(x).numerator, Fraction(x).denominator) for x in row] for row in rows]
    return DomainMatrix(data, (len(rows), ncols), QQ)


def rank(rows: Sequence[Sequence], ncols: int) -> int:
    if not rows:
        return 0
    return _dm(rows, ncols).rank()


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vec]:
    """Basis of ``{x : row . x = 0 for every row}``."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    ns = _dm(rows, ncols).nullspace()
    out = []
    for row in ns.to_Matrix().tolist():
        out.append(tuple(Fraction(int(x.p), int(x.q)) for x in row))
    return out


def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int) -> Vec | None:
    """One solution of ``A x = b`` or ``None``."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    ns = nullspace(aug, ncols + 1)
    for v in ns:
        if v[-1] != 0:
            return tuple(-x / v[-1] for x in v[:-1])
    # the combination of null vectors may be needed when no single basis vector works
    if ns:
        for i in range(len(ns)):
            for j in range(i + 1, len(ns)):
                w = tuple(a + b for a, b in zip(ns[i], ns[j]))
                if w[-1] != 0:
                    return tuple(-x / w[-1] for x in w[:-1])
    return None


class Cone:
    """Polyhedral cone ``cone(rays) + span(lineality)`` in ``Q^ambient``.

    Parameters
    ----------
    rays, lineality : iterables of rational vectors
    ambient : dimension of the ambient space (needed when there are no generators)
    """

    def __init__(self, rays: Iterable[Sequence] = (), lineality: Iterable[Sequence] = (), ambient: int | None = None):
        rays = [primitive(r) for r in rays if any(Fraction(x) != 0 for x in r)]
        lin = [primitive(r) for r in lineality if any(Fraction(x) != 0 for x in r)]
        if ambient is None:
            gens = rays + lin
            if not gens:
                raise ValueError("ambient dimension needed for the zero cone")
            ambient = len(gens[0])
        for g in rays + lin:
            if len(g) != ambient:
                raise ValueError("generator has the wrong length")
        # canonical lineality basis and a deduplicated ray list
        if lin:
            lin_rows = [tuple(x) for x in _dm(lin, ambient).rref()[0].to_Matrix().tolist() if any(x)]
            lin = [primitive([Fraction(int(x.p), int(x.q)) for x in row]) for row in lin_rows]
        seen = []
        for r in rays:
            if r not in seen and tuple(-x for x in r) not in seen:
                seen.append(r)
            elif tuple(-x for x in r) in seen:
                # opposite rays generate a line
                seen.remove(tuple(-x for x in r))
                lin.append(r)
        self.rays: tuple[tuple[int, ...], ...] = tuple(sorted(seen))
        self.lineality: tuple[tuple[int, ...], ...] = tuple(lin)
        self.ambient = ambient

    # facet description
    @cached_property
    def _hrep(self) -> tuple[list[Vec], list[Vec]]:
        n = self.ambient
        gens = list(self.rays) + list(self.lineality)
        equations = nullspace(gens, n) if gens else [
            tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)
        ]
        s = rank(gens, n)
        lin_dim = rank(list(self.lineality), n)
        k = s - lin_dim - 1
        ineqs: list[Vec] = []
        if s > lin_dim:
            rays = list(self.rays)
            for subset in combinations(rays, k):
                cons = list(self.lineality) + list(subset) + list(equations)
                ns = nullspace(cons, n)
                if len(ns) != 1:
                    continue
                phi = ns[0]
                vals = [dot(phi, r) for r in rays]
                if all(v >= 0 for v in vals):
                    pass
                elif all(v <= 0 for v in vals):
                    phi = tuple(-x for x in phi)
                else:
                    continue
                p = _frac_vec(primitive(phi))
                if p not in ineqs:
                    ineqs.append(p)
            # drop redundant inequalities (those vanishing on every ray)
            ineqs = [p for p in ineqs if any(dot(p, r) != 0 for r in rays)]
        return [_frac_vec(primitive(e)) for e in equations], ineqs

    @property
    def equations(self) -> list[Vec]:
        return self._hrep[0]

    @property
    def inequalities(self) -> list[Vec]:
        return self._hrep[1]

    @cached_property
    def dim(self) -> int:
        return rank(list(self.rays) + list(self.lineality), self.ambient)

    def contains(self, x: Sequence) -> bool:
        eqs, ineqs = self._hrep
        return all(dot(e, x) == 0 for e in eqs) and all(dot(p, x) >= 0 for p in ineqs)

    def in_relative_interior(self, x: Sequence) -> bool:
        eqs, ineqs = self._hrep
        return all(dot(e, x) == 0 for e in eqs) and all(dot(p, x) > 0 for p in ineqs)

    def interior_point(self, weights: Sequence[int] | None = None) -> Vec:
        """A point of the relative interior: weighted sum of the rays."""
        n = self.ambient
        pt = [Fraction(0)] * n
        rays = self.rays
        weights = list(weights) if weights is not None else [1] * len(rays)
        for w, r in zip(weights, rays):
            for i in range(n):
                pt[i] += w * r[i]
        return tuple(pt)

    # constructions
    @classmethod
    def from_hrep(cls, equations: Sequence[Sequence], inequalities: Sequence[Sequence], ambient: int) -> "Cone":
        """Generators of ``{x : e.x = 0, p.x >= 0}``."""
        n = ambient
        basis = nullspace(list(equations), n)
        p = len(basis)
        if p == 0:
            return cls((), (), n)
        # coordinates y in the subspace: x = sum y_i basis_i
        def lift(y):
            return tuple(sum(y[i] * basis[i][j] for i in range(p)) for j in range(n))

        g_rows = [tuple(dot(q, b) for b in basis) for q in inequalities]
        g_rows = [r for r in g_rows if any(x != 0 for x in r)]
        lin_y = nullspace(g_rows, p) if g_rows else nullspace([], p)
        lin_dim = len(lin_y)
        rays_y: list[Vec] = []
        k = p - lin_dim - 1
        if k >= 0 and g_rows:
            for subset in combinations(range(len(g_rows)), k):
                cons = [g_rows[i] for i in subset] + list(lin_y)
                ns = nullspace(cons, p)
                if len(ns) != 1:
                    continue
                y = ns[0]
                vals = [dot(r, y) for r in g_rows]
                if all(v >= 0 for v in vals):
                    pass
                elif all(v <= 0 for v in vals):
                    y = tuple(-x for x in y)
                else:
                    continue
                y = _frac_vec(primitive(y))
                if y not in rays_y:
                    rays_y.append(y)
        return cls([lift(y) for y in rays_y], [lift(y) for y in lin_y], n)

    def intersect(self, other: "Cone") -> "Cone":
        if other.ambient != self.ambient:
            raise ValueError("ambient mismatch")
        return Cone.from_hrep(
            self.equations + other.equations,
            self.inequalities + other.inequalities,
            self.ambient,
        )

    def preimage(self, matrix: Sequence[Sequence]) -> "Cone":
        """``{y : matrix @ y in self}`` where ``matrix`` is ambient x p."""
        p = len(matrix[0])
        cols = [[Fraction(matrix[i][j]) for i in range(len(matrix))] for j in range(p)]
        def pull(phi):
            return tuple(dot(phi, c) for c in cols)
        return Cone.from_hrep(
            [pull(e) for e in self.equations],
            [pull(q) for q in self.inequalities],
            p,
        )

    def image(self, matrix: Sequence[Sequence]) -> "Cone":
        """``matrix @ self`` where ``matrix`` is m x ambient."""
        def push(v):
            return tuple(dot(row, v) for row in matrix)
        return Cone([push(r) for r in self.rays], [push(l) for l in self.lineality], len(matrix))

    def negate(self) -> "Cone":
        return Cone([tuple(-x for x in r) for r in self.rays], self.lineality, self.ambient)

    def product(self, other: "Cone") -> "Cone":
        """Cartesian product in the direct sum of the ambient spaces."""
        za, zb = (0,) * self.ambient, (0,) * other.ambient
        return Cone(
            [tuple(r) + zb for r in self.rays] + [za + tuple(r) for r in other.rays],
            [tuple(l) + zb for l in self.lineality] + [za + tuple(l) for l in other.lineality],
            self.ambient + other.ambient,
        )

    def contains_cone(self, other: "Cone") -> bool:
        neg = lambda v: tuple(-x for x in v)  # noqa: E731
        return all(self.contains(r) for r in other.rays) and all(
            self.contains(l) and self.contains(neg(l)) for l in other.lineality
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cone):
            return NotImplemented
        return other.ambient == self.ambient and self.contains_cone(other) and other.contains_cone(self)

    def __hash__(self) -> int:
        return hash((self.ambient, self.dim))

    def to_json(self) -> dict:
        return {"rays": [list(r) for r in self.rays], "lineality": [list(l) for l in self.lineality]}

    def __repr__(self) -> str:
        return f"Cone(rays={list(self.rays)}, lineality={list(self.lineality)})"
