"""Seeds, mutation with principal coefficients, chambers and the mutation tree.

Coordinates
-----------
N has basis ``e_1..e_r``.  Points of M (and of M°) are written in the basis
``f_i = e_i^* / d_i``, so the pairing is ``<n, m> = sum_i n_i m_i / d_i`` and
``{n, .}`` has f-coordinates ``n @ eps`` where ``eps_ij = skew_ij * d_j``.
Principal-coefficient exponents ``(m, n)`` are tuples of length ``2r``.

c-vectors (columns of ``c_matrix``) live in N and are the wall normals of a
cluster chamber; g-vectors (columns of ``g_matrix``) live in M and span it.
They are dual: ``<c_k, g_j> = delta_kj / d_k``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import combinations
from math import gcd
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from sympy import Matrix as SMatrix

from .cones import Cone, primitive

Matrix = tuple[tuple[int, ...], ...]


def _matrix(rows: Iterable[Iterable[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def _identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _pos(x: int) -> int:
    return x if x > 0 else 0


def mutate_matrix(eps: Matrix, k: int) -> Matrix:
    """Standard exchange-matrix mutation in direction ``k`` (0-based)."""
    n = len(eps)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == k or j == k:
                row.append(-eps[i][j])
            else:
                row.append(eps[i][j] + _pos(eps[i][k]) * _pos(eps[k][j]) - _pos(-eps[i][k]) * _pos(-eps[k][j]))
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True)
class Seed:
    """Skew form, multipliers and frozen set on a lattice N with basis e_i.

    Examples
    --------
    >>> s = Seed.from_exchange([[0, 1], [-1, 0]])
    >>> s.exchange_matrix
    ((0, 1), (-1, 0))
    """

    skew: Matrix
    d: tuple[int, ...]
    frozen: frozenset[int] = frozenset()
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        skew = _matrix(self.skew)
        object.__setattr__(self, "skew", skew)
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        object.__setattr__(self, "frozen", frozenset(int(x) for x in self.frozen))
        r = len(skew)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i + 1) for i in range(r)))
        else:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        if any(len(row) != r for row in skew):
            raise ValueError("skew form must be square")
        if len(self.d) != r or len(self.labels) != r:
            raise ValueError("d and labels must have one entry per basis vector")
        for i in range(r):
            for j in range(r):
                if skew[i][j] != -skew[j][i]:
                    raise ValueError(f"skew form is not antisymmetric at ({i}, {j})")
        if any(x < 1 for x in self.d):
            raise ValueError("multipliers d_i must be positive")
        if any(not 0 <= k < r for k in self.frozen):
            raise ValueError("frozen index out of range")

    @classmethod
    def from_exchange(cls, eps: Sequence[Sequence[int]], d: Sequence[int] | None = None, **kw) -> "Seed":
        """Build a seed from ``eps`` and ``d`` (skew = eps_ij / d_j)."""
        r = len(eps)
        d = tuple(d) if d is not None else (1,) * r
        skew = []
        for i in range(r):
            row = []
            for j in range(r):
                q = Fraction(eps[i][j], d[j])
                if q.denominator != 1:
                    raise ValueError("exchange matrix is not divisible by the multipliers")
                row.append(int(q))
            skew.append(row)
        return cls(_matrix(skew), d, **kw)

    @property
    def rank(self) -> int:
        return len(self.skew)

    @property
    def exchange_matrix(self) -> Matrix:
        r = self.rank
        return tuple(tuple(self.skew[i][j] * self.d[j] for j in range(r)) for i in range(r))

    @property
    def unfrozen(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.rank) if i not in self.frozen)

    def skew_pair(self, a: Sequence[int], b: Sequence[int]) -> int:
        if len(a) != self.rank or len(b) != self.rank:
            raise ValueError("dimension mismatch in skew_pair")
        return sum(a[i] * b[j] * self.skew[i][j] for i in range(self.rank) for j in range(self.rank) if a[i] and b[j])

    def pairing(self, n: Sequence[int], m: Sequence) -> Fraction:
        """``<n, m>`` for n in N and m in f-coordinates."""
        if len(n) != self.rank or len(m) != self.rank:
            raise ValueError("dimension mismatch in pairing")
        return sum((Fraction(n[i]) * Fraction(m[i]) / self.d[i] for i in range(self.rank)), Fraction(0))

    def p_star(self, n: Sequence[int]) -> tuple[int, ...]:
        """f-coordinates of ``{n, .}``."""
        eps = self.exchange_matrix
        r = self.rank
        return tuple(sum(n[i] * eps[i][j] for i in range(r)) for j in range(r))

    def mutate(self, k: int) -> "Seed":
        self._check_direction(k)
        eps = mutate_matrix(self.exchange_matrix, k)
        return Seed.from_exchange(eps, self.d, frozen=self.frozen, labels=self.labels)

    def opposite(self) -> "Seed":
        return Seed(tuple(tuple(-x for x in row) for row in self.skew), self.d, self.frozen, self.labels)

    def _check_direction(self, k: int) -> None:
        if not 0 <= k < self.rank:
            raise IndexError(f"mutation direction {k} out of range")
        if k in self.frozen:
            raise ValueError(f"cannot mutate at frozen index {k}")

    # serialization
    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "skew": [list(r) for r in self.skew],
            "d": list(self.d),
            "frozen": sorted(self.frozen),
            "labels": list(self.labels),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Seed":
        try:
            skew = data["skew"]
            r = int(data.get("rank", len(skew)))
            if r != len(skew):
                raise ValueError("rank does not match the skew matrix")
            return cls(
                _matrix(skew),
                tuple(data.get("d", [1] * r)),
                frozenset(data.get("frozen", [])),
                tuple(data.get("labels", [])),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed seed data: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "Seed":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


FIXTURE_NAMES = ("s_S24", "s_markov_folded", "s_A3", "s_B2", "s_A2", "s_kronecker2")


def fixture_seed(name: str) -> Seed:
    """Load one of the shipped seed fixtures by name."""
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")
    text = resources.files("clusterfold.data").joinpath(f"{name}.json").read_text()
    return Seed.from_json(json.loads(text))


def skew_pair(s: Seed, a: Sequence[int], b: Sequence[int]) -> int:
    return s.skew_pair(a, b)


@dataclass(frozen=True)
class PrincipalSeed:
    """A seed reached from ``root`` by ``path``, with its c- and g-matrices.

    Matrices are stored column-wise: ``c_matrix[i][k]`` is coordinate i of the
    c-vector of index k (same for g).
    """

    root: Seed
    seed: Seed
    c_matrix: Matrix
    g_matrix: Matrix
    path: tuple[int, ...] = ()

    @classmethod
    def initial(cls, s: Seed) -> "PrincipalSeed":
        return cls(s, s, _identity(s.rank), _identity(s.rank), ())

    @property
    def rank(self) -> int:
        return self.seed.rank

    def c_vector(self, k: int) -> tuple[int, ...]:
        return tuple(row[k] for row in self.c_matrix)

    def g_vector(self, k: int) -> tuple[int, ...]:
        return tuple(row[k] for row in self.g_matrix)

    def tropical_sign(self, k: int) -> int:
        c = self.c_vector(k)
        if all(x >= 0 for x in c):
            return 1
        if all(x <= 0 for x in c):
            return -1
        raise ValueError(f"c-vector {c} is not sign-coherent")

    def is_green(self, k: int) -> bool:
        return all(x >= 0 for x in self.c_vector(k))

    def mutate(self, k: int) -> "PrincipalSeed":
        return mutate_seed(self, k)

    def mutate_path(self, seq: Iterable[int]) -> "PrincipalSeed":
        ps = self
        for k in seq:
            ps = mutate_seed(ps, k)
        return ps

    def key(self) -> tuple:
        """Canonical vertex key: exchange matrix plus c-matrix."""
        return (self.seed.exchange_matrix, self.c_matrix)

    def cluster_key(self) -> frozenset:
        """Unordered set of g-vectors; identifies the chamber."""
        return frozenset(self.g_vector(k) for k in range(self.rank))


def mutate_seed(ps: PrincipalSeed, k: int) -> PrincipalSeed:
    """Mutate exchange matrix, c-matrix and g-matrix in direction ``k``."""
    ps.seed._check_direction(k)
    r = ps.rank
    eps = ps.seed.exchange_matrix
    sgn = ps.tropical_sign(k)
    ck = ps.c_vector(k)
    gk = ps.g_vector(k)
    c_cols = []
    for j in range(r):
        cj = ps.c_vector(j)
        if j == k:
            c_cols.append(tuple(-x for x in ck))
        else:
            a = _pos(sgn * eps[j][k])
            c_cols.append(tuple(cj[i] + a * ck[i] for i in range(r)))
    new_gk = [-x for x in gk]
    for j in range(r):
        b = _pos(-sgn * eps[k][j])
        if b and j != k:
            gj = ps.g_vector(j)
            for i in range(r):
                new_gk[i] += b * gj[i]
    g_cols = [tuple(new_gk) if j == k else ps.g_vector(j) for j in range(r)]
    c_mat = tuple(tuple(c_cols[j][i] for j in range(r)) for i in range(r))
    g_mat = tuple(tuple(g_cols[j][i] for j in range(r)) for i in range(r))
    return PrincipalSeed(ps.root, ps.seed.mutate(k), c_mat, g_mat, ps.path + (k,))


def green_sequence_walls(s: Seed, seq: Sequence[int], one_based: bool = True) -> list[tuple[int, tuple[int, ...], int]]:
    """Walk ``seq`` and return ``(index, c-vector, sign)`` of each crossed wall.

    The sign is the tropical sign of the mutated vertex before mutation
    (+1 green, -1 red).
    """
    ps = PrincipalSeed.initial(s)
    out = []
    for k in seq:
        k0 = k - 1 if one_based else k
        if not 0 <= k0 < s.rank:
            raise IndexError(f"invalid mutation index {k}")
        out.append((k0, ps.c_vector(k0), ps.tropical_sign(k0)))
        ps = ps.mutate(k0)
    return out


def is_maximal_green_sequence(s: Seed, seq: Sequence[int], one_based: bool = True) -> bool:
    """True iff every step mutates a green vertex and all final c-vectors are <= 0.

    Indices are 1-based by default.  Invalid indices give ``False``.
    """
    ps = PrincipalSeed.initial(s)
    try:
        for k in seq:
            k0 = k - 1 if one_based else k
            if not 0 <= k0 < s.rank or k0 in s.frozen:
                return False
            if not ps.is_green(k0):
                return False
            ps = ps.mutate(k0)
    except ValueError:
        return False
    return all(x <= 0 for row in ps.c_matrix for x in row)


def final_principal_seed(s: Seed, seq: Sequence[int], one_based: bool = True) -> PrincipalSeed:
    ps = PrincipalSeed.initial(s)
    for k in seq:
        ps = ps.mutate(k - 1 if one_based else k)
    return ps


def chamber_cone(ps: PrincipalSeed, sign: str | int = "+", with_n: bool = True) -> Cone:
    """The cluster chamber ``C_v^+`` or ``C_v^-`` of the vertex ``ps``.

    ``C_v^+`` is spanned by the g-vectors.  ``C_v^-`` is the negative of the
    g-vector cone reached by the same mutation path from the opposite seed.
    With ``with_n`` the cone lives in M°_R ⊕ N_R with N_R as lineality.
    """
    sgn = _sign(sign)
    r = ps.rank
    if sgn > 0:
        rays = [ps.g_vector(k) for k in range(r)]
    else:
        opp = PrincipalSeed.initial(ps.root.opposite()).mutate_path(ps.path)
        rays = [tuple(-x for x in opp.g_vector(k)) for k in range(r)]
    if not with_n:
        return Cone(rays, (), r)
    zero = (0,) * r
    lin = [zero + tuple(int(i == j) for j in range(r)) for i in range(r)]
    return Cone([tuple(g) + zero for g in rays], lin, 2 * r)


def _sign(sign: str | int) -> int:
    if sign in ("+", 1, "plus"):
        return 1
    if sign in ("-", -1, "minus"):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


@dataclass(frozen=True)
class LatticeDescription:
    """Lattice points of a rational cone, described by primitive generators.

    ``unimodular`` records whether the primitive ray generators (together with
    the lineality basis) already generate the monoid of lattice points.
    """

    cone: Cone
    rays: tuple[tuple[int, ...], ...]
    lineality: tuple[tuple[int, ...], ...]
    unimodular: bool

    def is_only_lineality(self) -> bool:
        return not self.rays


def chamber_lattice_intersection(c1: Cone, c2: Cone) -> LatticeDescription:
    """Lattice points of ``c1 ∩ c2`` as primitive generators."""
    inter = c1.intersect(c2)
    rays = tuple(primitive(r) for r in inter.rays)
    lin = tuple(primitive(l) for l in inter.lineality)
    gens = [list(x) for x in rays + lin]
    unimodular = True
    if gens:
        # unimodular iff the gcd of the maximal minors of the generators is 1
        m = SMatrix(gens)
        k = m.rank()
        if k == len(gens):
            g = 0
            for cols in combinations(range(m.cols), k):
                g = gcd(g, int(abs(m[:, list(cols)].det())))
            unimodular = g == 1
        else:
            unimodular = False
    return LatticeDescription(inter, rays, lin, unimodular)


def is_finite_type(s: Seed, limit: int = 100000) -> bool:
    """Finite type test by the 2-finiteness criterion.

    Searches the mutation class of the exchange matrix for an unfrozen pair
    with ``|b_ij b_ji| >= 4``.  Finite-type classes are finite, so the search
    ends; otherwise a violating matrix appears at finite distance.
    """
    unfrozen = s.unfrozen
    start = tuple(tuple(row) for row in s.exchange_matrix)
    seen = {start}
    queue = deque([start])
    while queue:
        b = queue.popleft()
        for i, j in combinations(unfrozen, 2):
            if abs(b[i][j] * b[j][i]) >= 4:
                return False
        for k in unfrozen:
            nb = tuple(tuple(row) for row in mutate_matrix(b, k))
            if nb not in seen:
                if len(seen) >= limit:
                    raise RuntimeError("mutation class search exceeded its limit")
                seen.add(nb)
                queue.append(nb)
    return True


@dataclass
class MutationTree:
    """Breadth-first mutation tree from ``root`` up to ``depth``.

    Vertices are memoized by :meth:`PrincipalSeed.key`; ``closed`` reports
    whether the exploration exhausted all distinct cluster chambers before
    reaching the depth bound (which happens exactly in finite type).
    """

    root: Seed
    depth: int
    vertices: dict[tuple, PrincipalSeed] = field(default_factory=dict)
    edges: list[tuple[tuple, int, tuple]] = field(default_factory=list)
    closed: bool = False

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        self._build()

    def _build(self) -> None:
        start = PrincipalSeed.initial(self.root)
        chambers = {start.cluster_key(): start}
        self.vertices = {start.key(): start}
        frontier = deque([(start, 0)])
        open_edges = False
        while frontier:
            ps, lvl = frontier.popleft()
            for k in self.root.unfrozen:
                if ps.path and ps.path[-1] == k:
                    continue
                if lvl >= self.depth:
                    nxt = ps.mutate(k)
                    if nxt.cluster_key() not in chambers:
                        open_edges = True
                    continue
                nxt = ps.mutate(k)
                self.edges.append((ps.key(), k, nxt.key()))
                ck = nxt.cluster_key()
                if ck in chambers:
                    continue
                chambers[ck] = nxt
                self.vertices[nxt.key()] = nxt
                frontier.append((nxt, lvl + 1))
        self.closed = not open_edges
        self._chambers = chambers

    def chambers(self) -> list[PrincipalSeed]:
        """One representative vertex per distinct chamber, in discovery order."""
        return list(self._chambers.values())

    def at_depth(self, level: int) -> list[PrincipalSeed]:
        return [ps for ps in self._chambers.values() if len(ps.path) == level]

    def __iter__(self) -> Iterator[PrincipalSeed]:
        return iter(self._chambers.values())

    def __len__(self) -> int:
        return len(self._chambers)

    def chamber(self, key: frozenset) -> PrincipalSeed | None:
        return self._chambers.get(key)

    def adjacency(self) -> dict[frozenset, list[tuple[int, frozenset]]]:
        """Mutation edges between chambers found in the tree."""
        adj: dict[frozenset, list[tuple[int, frozenset]]] = {}
        for key, ps in self._chambers.items():
            out = []
            for k in self.root.unfrozen:
                nk = ps.mutate(k).cluster_key()
                if nk in self._chambers:
                    out.append((k, nk))
            adj[key] = out
        return adj
