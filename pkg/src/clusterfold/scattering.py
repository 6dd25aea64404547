"""Walls, scattering diagrams, path-ordered products and rank-2 completion.

Group elements are never written as Lie series.  A wall acts through its
ring automorphism only:

* X-ring over N:  ``z^n -> z^n * f(z^{n0}) ** (sign * {n, n0})``
* A_prin ring over M°⊕N:
  ``z^(m,n) -> z^(m,n) * f(z^({n0,.}, n0)) ** (sign * <n0, m>)``

where ``f = 1 + c_1 t + c_2 t^2 + ...`` is the wall function and the crossing
sign is ``-sgn <n0, velocity>``.  With this convention, crossing ``e_k^⊥`` out
of the positive chamber multiplies ``z^(f_k, 0)`` by ``1 + z^({e_k,.}, e_k)``.

Truncation is relative: each input monomial keeps the terms whose added
N-degree is at most the order.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .cones import Cone, dot, nullspace, primitive
from .lattice_core import MutationTree, Seed, is_finite_type
from .poly import DivisionError, LaurentExpr, TruncatedSeries, series_mul, series_power, trim

X_RING = "X"
A_RING = "A"


class NonGenericError(ValueError):
    """A point or path meets a joint or a wall boundary."""


class NotFiniteTypeError(ValueError):
    """The mutation tree did not close within the depth bound."""


def degree(n: Sequence[int]) -> int:
    return sum(n)


def ring_weights(seed: Seed, ring: str) -> tuple[int, ...]:
    r = seed.rank
    if ring == X_RING:
        return (1,) * r
    if ring == A_RING:
        return (0,) * r + (1,) * r
    raise ValueError(f"unknown ring tag {ring!r}")


def nterms_for(order: int, n0: Sequence[int]) -> int:
    """Number of coefficients of a wall function needed at ``order``."""
    return order // degree(n0) + 1


def binomial_coeffs(d: int, nterms: int) -> tuple[int, ...]:
    """``(1 + t)^d`` truncated."""
    return trim(series_power((1, 1), d, nterms))


@dataclass(frozen=True)
class Wall:
    """A wall ``(support, f)`` with primitive normal ``n0`` in N⁺.

    ``coeffs`` lists the coefficients of ``f`` as a series in ``t = z^{n0}``.
    """

    n0: tuple[int, ...]
    support: Cone
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n0", tuple(int(x) for x in self.n0))
        object.__setattr__(self, "coeffs", trim(self.coeffs))
        if not self.coeffs or self.coeffs[0] != 1:
            raise ValueError("wall function must have constant term 1")
        if any(x < 0 for x in self.n0) or not any(self.n0):
            raise ValueError(f"wall normal {self.n0} is not in N+")
        if primitive(self.n0) != self.n0:
            raise ValueError(f"wall normal {self.n0} is not primitive")

    @property
    def is_trivial(self) -> bool:
        return self.coeffs == (1,)

    def func(self, order: int) -> TruncatedSeries:
        terms = {tuple(j * x for x in self.n0): c for j, c in enumerate(self.coeffs)}
        return TruncatedSeries(terms, order, (1,) * len(self.n0), len(self.n0))

    def validate(self, seed: Seed) -> None:
        if len(self.n0) != seed.rank or self.support.ambient != seed.rank:
            raise ValueError("wall does not match the seed rank")
        for g in list(self.support.rays) + list(self.support.lineality):
            if seed.pairing(self.n0, g) != 0:
                raise ValueError(f"support generator {g} is not in n0^perp")
        if self.support.dim != seed.rank - 1:
            raise ValueError("wall support must have codimension one")

    def truncated(self, order: int) -> "Wall":
        return Wall(self.n0, self.support, self.coeffs[: nterms_for(order, self.n0)])

    def to_json(self) -> dict:
        out = {"n0": list(self.n0)}
        out.update(self.support.to_json())
        out["func"] = LaurentExpr(
            {tuple(j * x for x in self.n0): c for j, c in enumerate(self.coeffs)}, len(self.n0)
        ).to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Wall":
        n0 = tuple(int(x) for x in data["n0"])
        r = len(n0)
        support = Cone(data.get("rays", []), data.get("lineality", []), r)
        coeffs = {}
        for item in data["func"]:
            exp = [int(x) for x in item["exp"]]
            j = degree(exp) // degree(n0)
            if tuple(j * x for x in n0) != tuple(exp):
                raise ValueError("wall function exponent is not a multiple of n0")
            coeffs[j] = int(item["coef"])
        top = max(coeffs) if coeffs else 0
        return cls(n0, support, tuple(coeffs.get(j, 0) for j in range(top + 1)))


def hyperplane_wall(seed: Seed, n0: Sequence[int], coeffs: Sequence[int]) -> Wall:
    """The wall on the whole hyperplane ``n0^⊥``."""
    r = seed.rank
    normal = [Fraction(n0[i], seed.d[i]) for i in range(r)]
    lin = nullspace([normal], r)
    return Wall(tuple(n0), Cone((), lin, r), tuple(coeffs))


def convex_union(a: Cone, b: Cone) -> Cone | None:
    """``a ∪ b`` as a cone when it is convex, else ``None``.

    The union is convex iff the hull ``H`` satisfies ``H ∩ {p <= 0} ⊆ b`` for
    every facet inequality ``p`` of ``a`` that is negative somewhere on ``H``.
    """
    if a.ambient != b.ambient or a.dim != b.dim:
        return None
    if b.contains_cone(a):
        return b
    if a.contains_cone(b):
        return a
    hull = Cone(list(a.rays) + list(b.rays), list(a.lineality) + list(b.lineality), a.ambient)
    if hull.dim != a.dim:
        return None
    for p in a.inequalities:
        if all(dot(p, g) >= 0 for g in hull.rays) and all(dot(p, l) == 0 for l in hull.lineality):
            continue
        piece = Cone.from_hrep(hull.equations, hull.inequalities + [tuple(-x for x in p)], a.ambient)
        if not b.contains_cone(piece):
            return None
    return hull


@dataclass
class ScatteringDiagram:
    """A finite list of walls at truncation ``order`` for ``seed``."""

    seed: Seed
    order: int
    walls: list[Wall] = field(default_factory=list)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be at least 1")
        self.walls = [w.truncated(self.order) for w in self.walls]

    @property
    def rank(self) -> int:
        return self.seed.rank

    def normals(self) -> list[tuple[int, ...]]:
        out = []
        for w in self.walls:
            if not w.is_trivial and w.n0 not in out:
                out.append(w.n0)
        return sorted(out)

    def nontrivial(self) -> list[Wall]:
        return [w for w in self.walls if not w.is_trivial]

    def walls_on(self, n0: Sequence[int]) -> list[Wall]:
        n0 = tuple(n0)
        return [w for w in self.walls if w.n0 == n0 and not w.is_trivial]

    def with_walls(self, walls: Iterable[Wall]) -> "ScatteringDiagram":
        return ScatteringDiagram(self.seed, self.order, list(walls))

    def canonical(self) -> "ScatteringDiagram":
        """Drop trivial walls, merge walls with equal normal and support, sort."""
        merged: list[Wall] = []
        for w in self.nontrivial():
            for i, v in enumerate(merged):
                if v.n0 == w.n0 and v.support == w.support:
                    nt = nterms_for(self.order, w.n0)
                    merged[i] = Wall(w.n0, w.support, series_mul(v.coeffs, w.coeffs, nt))
                    break
            else:
                merged.append(w)
        merged = [w for w in merged if not w.is_trivial]
        merged.sort(key=lambda w: (w.n0, json.dumps(w.support.to_json())))
        return self.with_walls(merged)

    def coarsen(self) -> "ScatteringDiagram":
        """Merge walls with equal normal and function whose union is convex.

        Undoes splitting of walls, e.g. the facets of a finite-type diagram
        that together form a whole hyperplane.
        """
        walls = list(self.nontrivial())
        changed = True
        while changed:
            changed = False
            for i in range(len(walls)):
                for j in range(i + 1, len(walls)):
                    a, b = walls[i], walls[j]
                    if a.n0 != b.n0 or a.coeffs != b.coeffs:
                        continue
                    u = convex_union(a.support, b.support)
                    if u is None:
                        continue
                    walls[i] = Wall(a.n0, u, a.coeffs)
                    del walls[j]
                    changed = True
                    break
                if changed:
                    break
        return self.with_walls(walls)

    def to_json(self) -> dict:
        canon = self.canonical()
        return {"order": self.order, "walls": [w.to_json() for w in canon.walls]}

    @classmethod
    def from_json(cls, seed: Seed, data: dict) -> "ScatteringDiagram":
        return cls(seed, int(data["order"]), [Wall.from_json(w) for w in data["walls"]])

    def __len__(self) -> int:
        return len(self.walls)


def initial_diagram(s: Seed, k: int = 8) -> ScatteringDiagram:
    """Walls ``(e_i^⊥, (1 + z^{e_i})^{d_i})`` for the unfrozen indices."""
    walls = []
    for i in s.unfrozen:
        e = tuple(int(j == i) for j in range(s.rank))
        walls.append(hyperplane_wall(s, e, binomial_coeffs(s.d[i], k + 1)))
    return ScatteringDiagram(s, k, walls)


# wall-crossing automorphisms


class WallAutomorphism:
    """Ring automorphism of crossing a wall with a given sign."""

    def __init__(self, seed: Seed, n0: Sequence[int], coeffs: Sequence[int], sign: int, ring: str = X_RING):
        if sign not in (1, -1):
            raise ValueError("crossing sign must be +1 or -1")
        if ring not in (X_RING, A_RING):
            raise ValueError(f"unknown ring tag {ring!r}")
        if not coeffs or coeffs[0] != 1:
            raise ValueError("wall function must have constant term 1")
        self.seed = seed
        self.n0 = tuple(n0)
        self.coeffs = tuple(coeffs)
        self.sign = sign
        self.ring = ring
        r = seed.rank
        self.dn0 = degree(self.n0)
        if ring == X_RING:
            self.step = self.n0
            self.nvars = r
        else:
            self.step = tuple(seed.p_star(self.n0)) + self.n0
            self.nvars = 2 * r
        self.weights = ring_weights(seed, ring)
        self._pow_cache: dict[tuple[Fraction, int], list[int]] = {}

    def inverse(self) -> "WallAutomorphism":
        return WallAutomorphism(self.seed, self.n0, self.coeffs, -self.sign, self.ring)

    def exponent(self, exp: Sequence[int]) -> Fraction:
        r = self.seed.rank
        if self.ring == X_RING:
            return Fraction(self.sign * self.seed.skew_pair(exp, self.n0))
        return self.sign * self.seed.pairing(self.n0, exp[:r])

    def _power(self, e: Fraction, nterms: int) -> list[int]:
        key = (e, nterms)
        got = self._pow_cache.get(key)
        if got is None:
            got = series_power(self.coeffs, e, nterms)
            self._pow_cache[key] = got
        return got

    def act(self, terms: dict, limit: int) -> dict:
        """Apply to a dict of terms, dropping anything of degree above ``limit``."""
        out: dict = {}
        w = self.weights
        step = self.step
        for exp, c in terms.items():
            deg = sum(a * b for a, b in zip(w, exp))
            room = limit - deg
            if room < 0:
                continue
            e = self.exponent(exp)
            if e == 0:
                out[exp] = out.get(exp, 0) + c
                continue
            ser = self._power(e, room // self.dn0 + 1)
            for j, a in enumerate(ser):
                if a:
                    ne = tuple(x + j * s for x, s in zip(exp, step)) if j else exp
                    out[ne] = out.get(ne, 0) + c * a
        return {e: c for e, c in out.items() if c}

    def apply(self, f: LaurentExpr, order: int) -> LaurentExpr:
        return PathProduct([self], self.ring, self.seed).apply(f, order)

    def __repr__(self) -> str:
        return f"WallAutomorphism(n0={self.n0}, coeffs={self.coeffs}, sign={self.sign}, ring={self.ring})"


def apply_wall_crossing(a: WallAutomorphism, f: LaurentExpr, order: int = 8) -> LaurentExpr:
    if f.nvars != a.nvars:
        raise ValueError(f"ring tag {a.ring} expects {a.nvars} variables, got {f.nvars}")
    return a.apply(f, order)


class PathProduct:
    """Composition of wall crossings, applied in crossing order."""

    def __init__(self, crossings: Sequence[WallAutomorphism], ring: str, seed: Seed):
        self.crossings = list(crossings)
        self.ring = ring
        self.seed = seed
        self.weights = ring_weights(seed, ring)
        self.nvars = len(self.weights)

    def apply(self, f: LaurentExpr, order: int) -> LaurentExpr:
        if f.nvars != self.nvars:
            raise ValueError(f"ring tag {self.ring} expects {self.nvars} variables, got {f.nvars}")
        groups: dict[int, dict] = {}
        for exp, c in f.items():
            deg = sum(a * b for a, b in zip(self.weights, exp))
            groups.setdefault(deg, {})[exp] = c
        out: dict = {}
        for deg, terms in groups.items():
            limit = deg + order
            for a in self.crossings:
                terms = a.act(terms, limit)
            for e, c in terms.items():
                out[e] = out.get(e, 0) + c
        return LaurentExpr(out, self.nvars)

    def __call__(self, f: LaurentExpr, order: int) -> LaurentExpr:
        return self.apply(f, order)

    def inverse(self) -> "PathProduct":
        return PathProduct([a.inverse() for a in reversed(self.crossings)], self.ring, self.seed)

    def then(self, other: "PathProduct") -> "PathProduct":
        """First ``self``, then ``other``."""
        return PathProduct(self.crossings + other.crossings, self.ring, self.seed)

    def __len__(self) -> int:
        return len(self.crossings)


# generic paths


@dataclass(frozen=True)
class Crossing:
    wall: int
    sign: int
    point: tuple[Fraction, ...]


@dataclass(frozen=True)
class GenericPath:
    """Ordered crossings of a polyline with the walls of a diagram."""

    crossings: tuple[Crossing, ...]
    waypoints: tuple[tuple[Fraction, ...], ...] = ()

    @classmethod
    def through(cls, d: ScatteringDiagram, points: Sequence[Sequence], closed: bool = False) -> "GenericPath":
        pts = [tuple(Fraction(x) for x in p) for p in points]
        if closed:
            pts = pts + [pts[0]]
        crossings: list[Crossing] = []
        for a, b in zip(pts, pts[1:]):
            crossings.extend(_segment_crossings(d, a, b))
        return cls(tuple(crossings), tuple(pts))

    def __len__(self) -> int:
        return len(self.crossings)


def _segment_crossings(d: ScatteringDiagram, a: tuple, b: tuple) -> list[Crossing]:
    seed = d.seed
    vel = tuple(y - x for x, y in zip(a, b))
    hits: list[tuple[Fraction, tuple, int, Crossing]] = []
    for idx, w in enumerate(d.walls):
        if w.is_trivial:
            continue
        pa = seed.pairing(w.n0, a)
        pb = seed.pairing(w.n0, b)
        if pa == 0 or pb == 0:
            if (pa == 0 and w.support.contains(a)) or (pb == 0 and w.support.contains(b)):
                raise NonGenericError("path endpoint lies on a wall")
            continue
        if (pa > 0) == (pb > 0):
            continue
        t = pa / (pa - pb)
        x = tuple(p + t * v for p, v in zip(a, vel))
        if not w.support.contains(x):
            continue
        if not w.support.in_relative_interior(x):
            raise NonGenericError(f"path meets the boundary of wall {idx} at {x}")
        sign = -1 if seed.pairing(w.n0, vel) > 0 else 1
        hits.append((t, w.n0, idx, Crossing(idx, sign, x)))
    hits.sort(key=lambda h: (h[0], h[2]))
    for h1, h2 in zip(hits, hits[1:]):
        if h1[0] == h2[0] and h1[1] != h2[1]:
            raise NonGenericError(f"path crosses a joint at {h1[3].point}")
    return [h[3] for h in hits]


def path_product(d: ScatteringDiagram, p: GenericPath, ring: str = X_RING) -> PathProduct:
    autos = [
        WallAutomorphism(d.seed, d.walls[c.wall].n0, d.walls[c.wall].coeffs, c.sign, ring)
        for c in p.crossings
    ]
    return PathProduct(autos, ring, d.seed)


def is_identity(p: PathProduct, monomials: Iterable[Sequence[int]], order: int) -> bool:
    for m in monomials:
        z = LaurentExpr.monomial(m)
        if p.apply(z, order) != z:
            return False
    return True


# general points and g_x


def g_x(d: ScatteringDiagram, x: Sequence) -> tuple[tuple[int, ...] | None, tuple[int, ...]]:
    """``(n0, coeffs)`` of the product of the walls containing ``x``.

    Returns ``(None, (1,))`` when no wall contains ``x``.  Raises
    :class:`NonGenericError` if ``x`` lies on two hyperplanes or on a wall
    boundary.
    """
    x = tuple(Fraction(v) for v in x)
    seed = d.seed
    normal = None
    acc: list[int] = [1]
    for w in d.nontrivial():
        if seed.pairing(w.n0, x) != 0:
            continue
        if not w.support.contains(x):
            continue
        if not w.support.in_relative_interior(x):
            raise NonGenericError(f"{x} is on the boundary of a wall")
        if normal is None:
            normal = w.n0
        elif normal != w.n0:
            raise NonGenericError(f"{x} lies on a joint")
        acc = series_mul(acc, w.coeffs, nterms_for(d.order, w.n0))
    return normal, trim(acc) if normal is not None else (1,)


def _is_general_on(diagrams: Sequence[ScatteringDiagram], x: tuple, n0: tuple) -> bool:
    for d in diagrams:
        for w in d.nontrivial():
            on_plane = d.seed.pairing(w.n0, x) == 0
            if w.n0 != n0:
                if on_plane:
                    return False
                continue
            if on_plane and w.support.contains(x) and not w.support.in_relative_interior(x):
                return False
    return True


def sample_general_points(
    diagrams: Sequence[ScatteringDiagram], n0: Sequence[int], supports: Sequence[Cone], rng: random.Random, per_wall: int = 2
) -> list[tuple[Fraction, ...]]:
    """Deterministic general points in the relative interiors of ``supports``."""
    pts = []
    n0 = tuple(n0)
    for cone in supports:
        got = 0
        for _ in range(50 * per_wall):
            if got >= per_wall:
                break
            weights = [rng.randint(1, 10**6) for _ in cone.rays]
            x = list(cone.interior_point(weights)) if cone.rays else [Fraction(0)] * cone.ambient
            for l in cone.lineality:
                c = Fraction(rng.randint(-(10**6), 10**6), rng.choice((997, 1009, 1013)))
                x = [a + c * b for a, b in zip(x, l)]
            x = tuple(x)
            if not any(x) or not cone.in_relative_interior(x):
                continue
            if _is_general_on(diagrams, x, n0):
                pts.append(x)
                got += 1
    return pts


def equivalent(d1: ScatteringDiagram, d2: ScatteringDiagram, seed: int = 0, per_wall: int = 2) -> bool:
    """Compare ``g_x`` of both diagrams at general points of every wall."""
    return not equivalence_witnesses(d1, d2, seed, per_wall)


def equivalence_witnesses(d1: ScatteringDiagram, d2: ScatteringDiagram, seed: int = 0, per_wall: int = 2) -> list[dict]:
    if d1.rank != d2.rank:
        raise ValueError("diagrams live in different ambient spaces")
    order = min(d1.order, d2.order)
    a = d1.with_walls(d1.walls) if d1.order == order else ScatteringDiagram(d1.seed, order, d1.walls)
    b = d2.with_walls(d2.walls) if d2.order == order else ScatteringDiagram(d2.seed, order, d2.walls)
    rng = random.Random(seed)
    bad = []
    normals = sorted(set(a.normals()) | set(b.normals()))
    for n0 in normals:
        supports = [w.support for w in a.walls_on(n0)] + [w.support for w in b.walls_on(n0)]
        for x in sample_general_points([a, b], n0, supports, rng, per_wall):
            ga = g_x(a, x)
            gb = g_x(b, x)
            if ga[1] != gb[1]:
                bad.append({"point": [str(v) for v in x], "n0": list(n0), "left": list(ga[1]), "right": list(gb[1])})
    return bad


# incoming and outgoing walls


def classify_wall(seed: Seed, w: Wall) -> str:
    """``'incoming'`` iff ``{n0, .}`` lies in the support."""
    return "incoming" if w.support.contains(seed.p_star(w.n0)) else "outgoing"


def incoming_walls(d: ScatteringDiagram) -> list[Wall]:
    return [w for w in d.nontrivial() if classify_wall(d.seed, w) == "incoming"]


def pi_act_wall(pi: Sequence[int], w: Wall) -> Wall:
    """Image of a wall under the index permutation ``pi`` (0-based, ``pi[i] = π(i)``).

    The support moves by the dual permutation and the normal by ``π``.
    """
    r = len(pi)
    if sorted(pi) != list(range(r)) or len(w.n0) != r:
        raise ValueError("pi is not a permutation of the wall's index set")

    def move(v):
        out = [0] * r
        for i in range(r):
            out[pi[i]] = v[i]
        return tuple(out)

    support = Cone([move(v) for v in w.support.rays], [move(v) for v in w.support.lineality], r)
    return Wall(move(w.n0), support, w.coeffs)


# rank-2 completion and factorization


def _rank2_layout(seed: Seed) -> tuple[list[tuple[Fraction, ...]], list[tuple[Fraction, ...]]]:
    """Two generic paths from C+ to C-: through the outgoing half and the other half."""
    if seed.rank != 2:
        raise ValueError("rank-2 routine called on a seed of rank %d" % seed.rank)
    w12 = seed.skew[0][1]
    start = (Fraction(1009), Fraction(1013))
    end = (Fraction(-1013), Fraction(-1009))
    q4 = (Fraction(1019), Fraction(-1021))
    q2 = (Fraction(-1021), Fraction(1019))
    if w12 >= 0:
        return [start, q4, end], [start, q2, end]
    return [start, q2, end], [start, q4, end]


def _outgoing_ray(seed: Seed, n0: Sequence[int]) -> Cone:
    v = seed.p_star(n0)
    if not any(v):
        raise ValueError(f"{{n0, .}} vanishes for n0 = {tuple(n0)}")
    return Cone([tuple(-x for x in v)], (), seed.rank)


def _primitive_split(n: Sequence[int]) -> tuple[tuple[int, ...], int]:
    p = primitive(n)
    j = degree(n) // degree(p)
    return p, j


def _factor_rank2(
    seed: Seed,
    base: Sequence[Wall],
    target: Callable[[LaurentExpr, int], LaurentExpr],
    path_points: Sequence[Sequence[Fraction]],
    k: int,
) -> dict[tuple[int, ...], list[int]]:
    """Find outgoing ray functions so that ``base`` plus rays, crossed along the
    path, equals ``target`` up to order ``k``."""
    comps: dict[tuple[int, ...], list[int]] = {}
    tests = [(1, 0), (0, 1)]
    for ell in range(1, k + 1):
        walls = list(base) + [Wall(n0, _outgoing_ray(seed, n0), tuple(c)) for n0, c in comps.items()]
        d = ScatteringDiagram(seed, k, walls)
        prod = path_product(d, GenericPath.through(d, path_points), X_RING)
        deltas: dict[tuple[int, ...], dict[int, int]] = {}
        for i, m in enumerate(tests):
            z = LaurentExpr.monomial(m)
            diff = target(z, ell) - prod.apply(z, ell)
            for exp, c in diff.items():
                n = tuple(x - y for x, y in zip(exp, m))
                if any(x < 0 for x in n) or degree(n) != ell:
                    raise ArithmeticError(f"unexpected discrepancy at {n} in degree {ell}")
                deltas.setdefault(n, {})[i] = c
        for n, by_test in sorted(deltas.items()):
            n0, j = _primitive_split(n)
            ray = Wall(n0, _outgoing_ray(seed, n0), (1, 1))
            probe = ScatteringDiagram(seed, k, [ray])
            cr = GenericPath.through(probe, path_points).crossings
            if len(cr) != 1:
                raise ArithmeticError(f"outgoing ray for {n0} is not crossed exactly once")
            s = cr[0].sign
            b = None
            for i, m in enumerate(tests):
                pair = seed.skew_pair(m, n0)
                val = by_test.get(i, 0)
                if pair == 0:
                    if val:
                        raise ArithmeticError("discrepancy not produced by a wall on the ray")
                    continue
                q = Fraction(val, s * pair)
                if q.denominator != 1:
                    raise DivisionError(f"non-integral wall coefficient {q} at {n}")
                if b is None:
                    b = int(q)
                elif b != int(q):
                    raise ArithmeticError("inconsistent wall coefficient between test monomials")
            c = comps.setdefault(n0, [1])
            while len(c) <= j:
                c.append(0)
            c[j] += b or 0
    return comps


def complete_rank2(init: ScatteringDiagram, k: int | None = None) -> ScatteringDiagram:
    """Consistent completion of a rank-2 diagram of full lines, order by order.

    Adds outgoing walls on the rays ``R>=0 * (-{n0, .})`` so that the path
    through the outgoing half-plane agrees with the path through the other
    half.
    """
    seed = init.seed
    if seed.rank != 2:
        raise ValueError("complete_rank2 needs an ambient of rank 2")
    k = init.order if k is None else k
    base = [w.truncated(k) for w in init.nontrivial()]
    for w in base:
        if w.support.dim != 1 or w.support.rays:
            raise ValueError("complete_rank2 expects full lines through the origin")
    if seed.skew[0][1] == 0 or len(base) <= 1:
        return ScatteringDiagram(seed, k, base)
    out_path, other_path = _rank2_layout(seed)
    d0 = ScatteringDiagram(seed, k, base)
    other = path_product(d0, GenericPath.through(d0, other_path), X_RING)
    comps = _factor_rank2(seed, base, other.apply, out_path, k)
    added = [Wall(n0, _outgoing_ray(seed, n0), tuple(c)) for n0, c in sorted(comps.items())]
    result = ScatteringDiagram(seed, k, base + [w for w in added if not w.is_trivial])
    return result


def psi_factorize(p: PathProduct, seed: Seed, k: int) -> dict[tuple[int, ...], tuple[int, ...]]:
    """Parallel components of a rank-2 element along the outgoing half-plane.

    ``p`` is factored as the ordered product of wall crossings on the rays
    ``R>=0 * (-{n0, .})`` met by a path from C+ to C- through that half-plane.
    """
    if seed.rank != 2:
        raise ValueError("psi_factorize is implemented for rank 2")
    out_path, _ = _rank2_layout(seed)
    comps = _factor_rank2(seed, [], p.apply, out_path, k)
    return {n0: trim(c) for n0, c in sorted(comps.items()) if trim(c) != (1,)}


def loop_points_rank2(radius: int = 1000) -> list[tuple[Fraction, ...]]:
    """A generic polygon around the origin of the plane, counterclockwise."""
    pts = [(1009, 13), (7, 1013), (-1019, 11), (-17, -1021), (1031, -19)]
    return [tuple(Fraction(x * radius, 1000) for x in p) for p in pts]


def loop_product_rank2(d: ScatteringDiagram, ring: str = X_RING) -> PathProduct:
    path = GenericPath.through(d, loop_points_rank2(), closed=True)
    return path_product(d, path, ring)


# finite type via mutation


def cluster_walls(s: Seed, k: int = 8, depth: int = 12) -> ScatteringDiagram:
    """Facets of the cluster chambers reached within ``depth`` mutations.

    Each facet ``cone(g_j : j != i)`` of a chamber carries the normal ``|c_i|``
    and function ``(1 + z^{|c_i|})^{d_i}``.  For finite type and a large
    enough depth this is the whole consistent diagram; otherwise it is the
    part supported in the explored cluster complex.
    """
    tree = MutationTree(s, depth)
    seen: dict[tuple, Wall] = {}
    for ps in tree:
        for i in s.unfrozen:
            c = ps.c_vector(i)
            n0 = tuple(abs(x) for x in c)
            facet = frozenset(ps.g_vector(j) for j in range(s.rank) if j != i)
            key = (n0, facet)
            if key in seen:
                continue
            cone = Cone(sorted(facet), (), s.rank)
            seen[key] = Wall(primitive(n0), cone, binomial_coeffs(s.d[i], nterms_for(k, primitive(n0))))
    return ScatteringDiagram(s, k, list(seen.values()))


def finite_type_diagram(s: Seed, k: int = 8, depth: int = 12) -> ScatteringDiagram:
    """The consistent diagram of a finite-type seed via its cluster walls."""
    if not is_finite_type(s):
        raise NotFiniteTypeError("not finite type: a mutation-equivalent matrix has |b_ij b_ji| >= 4")
    tree = MutationTree(s, depth)
    if not tree.closed:
        raise NotFiniteTypeError(f"not finite type: mutation tree still open at depth {depth}")
    return cluster_walls(s, k, depth)


def generic_loops(d: ScatteringDiagram, count: int, seed: int = 0, vertices: int = 5) -> list[GenericPath]:
    """``count`` deterministic closed polylines avoiding joints and wall boundaries."""
    rng = random.Random(seed)
    r = d.rank
    loops = []
    attempts = 0
    while len(loops) < count:
        attempts += 1
        if attempts > 100 * count:
            raise NonGenericError("could not find enough generic loops")
        pts = []
        for _ in range(vertices):
            pts.append(tuple(Fraction(rng.randint(-(10**6), 10**6), rng.choice((1009, 1013, 1019))) for _ in range(r)))
        try:
            path = GenericPath.through(d, pts, closed=True)
        except NonGenericError:
            continue
        if len(path) == 0:
            continue
        loops.append(path)
    return loops


def sample_monomials(seed: Seed, ring: str, count: int, rng: random.Random, spread: int = 3) -> list[tuple[int, ...]]:
    r = seed.rank
    n = r if ring == X_RING else 2 * r
    out = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    while len(out) < count:
        out.append(tuple(rng.randint(-spread, spread) for _ in range(n)))
    return out[:count]


def check_consistency(d: ScatteringDiagram, loops: int = 20, seed: int = 0, rings: Sequence[str] = (X_RING, A_RING)) -> list[dict]:
    """Failures of loop identity over ``loops`` generic loops (empty when consistent)."""
    rng = random.Random(seed + 1)
    bad = []
    for li, path in enumerate(generic_loops(d, loops, seed)):
        for ring in rings:
            p = path_product(d, path, ring)
            for m in sample_monomials(d.seed, ring, 2 * d.rank, rng):
                z = LaurentExpr.monomial(m)
                if p.apply(z, d.order) != z:
                    bad.append({"loop": li, "ring": ring, "monomial": list(m)})
    return bad
