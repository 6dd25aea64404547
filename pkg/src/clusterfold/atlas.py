"""Chamber atlases, DT transformations and the gluing algebra of the folded
Markov variety.

Charts are indexed by cluster chambers ``C_v^+`` and ``C_v^-``.  All tori share
the character lattice M°⊕N of the root seed, and the transition between two
charts is the path-ordered product along a route through adjacent chambers.
The only route between the two halves passes from ``C^+`` to ``C^-`` through a
supplied finite realization of ``p_{+,-}`` (a maximal green sequence, possibly
followed by folding).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import sympy

from .folding import FoldingMap, q_tilde
from .lattice_core import MutationTree, PrincipalSeed, Seed, green_sequence_walls, is_maximal_green_sequence
from .poly import LaurentExpr, MonomialMap, series_power
from .scattering import A_RING, PathProduct, WallAutomorphism, binomial_coeffs


class NotGreenError(ValueError):
    """The supplied sequence is not a maximal green sequence."""


# DT transformations


def wall_for(seed: Seed, n0: Sequence[int], k: int, sign: int) -> WallAutomorphism:
    """Crossing of the cluster wall with normal ``n0`` and function ``(1+z^{n0})^{d_k}``."""
    d = seed.d[k]
    return WallAutomorphism(seed, n0, binomial_coeffs(d, d + 1), sign, A_RING)


def green_path_product(s: Seed, seq: Sequence[int], one_based: bool = True) -> PathProduct:
    """``p_{+,-}``: the walls ``c_t^⊥`` crossed by a green sequence, in order."""
    autos = []
    for k, c, sgn in green_sequence_walls(s, seq, one_based):
        if sgn != 1:
            raise NotGreenError(f"mutation at {k + 1} is red")
        autos.append(wall_for(s, c, k, 1))
    return PathProduct(autos, A_RING, s)


@dataclass
class DTTransform:
    """``p_{-,+} ∘ Σ*`` realized by a maximal green sequence."""

    seed: Seed
    sequence: tuple[int, ...]
    forward: PathProduct  # p_{+,-}

    @property
    def backward(self) -> PathProduct:
        return self.forward.inverse()

    def apply(self, f: LaurentExpr, order: int = 12) -> LaurentExpr:
        """Exact value: the order is raised until the result stabilizes."""
        g = sigma_inversion(self.seed.rank)(f)
        return _exact(self.backward.apply, g, order)

    def reverse_inverse(self, f: LaurentExpr, order: int = 12) -> LaurentExpr:
        """``p_{+,-}`` applied to ``f``: the green walls in order with sign +1."""
        return _exact(self.forward.apply, f, order)

    def inverse_apply(self, f: LaurentExpr, order: int = 12) -> LaurentExpr:
        """``Σ* ∘ p_{+,-}``, the inverse of :meth:`apply`."""
        return sigma_inversion(self.seed.rank)(_exact(self.forward.apply, f, order))


def _exact(step, f: LaurentExpr, order: int, bump: int = 4, limit: int = 80) -> LaurentExpr:
    prev = step(f, order)
    while order < limit:
        order += bump
        cur = step(f, order)
        if cur == prev:
            return cur
        prev = cur
    raise ArithmeticError(f"value did not stabilize up to order {order}")


def dt_transform(s: Seed, green_seq: Sequence[int], one_based: bool = True) -> DTTransform:
    if not is_maximal_green_sequence(s, green_seq, one_based):
        raise NotGreenError("not a maximal green sequence")
    return DTTransform(s, tuple(green_seq), green_path_product(s, green_seq, one_based))


def find_maximal_green_sequence(s: Seed, max_length: int = 12) -> tuple[int, ...] | None:
    """Shortest maximal green sequence (1-based) by iterative deepening."""

    def dfs(ps: PrincipalSeed, seq: list[int], budget: int):
        if all(all(x <= 0 for x in ps.c_vector(k)) for k in s.unfrozen):
            return tuple(seq)
        if budget == 0:
            return None
        for k in s.unfrozen:
            if ps.is_green(k):
                got = dfs(ps.mutate(k), seq + [k + 1], budget - 1)
                if got is not None:
                    return got
        return None

    root = PrincipalSeed.initial(s)
    for n in range(1, max_length + 1):
        got = dfs(root, [], n)
        if got is not None:
            return got
    return None


@dataclass
class FoldedTransform:
    """``p̄ = q̃ ∘ p ∘ lift`` for an element ``p`` of the source group."""

    fm: FoldingMap
    source_step: Callable[[LaurentExpr, int], LaurentExpr]

    def lift(self, exp: Sequence[int]) -> tuple[int, ...]:
        rb = self.fm.rank
        return self.fm.lift_n(exp[:rb]) + self.fm.lift_n(exp[rb:])

    def apply(self, f: LaurentExpr, order: int) -> LaurentExpr:
        out = LaurentExpr.zero(2 * self.fm.rank)
        for exp, c in f.items():
            z = LaurentExpr.monomial(self.lift(exp), c)
            out = out + q_tilde(self.fm, self.source_step(z, order))
        return out


def folded_dt_check(fm: FoldingMap, dt: DTTransform, exps: Iterable[Sequence[int]], order: int = 12) -> bool:
    """``q̃ ∘ DT`` takes equal values on exponents with equal folded image."""
    amap = fm.a_map()
    seen: dict[tuple, LaurentExpr] = {}
    for e in exps:
        img = amap.image(e)
        val = q_tilde(fm, dt.apply(LaurentExpr.monomial(e), order))
        if img in seen and seen[img] != val:
            return False
        seen[img] = val
    return True


# exact pullbacks


_RINGS: dict[int, object] = {}


def _poly_ring(n: int):
    if n not in _RINGS:
        _RINGS[n] = sympy.ring(",".join(f"z{i + 1}" for i in range(n)), sympy.ZZ)[0]
    return _RINGS[n]


class LaurentFraction:
    """A quotient of Laurent polynomials, kept unreduced.

    Equality is tested by cross-multiplication, so no gcd is ever needed;
    :meth:`to_laurent` performs an exact division when asked.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentExpr, den: LaurentExpr | None = None):
        if den is None:
            den = LaurentExpr.one(num.nvars)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.is_monomial() and not num.is_zero():
            (e, c), = den.items()
            if c in (1, -1) and any(e):
                num = num.shift(tuple(-x for x in e)).scale(c)
                den = LaurentExpr.one(num.nvars)
        self.num = num
        self.den = den

    @property
    def nvars(self) -> int:
        return self.num.nvars

    @classmethod
    def one(cls, nvars: int) -> "LaurentFraction":
        return cls(LaurentExpr.one(nvars))

    def __mul__(self, o: "LaurentFraction") -> "LaurentFraction":
        return LaurentFraction(self.num * o.num, self.den * o.den)

    def __add__(self, o: "LaurentFraction") -> "LaurentFraction":
        if self.den == o.den:
            return LaurentFraction(self.num + o.num, self.den)
        return LaurentFraction(self.num * o.den + o.num * self.den, self.den * o.den)

    def __sub__(self, o: "LaurentFraction") -> "LaurentFraction":
        return self + LaurentFraction(-o.num, o.den)

    def inverse(self) -> "LaurentFraction":
        return LaurentFraction(self.den, self.num)

    def __pow__(self, e: int) -> "LaurentFraction":
        if e < 0:
            return self.inverse() ** (-e)
        return LaurentFraction(self.num**e, self.den**e)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, o) -> bool:
        if isinstance(o, LaurentExpr):
            o = LaurentFraction(o)
        return (self.num * o.den - o.num * self.den).is_zero()

    __hash__ = None

    def _polys(self):
        n = self.nvars
        R = _poly_ring(n)
        shift = [0] * n
        for f in (self.num, self.den):
            for e, _ in f.items():
                shift = [max(s, -x) for s, x in zip(shift, e)]

        def poly(f):
            return R({tuple(x + s for x, s in zip(e, shift)): c for e, c in f.items()})

        return poly(self.num), poly(self.den)

    def reduced(self) -> "LaurentFraction":
        """Cancel the gcd of numerator and denominator."""
        if self.den.is_monomial() or self.num.is_zero():
            return self
        pn, pd = self._polys()
        _, a, b = pn.cofactors(pd)
        # normalize the sign so the denominator's leading coefficient is positive
        if b.LC < 0:
            a, b = -a, -b
        n = self.nvars
        return LaurentFraction(
            LaurentExpr({tuple(e): int(c) for e, c in a.terms()}, n),
            LaurentExpr({tuple(e): int(c) for e, c in b.terms()}, n),
        )

    def to_laurent(self) -> LaurentExpr:
        """Exact quotient; raises ``ValueError`` when it is not Laurent."""
        f = self.reduced()
        if not f.den.is_monomial():
            raise ValueError("expression is not a Laurent polynomial")
        (e, c), = f.den.items()
        out = {}
        for ex, a in f.num.items():
            q, r = divmod(a, c)
            if r:
                raise ValueError("non-integral coefficient")
            out[tuple(x - y for x, y in zip(ex, e))] = q
        return LaurentExpr(out, self.nvars)

    def as_expr(self) -> sympy.Expr:
        syms = sympy.symbols(f"z1:{self.nvars + 1}")

        def ex(f):
            return sum(
                (c * sympy.Mul(*[v**a for v, a in zip(syms, e)]) for e, c in f.items()), sympy.Integer(0)
            )

        return sympy.cancel(ex(self.num) / ex(self.den))


def _eval(f: LaurentExpr, images: Sequence[LaurentFraction], n_out: int) -> LaurentFraction:
    """Substitute fractions ``N_i/D_i`` for the variables of ``f``.

    With ``lo_i, hi_i`` the extreme exponents of variable ``i`` in ``f``,
    ``z^e`` becomes ``prod N_i^(e_i-lo_i) D_i^(hi_i-e_i)`` times the common
    factor ``prod N_i^lo_i D_i^-hi_i``.
    """
    if f.is_zero():
        return LaurentFraction(LaurentExpr.zero(n_out))
    exps = [e for e, _ in f.items()]
    lo = [min(e[i] for e in exps) for i in range(f.nvars)]
    hi = [max(e[i] for e in exps) for i in range(f.nvars)]
    cache: dict = {}

    def power(which: int, i: int, k: int) -> LaurentExpr:
        key = (which, i, k)
        if key not in cache:
            base = images[i].num if which == 0 else images[i].den
            cache[key] = base**k
        return cache[key]

    num = LaurentExpr.zero(n_out)
    for e, c in f.items():
        term = LaurentExpr.one(n_out).scale(c)
        for i, a in enumerate(e):
            if a - lo[i]:
                term = term * power(0, i, a - lo[i])
            if hi[i] - a:
                term = term * power(1, i, hi[i] - a)
        num = num + term
    den = LaurentExpr.one(n_out)
    for i in range(f.nvars):
        if lo[i] > 0:
            num = num * power(0, i, lo[i])
        elif lo[i] < 0:
            den = den * power(0, i, -lo[i])
        if hi[i] > 0:
            den = den * power(1, i, hi[i])
        elif hi[i] < 0:
            num = num * power(1, i, -hi[i])
    return LaurentFraction(num, den)


@dataclass(frozen=True)
class _CrossStep:
    auto: WallAutomorphism

    def _weights_and_base(self):
        a = self.auto
        n = a.nvars
        x = LaurentExpr.monomial(a.step)
        coeffs = list(a.coeffs)
        base = sum((x**j).scale(c) for j, c in enumerate(coeffs))
        mult = 1
        if len(coeffs) > 1 and tuple(coeffs) == binomial_coeffs(len(coeffs) - 1, len(coeffs)):
            base, mult = LaurentExpr.one(n) + x, len(coeffs) - 1
        weights = []
        for i in range(n):
            e = a.exponent(tuple(int(j == i) for j in range(n))) * mult
            if Fraction(e).denominator != 1:
                raise ValueError("wall crossing exponent is not integral")
            weights.append(int(e))
        return weights, base

    def __call__(self, F: LaurentFraction) -> LaurentFraction:
        weights, base = self._weights_and_base()
        n = self.auto.nvars

        def image(p: LaurentExpr) -> tuple[LaurentExpr, int]:
            groups: dict[int, dict] = {}
            for exp, c in p.items():
                w = sum(u * v for u, v in zip(weights, exp))
                groups.setdefault(w, {})[exp] = c
            wmin = min(groups)
            total = LaurentExpr.zero(n)
            for w, g in groups.items():
                total = total + LaurentExpr(g, n) * base ** (w - wmin)
            return total, wmin

        pn, wn = image(F.num)
        pd, wd = image(F.den)
        k = wn - wd
        if k >= 0:
            return LaurentFraction(pn * base**k, pd).reduced()
        return LaurentFraction(pn, pd * base ** (-k)).reduced()


def _value(f: LaurentExpr, point: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for e, c in f.items():
        term = Fraction(c)
        for v, a in zip(point, e):
            if a:
                term *= v**a
        total += term
    return total


def _cross_values(step: "_CrossStep", point: Sequence[Fraction]) -> list[Fraction]:
    weights, base = step._weights_and_base()
    b = _value(base, point)
    return [v * b**w for v, w in zip(point, weights)]


@dataclass(frozen=True)
class _ImageStep:
    images: tuple
    n_in: int
    n_out: int

    def values(self, point: Sequence[Fraction]) -> list[Fraction]:
        return [_value(im.num, point) / _value(im.den, point) for im in self.images]

    def __call__(self, F: LaurentFraction) -> LaurentFraction:
        a = _eval(F.num, self.images, self.n_out)
        b = _eval(F.den, self.images, self.n_out)
        return LaurentFraction(a.num * b.den, a.den * b.num).reduced()


class ExactMap:
    """A ring map evaluated exactly on fractions of Laurent polynomials.

    Stored as a list of elementary steps; ``f.then(g)`` applies ``f`` first,
    matching the order of crossings along a path.
    """

    def __init__(self, steps: Sequence, n_in: int, n_out: int | None = None):
        self.steps = tuple(steps)
        self.n_in = n_in
        self.n_out = n_in if n_out is None else n_out

    @classmethod
    def identity(cls, nvars: int) -> "ExactMap":
        return cls((), nvars)

    @classmethod
    def crossing(cls, auto: WallAutomorphism) -> "ExactMap":
        return cls((_CrossStep(auto),), auto.nvars)

    @classmethod
    def monomial(cls, mmap: MonomialMap) -> "ExactMap":
        n = mmap.source_rank
        images = tuple(
            LaurentFraction(LaurentExpr.monomial(mmap.image(tuple(int(j == i) for j in range(n))))) for i in range(n)
        )
        return cls((_ImageStep(images, n, mmap.target_rank),), n, mmap.target_rank)

    @classmethod
    def from_images(cls, images: Sequence[LaurentFraction], n_out: int) -> "ExactMap":
        return cls((_ImageStep(tuple(images), len(images), n_out),), len(images), n_out)

    def then(self, other: "ExactMap") -> "ExactMap":
        if self.n_out != other.n_in:
            raise ValueError("maps are not composable")
        return ExactMap(self.steps + other.steps, self.n_in, other.n_out)

    def field_image(self, F: LaurentFraction) -> LaurentFraction:
        for st in self.steps:
            F = st(F)
        return F

    def __call__(self, f: LaurentExpr) -> LaurentFraction:
        if f.nvars != self.n_in:
            raise ValueError(f"expected {self.n_in} variables, got {f.nvars}")
        return self.field_image(LaurentFraction(f))

    def apply(self, f: LaurentExpr) -> LaurentExpr:
        return self(f).to_laurent()

    def generator_images(self) -> list[LaurentFraction]:
        n = self.n_in
        return [self(LaurentExpr.monomial(tuple(int(j == i) for j in range(n)))) for i in range(n)]

    def collapse(self) -> "ExactMap":
        """Same map with the images of the generators precomputed."""
        return ExactMap.from_images(self.generator_images(), self.n_out)

    def values(self, point: Sequence[Fraction]) -> list[Fraction]:
        """Images of the coordinates evaluated at ``point`` in exact arithmetic."""
        vals = [Fraction(v) for v in point]
        for st in reversed(self.steps):
            vals = _cross_values(st, vals) if isinstance(st, _CrossStep) else st.values(vals)
        return vals

    def equals(self, other: "ExactMap", points: int = 0, seed: int = 0) -> bool:
        """Equality of the generator images.

        With ``points = 0`` the images are compared as reduced fractions.
        Otherwise both maps are evaluated at that many random rational points;
        distinct rational maps agree at a random point with negligible
        probability, and this avoids expanding large compositions.
        """
        if (self.n_in, self.n_out) != (other.n_in, other.n_out):
            return False
        if points:
            rng = random.Random(seed)
            for _ in range(points):
                pt = [Fraction(rng.randint(2, 997), rng.randint(2, 997)) for _ in range(self.n_out)]
                try:
                    if self.values(pt) != other.values(pt):
                        return False
                except ZeroDivisionError:
                    continue
            return True
        return all(a == b for a, b in zip(self.generator_images(), other.generator_images()))


def _lockstep(p: PathProduct, e: tuple[int, ...], order: int, limit: int, bump: int = 4):
    """Expand ``z^e`` and ``z^-e`` side by side until one stabilizes.

    Returns ``(laurent, sign)`` with ``sign = -1`` when the image of ``z^-e``
    was found, or ``None``.
    """
    mono = {1: LaurentExpr.monomial(e), -1: LaurentExpr.monomial(tuple(-a for a in e))}
    prev = {sg: p.apply(f, order) for sg, f in mono.items()}
    while order < limit:
        order += bump
        for sg, f in mono.items():
            cur = p.apply(f, order)
            if cur == prev[sg]:
                return cur, sg
            prev[sg] = cur
    return None


def exact_product(p: PathProduct, order: int = 4, limit: int = 32, lazy: bool = False) -> ExactMap:
    """Exact form of a path product through cluster walls.

    Each coordinate image is read off from truncated evaluations once they
    stabilize; ``z_i`` and ``z_i^{-1}`` are expanded side by side and the
    Laurent one is kept.  Coordinates with neither stabilizing fall back to
    step-by-step evaluation in the rational function field.
    """
    n = 2 * p.seed.rank if p.ring == A_RING else p.seed.rank
    steps = ExactMap(tuple(_CrossStep(a) for a in p.crossings), n)
    if lazy:
        return steps
    images = []
    for i in range(n):
        e = tuple(int(j == i) for j in range(n))
        got = _lockstep(p, e, order, limit)
        if got is None:
            images.append(steps(LaurentExpr.monomial(e)))
        else:
            f, sg = got
            images.append(LaurentFraction(f) if sg == 1 else LaurentFraction(f).inverse())
    return ExactMap.from_images(images, n)


def exact_dt(dt: DTTransform) -> ExactMap:
    """``p_{-,+} ∘ Σ*`` as an exact map."""
    r = dt.seed.rank
    return ExactMap.monomial(sigma_inversion(r)).then(exact_product(dt.backward))


def exact_dt_inverse(dt: DTTransform) -> ExactMap:
    """The reverse-inverse realization ``Σ* ∘ p_{+,-}``."""
    return exact_product(dt.forward).then(ExactMap.monomial(sigma_inversion(dt.seed.rank)))


def folded_exact(fm: FoldingMap, source_map: ExactMap) -> ExactMap:
    """``q̃ ∘ p ∘ lift`` on the generators of the folded A_prin ring."""
    rb = fm.rank
    through = source_map.then(ExactMap.monomial(fm.a_map()))
    images = []
    for i in range(2 * rb):
        e = tuple(int(j == i) for j in range(2 * rb))
        images.append(through(LaurentExpr.monomial(fm.lift_n(e[:rb]) + fm.lift_n(e[rb:]))))
    return ExactMap.from_images(images, 2 * rb)


# atlas


@dataclass(frozen=True)
class Chart:
    sign: int
    key: frozenset
    path: tuple[int, ...]

    @property
    def id(self) -> str:
        body = ".".join(str(k + 1) for k in self.path) or "root"
        return ("+" if self.sign > 0 else "-") + body


@dataclass
class Transition:
    source: Chart
    target: Chart
    pullback: ExactMap
    truncated: bool = False

    def apply(self, f: LaurentExpr) -> LaurentExpr:
        return self.pullback.apply(f)


@dataclass
class Atlas:
    seed: Seed
    tree: MutationTree
    cross: ExactMap
    cross_back: ExactMap
    charts: list[Chart] = field(default_factory=list)

    def __post_init__(self):
        self._adj = self.tree.adjacency()
        self._by_key = {ps.cluster_key(): ps for ps in self.tree}
        opp_root = PrincipalSeed.initial(self.seed.opposite())
        self._opp = {key: opp_root.mutate_path(ps.path) for key, ps in self._by_key.items()}
        if not self.charts:
            for sign in (1, -1):
                for ps in self.tree:
                    self.charts.append(Chart(sign, ps.cluster_key(), ps.path))
        self._root = PrincipalSeed.initial(self.seed).cluster_key()
        self._cache: dict[tuple, ExactMap] = {}

    @property
    def rank(self) -> int:
        return self.seed.rank

    def chart(self, cid: str) -> Chart:
        for c in self.charts:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def _route(self, a: frozenset, b: frozenset) -> list[tuple[frozenset, int]]:
        """Shortest chamber route from ``a`` to ``b`` as (chamber, direction) steps."""
        prev: dict[frozenset, tuple[frozenset, int] | None] = {a: None}
        queue = deque([a])
        while queue:
            x = queue.popleft()
            if x == b:
                break
            for k, y in self._adj[x]:
                if y not in prev:
                    prev[y] = (x, k)
                    queue.append(y)
        if b not in prev:
            raise KeyError("chambers are not connected within the atlas")
        steps = []
        x = b
        while prev[x] is not None:
            p, k = prev[x]
            steps.append((p, k))
            x = p
        return list(reversed(steps))

    def half_product(self, sign: int, a: frozenset, b: frozenset) -> PathProduct:
        autos = []
        for key, k in self._route(a, b):
            if sign > 0:
                c = self._by_key[key].c_vector(k)
                trop = 1 if any(x > 0 for x in c) else -1
            else:
                # the negative chambers are the negated cluster complex of the opposite seed
                c = self._opp[key].c_vector(k)
                trop = -1 if any(x > 0 for x in c) else 1
            autos.append(wall_for(self.seed, [abs(x) for x in c], k, trop))
        return PathProduct(autos, A_RING, self.seed)

    def _half_exact(self, sign: int, a: frozenset, b: frozenset) -> ExactMap:
        key = (sign, a, b)
        if key not in self._cache:
            self._cache[key] = exact_product(self.half_product(sign, a, b), lazy=True)
        return self._cache[key]

    def transition(self, src: Chart, dst: Chart) -> Transition:
        if src.sign == dst.sign:
            return Transition(src, dst, self._half_exact(src.sign, src.key, dst.key))
        across = self.cross if src.sign > 0 else self.cross_back
        m = self._half_exact(src.sign, src.key, self._root).then(across).then(
            self._half_exact(dst.sign, self._root, dst.key)
        )
        return Transition(src, dst, m)

    def generators(self) -> list[LaurentExpr]:
        n = 2 * self.rank
        return [LaurentExpr.monomial(tuple(int(j == i) for j in range(n))) for i in range(n)]

    def to_json(self) -> dict:
        root_p = next(c for c in self.charts if c.sign == 1 and c.key == self._root)
        data = {"charts": [c.id for c in self.charts], "transitions": []}
        for c in self.charts:
            if c == root_p:
                continue
            t = self.transition(root_p, c)
            pulls = []
            for g in self.generators():
                try:
                    pulls.append({"laurent": t.apply(g).to_json()})
                except ValueError:
                    pulls.append({"rational": str(t.pullback(g).as_expr())})
            data["transitions"].append({"source": root_p.id, "target": c.id, "pullbacks": pulls, "truncated": t.truncated})
        return data


def build_atilde(
    s: Seed,
    depth: int,
    green_seq: Sequence[int] | None = None,
    folding: FoldingMap | None = None,
    source_green_seq: Sequence[int] | None = None,
) -> Atlas:
    """Charts over Δ⁺ ∪ Δ⁻ to the depth bound with exact transitions.

    The crossing ``C^+ -> C^-`` comes from ``green_seq`` on ``s`` or, with
    ``folding``, from ``q̃`` of the source seed's green-sequence product.  For
    small finite type a green sequence is searched for when none is given.
    """
    tree = MutationTree(s, depth)
    if folding is not None:
        if folding.target != s:
            raise ValueError("folding target differs from the atlas seed")
        if source_green_seq is None:
            raise ValueError("a green sequence on the folding source is required")
        fwd = green_path_product(folding.source, source_green_seq)
        cross = folded_exact(folding, exact_product(fwd))
        cross_back = folded_exact(folding, exact_product(fwd.inverse()))
    else:
        seq = green_seq if green_seq is not None else find_maximal_green_sequence(s)
        if seq is None or not is_maximal_green_sequence(s, seq):
            raise NotGreenError("no finite realization of the crossing between C+ and C-")
        fwd = green_path_product(s, seq)
        cross = exact_product(fwd)
        cross_back = exact_product(fwd.inverse())
    return Atlas(s, tree, cross, cross_back)


def verify_cocycle(
    atlas: Atlas,
    triples: Iterable[tuple[Chart, Chart, Chart]] | None = None,
    sample: int = 30,
    seed: int = 0,
    points: int | None = None,
) -> tuple[bool, list[dict]]:
    """Check ``p_{σ,σ''} = p_{σ',σ''} ∘ p_{σ,σ'}`` on the generators.

    Rank 2 compares reduced fractions; higher ranks default to exact
    evaluation at three random rational points.
    """
    if points is None:
        points = 0 if atlas.rank <= 2 else 3
    if triples is None:
        rng = random.Random(seed)
        charts = atlas.charts
        triples = [tuple(rng.choice(charts) for _ in range(3)) for _ in range(sample)]
    bad = []
    for a, b, c in triples:
        direct = atlas.transition(a, c).pullback
        composed = atlas.transition(a, b).pullback.then(atlas.transition(b, c).pullback)
        if not direct.equals(composed, points=points, seed=seed):
            bad.append({"triple": [a.id, b.id, c.id]})
    return not bad, bad


def sigma_inversion(r: int) -> MonomialMap:
    """``Σ*``: ``z^(m,n) -> z^(-m,-n)`` on the rank-``2r`` A_prin lattice."""
    return MonomialMap.negation(2 * r)


def sigma_square(s: Seed, k: int, exp: Sequence[int], order: int = 8) -> dict:
    """Both sides of the Σ-conjugation identity for the edge ``root -k-> μ_k``.

    ``lhs`` is ``Σ*`` of the negative-chamber transition, ``formula`` is
    ``z^(-m,-n) (1 + z^{-x_k})^{<d_k e_k, m>}`` and ``rhs`` is the mutation
    side ``μ* ∘ Σ* ∘ (φ⁻)*``.
    """
    r = s.rank
    m = list(exp[:r])
    ek = tuple(int(j == k) for j in range(r))
    xk = tuple(s.p_star(ek)) + ek
    pw = s.d[k] * s.pairing(ek, m)
    if pw.denominator != 1:
        raise ValueError("exponent is not in the character lattice")
    pw = int(pw)
    sig = sigma_inversion(r)
    z = LaurentExpr.monomial(exp)
    crossing = wall_for(s, ek, k, 1)
    lhs = sig(PathProduct([crossing], A_RING, s).apply(z, order))
    nterms = order + 1
    coeffs = series_power((1, 1), pw, nterms)
    formula = LaurentExpr(
        {tuple(-a - j * b for a, b in zip(exp, xk)): c for j, c in enumerate(coeffs) if c}, 2 * r
    )
    shifted = tuple(a + pw * b for a, b in zip(exp, xk))
    mutated = PathProduct([wall_for(s, ek, k, -1)], A_RING, s)
    rhs = mutated.apply(sig(LaurentExpr.monomial(shifted)), order)
    # the mutation side is expanded around the shifted monomial; compare on the
    # common window of powers of x_k
    def window(f: LaurentExpr) -> dict:
        out = {}
        for e, c in f.items():
            diff = tuple(a + b for a, b in zip(e, exp))
            j = -diff[r + k] if xk[r + k] else 0
            if 0 <= j <= order:
                out[e] = c
        return out

    return {"lhs": lhs, "formula": formula, "rhs": rhs, "ok": window(lhs) == window(formula) == window(rhs)}


# gluing algebra of the folded Markov variety

A1, A2, A3 = sympy.symbols("A1 A2 A3")
A_VARS = (A1, A2, A3)


_A_FIELD, _FA1, _FA2, _FA3 = sympy.polys.fields.field("A1,A2,A3", sympy.ZZ)
_A_GENS = (_FA1, _FA2, _FA3)


class RationalExpr:
    """Exact rational function in ``A1, A2, A3``, kept in reduced form."""

    __slots__ = ("value",)

    def __init__(self, expr):
        if isinstance(expr, RationalExpr):
            self.value = expr.value
        elif getattr(expr, "field", None) == _A_FIELD:
            self.value = expr
        else:
            self.value = _A_FIELD.from_expr(sympy.sympify(expr))

    @classmethod
    def var(cls, i: int) -> "RationalExpr":
        return cls(_A_GENS[i])

    @property
    def expr(self):
        return self.value.as_expr()

    def _other(self, o):
        return o.value if isinstance(o, RationalExpr) else RationalExpr(o).value

    def __add__(self, o):
        return RationalExpr(self.value + self._other(o))

    __radd__ = __add__

    def __sub__(self, o):
        return RationalExpr(self.value - self._other(o))

    def __mul__(self, o):
        return RationalExpr(self.value * self._other(o))

    __rmul__ = __mul__

    def __truediv__(self, o):
        return RationalExpr(self.value / self._other(o))

    def __pow__(self, e: int):
        return RationalExpr(self.value**e)

    def __eq__(self, o) -> bool:
        return self.value == self._other(o)

    def __hash__(self) -> int:
        return hash(self.value)

    def subs(self, mapping: dict) -> "RationalExpr":
        images = [mapping[i].value if i in mapping else _A_GENS[i] for i in range(3)]
        # evaluate numerator and denominator polynomials at the images
        return RationalExpr(_poly_at(self.value.numer, images) / _poly_at(self.value.denom, images))

    def laurent_after_subs(self, mapping: dict) -> bool:
        """Whether ``subs(mapping)`` is Laurent, without reducing the result.

        The unreduced image is ``P / Q``. With the monomial part of ``Q``
        stripped, the remaining factor ``Q0`` is coprime to every monomial, so
        the image is Laurent exactly when ``Q0`` divides ``P``.
        """
        images = [mapping[i].value if i in mapping else _A_GENS[i] for i in range(3)]
        pn, pd = _poly_image(self.value.numer, images)
        qn, qd = _poly_image(self.value.denom, images)
        num, den = pn * qd, qn * pd
        q0 = _strip_monomial(den)
        return q0.is_ground or not (num % q0)

    def numer_denom(self) -> tuple:
        return self.value.numer.as_expr(), self.value.denom.as_expr()

    def is_laurent(self) -> bool:
        """Denominator is a monomial in the A-variables."""
        return len(self.value.denom.terms()) == 1

    def __repr__(self) -> str:
        return f"RationalExpr({self.expr})"


def _poly_image(p, images) -> tuple:
    """``p(images)`` as an unreduced numerator and denominator polynomial."""
    ring = _A_FIELD.ring
    degs = [max((e[i] for e in p.monoms()), default=0) for i in range(3)]
    nums = [g.numer for g in images]
    dens = [g.denom for g in images]
    num_pows = [[ring.one] for _ in range(3)]
    den_pows = [[ring.one] for _ in range(3)]
    for i in range(3):
        for _ in range(degs[i]):
            num_pows[i].append(num_pows[i][-1] * nums[i])
            den_pows[i].append(den_pows[i][-1] * dens[i])
    total = ring.zero
    for e, c in p.terms():
        term = ring(c)
        for i in range(3):
            term *= num_pows[i][e[i]] * den_pows[i][degs[i] - e[i]]
        total += term
    common = ring.one
    for i in range(3):
        common *= den_pows[i][degs[i]]
    return total, common


def _strip_monomial(q):
    low = [min(e[i] for e in q.monoms()) for i in range(3)]
    return q.ring.from_dict({tuple(a - b for a, b in zip(e, low)): c for e, c in q.terms()})


def _poly_at(p, images):
    total = _A_FIELD.zero
    for exps, c in p.terms():
        term = _A_FIELD(c)
        for g, e in zip(images, exps):
            if e:
                term *= g**e
        total += term
    return total


def eta() -> RationalExpr:
    return RationalExpr((A1**2 + A2**2 + A3**2) / (A1 * A2 * A3))


def mutate_A(k: int, f: RationalExpr) -> RationalExpr:
    """``μ_k*``: ``A_k -> (A_{k+1}^2 + A_{k+2}^2) / A_k`` (0-based, cyclic)."""
    a, b = A_VARS[(k + 1) % 3], A_VARS[(k + 2) % 3]
    return f.subs({k: RationalExpr((a**2 + b**2) / A_VARS[k])})


def alpha_star(f: RationalExpr) -> RationalExpr:
    """``α*``: ``A_i -> A_i η^2``."""
    e2 = eta() ** 2
    return f.subs({i: RationalExpr.var(i) * e2 for i in range(3)})


def alpha_inverse_star(f: RationalExpr) -> RationalExpr:
    """``(α⁻¹)*``; solves ``(α⁻¹)* ∘ α* = id`` on the generators.

    Since ``α*(η) = η⁻¹``, the substitution ``A_i -> A_i η^2`` is its own
    inverse.
    """
    return alpha_star(f)


def alpha_gluing() -> dict:
    """Checks of the gluing identities; every entry should be ``True``."""
    e = eta()
    out = {}
    for k in range(3):
        out[f"mu{k + 1}_eta"] = mutate_A(k, e) == e
        for i in range(3):
            ai = RationalExpr.var(i)
            out[f"alpha_mu{k + 1}_A{i + 1}"] = alpha_star(mutate_A(k, ai)) == mutate_A(k, alpha_star(ai))
    out["alpha_inv_eta"] = alpha_inverse_star(e) == e ** -1
    for i in range(3):
        ai = RationalExpr.var(i)
        out[f"alpha_inv_alpha_A{i + 1}"] = alpha_inverse_star(alpha_star(ai)) == ai
    return out


def monomial_in_eta(a: Sequence[int], b: int) -> RationalExpr:
    return RationalExpr(A1 ** a[0] * A2 ** a[1] * A3 ** a[2]) * eta() ** b


def regular_on_chart(f: RationalExpr) -> bool:
    """Laurent in the A-variables (regular on the torus chart)."""
    return f.is_laurent()


def up_membership(a: Sequence[int], b: int) -> bool:
    """Whether ``A^a η^b`` is regular on both charts ``T^+`` and ``T^-``.

    Uses the closed criterion ``2(a1 + a2 + a3) >= b >= 0``.
    """
    return b >= 0 and 2 * sum(a) >= b


def up_membership_direct(a: Sequence[int], b: int) -> bool:
    """The same membership by testing the Laurent property on both charts."""
    f = monomial_in_eta(a, b)
    if not regular_on_chart(f):
        return False
    e2 = eta() ** 2
    return f.laurent_after_subs({i: RationalExpr.var(i) * e2 for i in range(3)})


def specialize(f: LaurentExpr, r: int = 3) -> RationalExpr:
    """A_prin expression to the A-variety: ``z^(m,n) -> A^m``."""
    total = 0
    for e, c in f.items():
        term = sympy.Integer(c)
        for i in range(r):
            term *= A_VARS[i] ** e[i]
        total += term
    return RationalExpr(total)
