"""Broken lines and theta functions in rank-2 diagrams.

A broken line carries monomials ``c z^(m,n)`` and moves with velocity ``-m``.
Crossing a wall with normal ``n0`` it may replace its monomial by a term of
``z^(m,n) * f^{|<n0, m>|}``; choosing the term of degree ``j`` adds
``j * ({n0, .}, n0)`` to the exponent.

Enumeration runs backwards from the endpoint Q.  The total N-increment ``ν``
of a line with degree at most ``k`` fixes its final exponent
``p0 + ({ν, .}, ν)``, so for each candidate ``ν`` we trace the straight ray
``Q + t m`` back through the diagram and, at each wall, either pass or undo a
bend that consumes part of ``ν``.  A line is complete when the ray escapes to
infinity with ``ν`` used up.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .lattice_core import Seed
from .poly import LaurentExpr, MonomialMap, series_mul, series_power
from .scattering import (
    A_RING,
    NonGenericError,
    PathProduct,
    ScatteringDiagram,
    complete_rank2,
    initial_diagram,
    nterms_for,
)


class TruncationError(ArithmeticError):
    """A path-product value did not stabilize when the order was raised."""


@dataclass(frozen=True)
class Bend:
    n0: tuple[int, ...]
    j: int
    point: tuple[Fraction, ...]
    factor: int


@dataclass(frozen=True)
class BrokenLine:
    """Exponents and coefficients per segment, first to last."""

    exponents: tuple[tuple[int, ...], ...]
    coefficients: tuple[int, ...]
    bends: tuple[Bend, ...]
    endpoint: tuple[Fraction, ...]

    @property
    def initial(self) -> tuple[int, ...]:
        return self.exponents[0]

    @property
    def final(self) -> tuple[int, ...]:
        return self.exponents[-1]

    @property
    def coefficient(self) -> int:
        return self.coefficients[-1]

    def monomial(self) -> LaurentExpr:
        return LaurentExpr.monomial(self.final, self.coefficient)

    def validate(self, d: ScatteringDiagram) -> None:
        """Check the bend invariants against ``d``."""
        seed = d.seed
        r = seed.rank
        if self.coefficients[0] != 1:
            raise AssertionError("first segment must have coefficient 1")
        for b, before, after in zip(self.bends, self.exponents, self.exponents[1:]):
            walls = [w for w in d.nontrivial() if w.n0 == b.n0 and w.support.contains(b.point)]
            if not walls:
                raise AssertionError(f"bend at {b.point} is not on a wall with normal {b.n0}")
            step = tuple(seed.p_star(b.n0)) + b.n0
            if tuple(x + b.j * s for x, s in zip(before, step)) != after:
                raise AssertionError("bend exponent mismatch")
            if sum(after[r:]) <= sum(before[r:]):
                raise AssertionError("bend must raise the degree")

    def to_json(self) -> dict:
        return {
            "exponents": [list(e) for e in self.exponents],
            "coefficients": [str(c) for c in self.coefficients],
            "bends": [{"n0": list(b.n0), "j": b.j, "point": [str(x) for x in b.point]} for b in self.bends],
        }


@dataclass(frozen=True)
class ThetaExpansion:
    poly: LaurentExpr
    p0: tuple[int, ...]
    Q: tuple[Fraction, ...]
    order: int
    lines: tuple[BrokenLine, ...]

    def is_positive(self) -> bool:
        return self.poly.is_positive()

    def to_json(self) -> dict:
        return {
            "p0": list(self.p0),
            "Q": [str(x) for x in self.Q],
            "order": self.order,
            "lines": len(self.lines),
            "poly": self.poly.to_json(),
        }


def _full_exponent(p0: Sequence[int], r: int) -> tuple[int, ...]:
    p0 = tuple(int(x) for x in p0)
    if len(p0) == r:
        return p0 + (0,) * r
    if len(p0) != 2 * r:
        raise ValueError(f"initial exponent must have length {r} or {2 * r}")
    return p0


def check_generic_endpoint(d: ScatteringDiagram, Q: Sequence) -> tuple[Fraction, ...]:
    Q = tuple(Fraction(x) for x in Q)
    if len(Q) != d.rank:
        raise ValueError("endpoint has the wrong dimension")
    for w in d.nontrivial():
        if d.seed.pairing(w.n0, Q) == 0:
            raise NonGenericError(f"endpoint {Q} lies on the hyperplane of normal {w.n0}")
    return Q


def _wall_hits(d: ScatteringDiagram, x: tuple, m: tuple) -> list[tuple[Fraction, tuple[int, ...], tuple[int, ...]]]:
    """Walls met by the open ray ``x + t m``, ``t > 0``: ``(t, n0, coeffs)`` grouped."""
    seed = d.seed
    hits: dict[Fraction, dict[tuple[int, ...], list[int]]] = {}
    for w in d.nontrivial():
        dm = seed.pairing(w.n0, m)
        if dm == 0:
            continue
        t = -seed.pairing(w.n0, x) / dm
        if t <= 0:
            continue
        pt = tuple(a + t * b for a, b in zip(x, m))
        if not w.support.contains(pt):
            continue
        if not w.support.in_relative_interior(pt):
            raise NonGenericError(f"broken line meets a wall boundary at {pt}")
        group = hits.setdefault(t, {})
        nt = nterms_for(d.order, w.n0)
        group[w.n0] = series_mul(group.get(w.n0, [1]), w.coeffs, nt)
    out = []
    for t in sorted(hits):
        group = hits[t]
        if len(group) > 1:
            raise NonGenericError("broken line passes through a joint")
        (n0, coeffs), = group.items()
        out.append((t, n0, tuple(coeffs)))
    return out


def enumerate_broken_lines(d: ScatteringDiagram, p0: Sequence[int], Q: Sequence, k: int | None = None) -> list[BrokenLine]:
    """All broken lines with initial exponent ``p0`` ending at ``Q`` with
    N-degree increase at most ``k``."""
    seed = d.seed
    if seed.rank != 2:
        raise ValueError("broken lines are implemented for rank-2 diagrams")
    r = seed.rank
    k = d.order if k is None else k
    p0 = _full_exponent(p0, r)
    if not any(p0):
        raise ValueError("initial exponent must be nonzero")
    Q = check_generic_endpoint(d, Q)
    lines: list[BrokenLine] = []
    pw_cache: dict = {}

    def coeff(coeffs, e, j):
        key = (coeffs, e, j)
        if key not in pw_cache:
            pw_cache[key] = series_power(coeffs, e, j + 1)[j]
        return pw_cache[key]

    def trace(x, exp, remaining, rev_exps, rev_coefs, rev_bends):
        m = exp[:r]
        if not any(m):
            # a segment with zero velocity never moves: only the trivial line
            if not any(remaining):
                lines.append(_assemble(rev_exps, rev_coefs, rev_bends, Q))
            return
        hits = _wall_hits(d, x, m)
        if not hits:
            if not any(remaining):
                lines.append(_assemble(rev_exps, rev_coefs, rev_bends, Q))
            return
        for idx, (t, n0, coeffs) in enumerate(hits):
            pt = tuple(a + t * b for a, b in zip(x, m))
            e = abs(seed.pairing(n0, m))
            step = tuple(seed.p_star(n0)) + n0
            j = 1
            while all(rem - j * a >= 0 for rem, a in zip(remaining, n0)):
                c = coeff(coeffs, e, j)
                if c:
                    prev = tuple(a - j * s for a, s in zip(exp, step))
                    new_rem = tuple(rem - j * a for rem, a in zip(remaining, n0))
                    trace(
                        pt,
                        prev,
                        new_rem,
                        rev_exps + [prev],
                        rev_coefs + [c],
                        rev_bends + [Bend(n0, j, pt, c)],
                    )
                j += 1
        # passing every wall without bending is the straight continuation
        if not any(remaining):
            lines.append(_assemble(rev_exps, rev_coefs, rev_bends, Q))

    for nu in product(range(k + 1), repeat=r):
        if sum(nu) > k:
            continue
        final = tuple(a + b for a, b in zip(p0, tuple(seed.p_star(nu)) + nu))
        trace(Q, final, nu, [final], [], [])
    lines.sort(key=lambda ln: (ln.final, len(ln.bends)))
    return lines


def _assemble(rev_exps, rev_factors, rev_bends, Q) -> BrokenLine:
    exps = tuple(reversed(rev_exps))
    factors = list(reversed(rev_factors))
    coefs = [1]
    for f in factors:
        coefs.append(coefs[-1] * f)
    return BrokenLine(exps, tuple(coefs), tuple(reversed(rev_bends)), Q)


def theta_expand(
    d: ScatteringDiagram, p0: Sequence[int], Q: Sequence, k: int | None = None, embed: MonomialMap | None = None
) -> ThetaExpansion:
    """Sum of final monomials of all broken lines; ``embed`` maps the result."""
    k = d.order if k is None else k
    p0f = _full_exponent(p0, d.rank)
    if not any(p0f):
        # ϑ_0 = 1, with no broken lines
        check_generic_endpoint(d, Q)
        lines, poly = [], LaurentExpr.one(2 * d.rank)
    else:
        lines = enumerate_broken_lines(d, p0, Q, k)
        poly = LaurentExpr.zero(2 * d.rank)
        for ln in lines:
            poly = poly + ln.monomial()
    if embed is not None:
        poly = embed(poly)
        p0f = embed.image(p0f)
    return ThetaExpansion(poly, p0f, tuple(Fraction(x) for x in Q), k, tuple(lines))


def theta_via_path_product(p: PathProduct, p0: Sequence[int], k: int = 8, step: int = 4, max_order: int = 64) -> LaurentExpr:
    """Apply a finite path product to ``z^{p0}`` until the value stabilizes."""
    if p.ring != A_RING:
        raise ValueError("theta values live in the A_prin ring")
    z = LaurentExpr.monomial(_full_exponent(p0, p.seed.rank))
    prev = p.apply(z, k)
    order = k
    while order < max_order:
        order += step
        cur = p.apply(z, order)
        if cur == prev:
            return cur
        prev = cur
    raise TruncationError(f"path product did not stabilize up to order {order}")


def structure_constant(
    d: ScatteringDiagram, p: Sequence[int], q: Sequence[int], r: Sequence[int], Q: Sequence | None = None, offset: Sequence | None = None
) -> int:
    """``α(p, q, r)``: pairs of broken lines for ``p`` and ``q`` ending at a
    common general point near ``r`` whose final exponents add to ``r``."""
    rank = d.rank
    p, q, r = (_full_exponent(v, rank) for v in (p, q, r))
    if not any(p) or not any(q):
        return int(tuple(a + b for a, b in zip(p, q)) == r)
    budget = sum(r[rank:]) - sum(p[rank:]) - sum(q[rank:])
    if budget < 0:
        return 0
    if Q is None:
        off = offset or (Fraction(1, 10**6 + 3), Fraction(1, 10**6 + 33))
        Q = tuple(Fraction(a) + Fraction(b) for a, b in zip(r[:rank], off))
    l1 = enumerate_broken_lines(d, p, Q, budget)
    l2 = enumerate_broken_lines(d, q, Q, budget)
    total = 0
    for a in l1:
        for b in l2:
            if tuple(x + y for x, y in zip(a.final, b.final)) == r:
                total += a.coefficient * b.coefficient
    return total


# Markov thetas through a rank-2 sub-diagram


def rank2_subseed(s: Seed, i: int, j: int) -> Seed:
    """The seed on the indices ``i, j`` (0-based) of ``s``."""
    skew = [[s.skew[i][i], s.skew[i][j]], [s.skew[j][i], s.skew[j][j]]]
    return Seed(skew, [s.d[i], s.d[j]], [], [s.labels[i], s.labels[j]])


def subseed_embedding(s: Seed, i: int, j: int) -> MonomialMap:
    """Exponent embedding of the rank-2 sub-seed's A_prin lattice into ``s``'s.

    ``(m_i, m_j, n_i, n_j)`` goes to the vector with those M- and N-entries
    and remaining M-entries ``Σ_x n_x ε_{x c}`` so that ``({n, .}, n)`` maps
    to ``({n, .}, n)``.
    """
    r = s.rank
    eps = s.exchange_matrix
    rows = [[0, 0, 0, 0] for _ in range(2 * r)]
    rows[i][0] = 1
    rows[j][1] = 1
    for c in range(r):
        if c in (i, j):
            continue
        rows[c][2] = eps[i][c]
        rows[c][3] = eps[j][c]
    rows[r + i][2] = 1
    rows[r + j][3] = 1
    return MonomialMap(rows, 4)


GENERIC_Q = (Fraction(1009, 997), Fraction(1013, 991))


def markov_theta(s: Seed, i: int, k: int = 6, Q: Sequence | None = None) -> ThetaExpansion:
    """``ϑ_{(f_i - f_{i+1}, 0)}`` at a general point of the positive chamber.

    Computed by broken lines in the completed diagram of the sub-seed on the
    indices ``i, i+1`` (0-based, cyclic) and embedded into ``s``'s lattice.
    """
    r = s.rank
    j = (i + 1) % r
    sub = rank2_subseed(s, i, j)
    d = complete_rank2(initial_diagram(sub, k), k)
    return theta_expand(d, (1, -1, 0, 0), Q or GENERIC_Q, k, subseed_embedding(s, i, j))


def theta_report(t: ThetaExpansion) -> str:
    return json.dumps(t.to_json(), sort_keys=True)
