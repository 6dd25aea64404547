"""Published polynomials used as fixed reference data.

Each polynomial is a list of ``(coefficient, exponent)`` pairs in the
variables ``x_1, ..., x_r`` with ``x_j = z^({e_j, .}, e_j)``.
"""

from __future__ import annotations

from typing import Sequence

from .lattice_core import Seed
from .poly import LaurentExpr

S24_GREEN_SEQUENCE = (1, 3, 2, 4, 6, 5, 1, 6, 4, 3, 2, 5)

# F for z^(f_1, 0) on the six-index seed
F_S24 = [
    (1, (0, 0, 0, 0, 0, 0)),
    (1, (1, 0, 0, 0, 0, 0)),
    (1, (1, 0, 1, 0, 0, 0)),
    (1, (1, 0, 0, 0, 0, 1)),
    (1, (1, 0, 1, 0, 0, 1)),
    (1, (1, 0, 1, 0, 1, 1)),
    (1, (1, 1, 1, 0, 0, 1)),
    (1, (1, 1, 1, 0, 1, 1)),
    (1, (2, 1, 1, 0, 1, 1)),
]

# the folded F, in w_1, w_2, w_3
F_BAR = [
    (1, (0, 0, 0)),
    (1, (1, 0, 0)),
    (2, (1, 0, 1)),
    (1, (1, 0, 2)),
    (2, (1, 1, 2)),
    (1, (1, 2, 2)),
    (1, (2, 2, 2)),
]

G_BAR = [
    (1, (0, 0, 0)),
    (1, (1, 0, 0)),
    (2, (1, 1, 0)),
    (1, (1, 2, 0)),
    (2, (1, 2, 1)),
    (1, (1, 2, 2)),
    (1, (2, 2, 2)),
]


def x_monomial(seed: Seed, a: Sequence[int], coef: int = 1) -> LaurentExpr:
    """``c · x^a`` in the A_prin ring of ``seed``."""
    r = seed.rank
    m = [0] * r
    for j, aj in enumerate(a):
        if aj:
            row = seed.p_star(tuple(int(i == j) for i in range(r)))
            m = [u + aj * v for u, v in zip(m, row)]
    return LaurentExpr.monomial(tuple(m) + tuple(a), coef)


def x_polynomial(seed: Seed, terms: Sequence[tuple[int, Sequence[int]]]) -> LaurentExpr:
    out = LaurentExpr.zero(2 * seed.rank)
    for c, a in terms:
        out = out + x_monomial(seed, a, c)
    return out


def as_x_polynomial(seed: Seed, f: LaurentExpr) -> list[tuple[int, tuple[int, ...]]]:
    """Inverse of :func:`x_polynomial`; raises if ``f`` is not a polynomial in the ``x_j``."""
    r = seed.rank
    out = []
    for e, c in f.items():
        a = e[r:]
        if any(v < 0 for v in a) or x_monomial(seed, a).terms != {tuple(e): 1}:
            raise ValueError(f"term {e} is not a monomial in the x variables")
        out.append((c, tuple(a)))
    return sorted(out, key=lambda t: (sum(t[1]), t[1]))
