"""Independent reference computations used by the tests.

Nothing here imports the wall-crossing code: cluster variables come from the
exchange relation with principal coefficients, matrix mutation from the
closed formula, and wall crossings from sympy substitutions.
"""

from __future__ import annotations

import sympy


def mutate_matrix_formula(b, k):
    """``b'_ij = -b_ij`` if ``k in (i, j)``, else ``b_ij + (|b_ik| b_kj + b_ik |b_kj|) / 2``."""
    n = len(b)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if k in (i, j):
                out[i][j] = -b[i][j]
            else:
                out[i][j] = b[i][j] + (abs(b[i][k]) * b[k][j] + b[i][k] * abs(b[k][j])) // 2
    return out


def principal_cluster(b, seq):
    """Cluster variables after mutating ``x_1..x_n`` with principal coefficients.

    ``b`` is the exchange matrix with ``b[i][j] = ε_ij``; the coefficient
    rows start as the identity.  ``seq`` is 0-based.  Returns the cluster,
    the extended matrix and the symbols ``(x, y)``.
    """
    n = len(b)
    x = sympy.symbols(f"x1:{n + 1}")
    y = sympy.symbols(f"y1:{n + 1}")
    bt = [list(row) for row in b] + [[int(i == j) for j in range(n)] for i in range(n)]
    cluster = list(x)
    for k in seq:
        plus = sympy.Integer(1)
        minus = sympy.Integer(1)
        for i in range(2 * n):
            var = cluster[i] if i < n else y[i - n]
            if bt[i][k] > 0:
                plus *= var ** bt[i][k]
            elif bt[i][k] < 0:
                minus *= var ** (-bt[i][k])
        cluster[k] = sympy.factor(sympy.cancel((plus + minus) / cluster[k]))
        new = [[0] * n for _ in range(2 * n)]
        for i in range(2 * n):
            for j in range(n):
                if k in (i, j):
                    new[i][j] = -bt[i][j]
                else:
                    new[i][j] = bt[i][j] + (abs(bt[i][k]) * bt[k][j] + bt[i][k] * abs(bt[k][j])) // 2
        bt = new
    return cluster, bt, x, y


def f_polynomials(b, seq):
    """F-polynomials of the final cluster, as sympy polynomials in ``y``."""
    cluster, bt, x, y = principal_cluster(b, seq)
    ones = {v: 1 for v in x}
    return [sympy.expand(sympy.cancel(c.subs(ones))) for c in cluster], bt, y


def x_crossing(pair, n0, sign, nvars):
    """Substitution ``z^e -> z^e (1 + z^{n0})^{sign {e, n0}}`` on generators."""
    z = sympy.symbols(f"z1:{nvars + 1}")
    zn0 = sympy.Mul(*[z[i] ** n0[i] for i in range(nvars)])
    subs = {}
    for i in range(nvars):
        e = [int(j == i) for j in range(nvars)]
        subs[z[i]] = z[i] * (1 + zn0) ** (sign * pair(e, n0))
    return subs, z


def compose_substitutions(steps, z):
    """Apply the substitutions in order; returns the images of the generators."""
    images = list(z)
    for subs in steps:
        images = [sympy.cancel(im.subs(subs, simultaneous=True)) for im in images]
    return images
