"""Independent reference computations used by the tests."""

from fractions import Fraction

import numpy as np
import sympy
from scipy.optimize import linear_sum_assignment


def exact_google_matrix(graph, alpha=Fraction(17, 20)):
    """Google matrix with exact rational entries (default alpha = 0.85)."""
    n = graph.n_nodes
    kout = graph.out_degrees
    links = set(graph.edges())
    g = [[(1 - alpha) / n for _ in range(n)] for _ in range(n)]
    for j in range(n):
        for i in range(n):
            if kout[j] == 0:
                g[i][j] += alpha / n
            elif (j, i) in links:
                g[i][j] += alpha / int(kout[j])
    return g


def charpoly_cofactor(a):
    """Coefficients (low to high) of det(x I - A) by Laplace expansion along rows."""
    n = len(a)

    def add(p, q):
        m = max(len(p), len(q))
        return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(m)]

    def mul(p, q):
        r = [0] * (len(p) + len(q) - 1)
        for i, x in enumerate(p):
            for j, y in enumerate(q):
                r[i + j] += x * y
        return r

    def det(rows, cols):
        if not rows:
            return [Fraction(1)]
        i, total = rows[0], [Fraction(0)]
        for k, c in enumerate(cols):
            entry = [-a[i][c]] + ([Fraction(1)] if i == c else [])
            term = mul(entry, det(rows[1:], cols[:k] + cols[k + 1:]))
            total = add(total, [-t for t in term] if k % 2 else term)
        return total

    return det(list(range(n)), list(range(n)))


def exact_roots(coeffs, digits=30):
    """Roots with multiplicity via square-free factorization and high-precision root finding."""
    x = sympy.Symbol("x")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(coeffs)], x)
    roots = []
    for factor, mult in sympy.sqf_list(poly)[1]:
        rs = sympy.Poly(factor, x).nroots(n=digits, maxsteps=500)
        roots += [complex(r) for r in rs] * mult
    return np.array(roots, dtype=complex)


def match_distance(a, b):
    """Largest distance under the optimal one-to-one matching of two multisets."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    d = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(d)
    return float(d[r, c].max())
