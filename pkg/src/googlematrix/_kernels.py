"""Compiled kernels for the dense eigensolver.

``hqr`` is the EISPACK/Numerical Recipes Francis double-shift QR on a real
upper Hessenberg matrix; ``hess_lu``/``hess_solve`` factor and solve shifted
Hessenberg systems for inverse iteration.
"""

import numpy as np
from numba import njit

EPS = np.finfo(np.float64).eps


@njit(cache=True)
def _sign(a, b):
    return abs(a) if b >= 0.0 else -abs(a)


@njit(cache=True)
def hqr(a, max_sweeps):
    """Eigenvalues of upper Hessenberg ``a`` (overwritten).

    Returns ``(wr, wi, status, lo, hi)``; ``status`` is 0 on success, else the
    active block ``[lo, hi]`` that failed to deflate within ``max_sweeps``.
    """
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += abs(a[i, j])
    nn = n - 1
    t = 0.0
    sweeps = 0
    x = y = z = w = p = q = r = s = 0.0
    while nn >= 0:
        its = 0
        while True:
            # look for a single small subdiagonal element
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                # relative test, with a norm-wise floor for near-zero diagonals
                if abs(a[l, l - 1]) <= EPS * s or abs(a[l, l - 1]) <= EPS * anorm:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = np.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + _sign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = z
                    wi[nn] = -z
                nn -= 2
                break
            if sweeps >= max_sweeps:
                return wr, wi, 1, l, nn
            if its > 0 and its % 10 == 0:
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            sweeps += 1
            # two consecutive small subdiagonals
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= EPS * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            # bulge chase
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = _sign(np.sqrt(p * p + q * q + r * r), p)
                if s != 0.0:
                    if k == m:
                        if l != m:
                            a[k, k - 1] = -a[k, k - 1]
                    else:
                        a[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    for j in range(k, nn + 1):
                        p = a[k, j] + q * a[k + 1, j]
                        if k != nn - 1:
                            p += r * a[k + 2, j]
                            a[k + 2, j] -= p * z
                        a[k + 1, j] -= p * y
                        a[k, j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * a[i, k] + y * a[i, k + 1]
                        if k != nn - 1:
                            p += z * a[i, k + 2]
                            a[i, k + 2] -= p * r
                        a[i, k + 1] -= p * q
                        a[i, k] -= p
            if l >= nn - 1:
                break
    return wr, wi, 0, 0, 0


@njit(cache=True)
def hess_lu(h, sigma, lu, piv, mult, tiny):
    """LU of ``h - sigma I`` (upper Hessenberg) with adjacent-row pivoting.

    ``lu`` receives U in its upper triangle; row swaps and multipliers go to
    ``piv`` and ``mult``. Zero pivots are replaced by ``tiny``.
    """
    n = h.shape[0]
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            lu[i, j] = h[i, j]
        lu[i, i] -= sigma
    for k in range(n - 1):
        if abs(lu[k + 1, k]) > abs(lu[k, k]):
            piv[k] = True
            for j in range(k, n):
                tmp = lu[k, j]
                lu[k, j] = lu[k + 1, j]
                lu[k + 1, j] = tmp
        else:
            piv[k] = False
        if lu[k, k] == 0:
            lu[k, k] = tiny
        f = lu[k + 1, k] / lu[k, k]
        mult[k] = f
        lu[k + 1, k] = 0.0
        if f != 0:
            for j in range(k + 1, n):
                lu[k + 1, j] -= f * lu[k, j]
    if lu[n - 1, n - 1] == 0:
        lu[n - 1, n - 1] = tiny


@njit(cache=True)
def hess_solve(lu, piv, mult, x):
    """Solve in place with factors from :func:`hess_lu`."""
    n = lu.shape[0]
    for k in range(n - 1):
        if piv[k]:
            tmp = x[k]
            x[k] = x[k + 1]
            x[k + 1] = tmp
        x[k + 1] -= mult[k] * x[k]
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for j in range(i + 1, n):
            acc -= lu[i, j] * x[j]
        x[i] = acc / lu[i, i]


@njit(cache=True)
def hess_residual(h, lam, x):
    """``||h x - lam x||_2`` for upper Hessenberg ``h``."""
    n = h.shape[0]
    tot = 0.0
    for i in range(n):
        acc = -lam * x[i]
        for j in range(max(i - 1, 0), n):
            acc += h[i, j] * x[j]
        tot += acc.real * acc.real + acc.imag * acc.imag
    return np.sqrt(tot)
