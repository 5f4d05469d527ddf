"""Full complex spectra and right eigenvectors of dense Google matrices.

Eigenvalues come from balancing, Householder reduction to Hessenberg form
and the implicit double-shift QR iteration, either through LAPACK (``dgeev``,
the default) or the compiled in-package Francis kernel. Right eigenvectors
are obtained by inverse iteration on the Hessenberg form and checked against
the original matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import _kernels
from .gmatrix import dense_cap

__all__ = [
    "LAMBDA_FLOOR",
    "SpectrumError",
    "Eigenpair",
    "SpectrumResult",
    "balance",
    "merge_clusters",
    "hessenberg",
    "full_spectrum",
    "eigenvectors",
    "residual",
    "write_spectrum_csv",
]

LAMBDA_FLOOR = 1e-8


class SpectrumError(RuntimeError):
    """QR iteration failed to converge."""


@dataclass
class Eigenpair:
    lam: complex
    psi: np.ndarray
    residual: float
    verified: bool = True

    @property
    def gamma(self) -> float:
        a = abs(self.lam)
        return float(-2.0 * np.log(a)) if a > 0 else float("inf")


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    lambda_floor: float = LAMBDA_FLOOR
    pairs: list[Eigenpair] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def zero_mask(self) -> np.ndarray:
        return np.abs(self.eigenvalues) < self.lambda_floor

    @property
    def zero_count(self) -> int:
        return int(self.zero_mask.sum())

    @property
    def zero_fraction(self) -> float:
        return self.zero_count / self.n

    @property
    def retained(self) -> np.ndarray:
        return self.eigenvalues[~self.zero_mask]


def _sort_eigenvalues(lam: np.ndarray) -> np.ndarray:
    # descending modulus, then real part, then imaginary part
    order = np.lexsort((-lam.imag, -lam.real, -np.abs(lam)))
    return lam[order]


def merge_clusters(lam: np.ndarray, scale: float, max_size: int = 6, isolation: float = 10.0) -> np.ndarray:
    """Replace tight, isolated eigenvalue clusters by their mean.

    A ``k``-fold defective eigenvalue is computed only to about
    ``(eps * scale) ** (1/k)``, spread over a small ring, while the cluster mean
    stays accurate to ``O(eps * scale)``. A group of ``2 <= k <= max_size``
    values is merged when its diameter is at most ``10 (k eps scale)**(1/k)``
    and no other eigenvalue lies within ``isolation`` times that diameter.
    Merged real-axis clusters get an exactly zero imaginary part.
    """
    lam = np.array(lam, dtype=complex)
    n = lam.size
    if n < 2:
        return lam
    from scipy.sparse.csgraph import connected_components
    from scipy.spatial import cKDTree

    eps = np.finfo(float).eps
    pts = np.column_stack([lam.real, lam.imag])
    tree = cKDTree(pts)
    done = np.zeros(n, dtype=bool)
    for k in range(2, max_size + 1):
        radius = 10.0 * (k * eps * scale) ** (1.0 / k)
        pairs = tree.query_pairs(radius, output_type="ndarray")
        if pairs.size == 0:
            continue
        adj = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
        _, labels = connected_components(adj, directed=False)
        sizes = np.bincount(labels)
        for lab in np.flatnonzero((sizes >= 2) & (sizes <= k)):
            idx = np.flatnonzero(labels == lab)
            if done[idx].any():
                continue
            c = lam[idx]
            diam = float(np.max(np.abs(c[:, None] - c[None, :])))
            if diam > 10.0 * (idx.size * eps * scale) ** (1.0 / idx.size):
                continue
            centre = c.mean()
            near = tree.query_ball_point([centre.real, centre.imag], isolation * diam + diam)
            if len(near) > idx.size:
                continue
            if np.min(c.imag) <= 0.0 <= np.max(c.imag) and abs(centre.imag) <= diam:
                centre = complex(centre.real, 0.0)
            lam[idx] = centre
            done[idx] = True
    return lam


def balance(a: np.ndarray, radix: float = 2.0, max_sweeps: int = 100):
    """Diagonal similarity scaling ``D^-1 A D`` with powers of ``radix``.

    Returns ``(balanced, d)``; rows and columns are scaled until their
    off-diagonal norms agree within a factor of ``radix``.
    """
    b = np.array(a, dtype=float, copy=True)
    n = b.shape[0]
    d = np.ones(n)
    sqrdx = radix * radix
    for _ in range(max_sweeps):
        done = True
        for i in range(n):
            c = np.abs(b[:, i]).sum() - abs(b[i, i])
            r = np.abs(b[i, :]).sum() - abs(b[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                b[i, :] /= f
                b[:, i] *= f
                d[i] *= f
        if done:
            break
    return b, d


def hessenberg(a: np.ndarray, calc_q: bool = False):
    """Householder reduction ``Q^T A Q = H``.

    Returns ``H`` or ``(H, Q)``.
    """
    h = np.array(a, dtype=float, copy=True)
    n = h.shape[0]
    q = np.eye(n) if calc_q else None
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
        if calc_q:
            q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
    return (h, q) if calc_q else h


def _francis_eigenvalues(g: np.ndarray, do_balance: bool) -> np.ndarray:
    a = balance(g)[0] if do_balance else np.array(g, dtype=float)
    h = np.ascontiguousarray(hessenberg(a))
    n = h.shape[0]
    wr, wi, status, lo, hi = _kernels.hqr(h, 30 * max(n, 1))
    if status:
        raise SpectrumError(f"QR iteration stuck on active block [{lo}, {hi}] after {30 * n} sweeps")
    return wr + 1j * wi


def full_spectrum(g: np.ndarray, *, method: str = "lapack", balance_matrix: bool = True,
                  lambda_floor: float = LAMBDA_FLOOR, cap: int | None = None,
                  refine_clusters: bool = True) -> SpectrumResult:
    """All ``N`` eigenvalues of the real matrix ``g``.

    ``method`` is ``"lapack"`` or ``"francis"`` (in-package QR kernel).
    With ``refine_clusters`` tight isolated clusters (the footprint of
    defective eigenvalues) are collapsed to their mean, see
    :func:`merge_clusters`.
    Eigenvalues are returned by decreasing modulus; those below
    ``lambda_floor`` in modulus make up ``zero_count``.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if g.ndim != 2 or g.shape[1] != n:
        raise ValueError("matrix must be square")
    cap = dense_cap() if cap is None else cap
    if n > cap:
        raise ValueError(f"N = {n} exceeds the dense cap of {cap}")
    if method == "lapack":
        try:
            lam = sla.eigvals(g, check_finite=False, overwrite_a=False, homogeneous_eigvals=False) \
                if balance_matrix else _eigvals_nobalance(g)
        except sla.LinAlgError as exc:
            raise SpectrumError(f"LAPACK QR failed to converge: {exc}") from exc
    elif method == "francis":
        lam = _francis_eigenvalues(g, balance_matrix)
    else:
        raise ValueError(f"unknown method {method!r}")
    lam = np.asarray(lam, dtype=complex)
    if refine_clusters:
        lam = merge_clusters(lam, float(np.abs(g).sum(axis=0).max()) if n else 1.0)
    return SpectrumResult(_sort_eigenvalues(lam), lambda_floor)


def _eigvals_nobalance(g):
    h = sla.hessenberg(g)
    return sla.eigvals(h, check_finite=False)


def residual(g: np.ndarray, pair: Eigenpair) -> float:
    """``||G psi - lambda psi||_2`` recomputed from the dense matrix."""
    psi = np.asarray(pair.psi)
    return float(np.linalg.norm(g @ psi - pair.lam * psi))


def _phase_fix(x: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(x)))
    return x * (abs(x[k]) / x[k])


def eigenvectors(g: np.ndarray, lambdas: Iterable[complex], *, seed: int = 0,
                 threshold: float | None = None, min_iter: int = 2, max_iter: int = 5,
                 restarts: int = 3, cluster_tol: float = 1e-10) -> list[Eigenpair]:
    """Right eigenvectors for the given eigenvalues by inverse iteration.

    Works on the Hessenberg form ``H = Q^T G Q`` (O(N^2) per eigenvalue) with
    the shift ``lambda + 1e-13 ||G||_1``. Vectors of eigenvalues closer than
    ``cluster_tol`` are orthogonalized against each other. A pair whose
    residual stays above ``threshold`` (default ``1e-8 sqrt(N)``) after all
    restarts is returned with ``verified=False``.
    """
    g = np.asarray(g, dtype=float)
    lambdas = np.asarray(list(lambdas), dtype=complex)
    n = g.shape[0]
    if lambdas.size == 0:
        return []
    if threshold is None:
        threshold = 1e-8 * np.sqrt(n)
    gnorm = float(np.abs(g).sum(axis=0).max())
    delta = 1e-13 * gnorm
    tiny = np.finfo(float).eps * gnorm

    h, q = sla.hessenberg(g, calc_q=True, check_finite=False)
    h = np.ascontiguousarray(h)
    lu = np.empty((n, n), dtype=complex)
    piv = np.zeros(max(n - 1, 1), dtype=np.bool_)
    mult = np.zeros(max(n - 1, 1), dtype=complex)

    def start(index, attempt):
        rng = np.random.default_rng([seed, index, attempt])
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return x / np.linalg.norm(x)

    xs = np.empty((n, lambdas.size), dtype=complex)
    hres = np.empty(lambdas.size)
    seen: dict[complex, list[int]] = {}
    computed: list[int] = []

    for idx, lam in enumerate(lambdas):
        key = complex(lam)
        occurrence = len(seen.get(key, ()))
        partners = seen.get(key.conjugate(), ()) if lam.imag != 0 else ()
        seen.setdefault(key, []).append(idx)
        if occurrence < len(partners):
            partner = partners[occurrence]
            xs[:, idx] = np.conj(xs[:, partner])
            hres[idx] = hres[partner]
            continue
        cluster = [k for k in computed if abs(lambdas[k] - lam) < cluster_tol]
        basis = xs[:, cluster] if cluster else None
        _kernels.hess_lu(h, complex(lam) + delta, lu, piv, mult, tiny)
        best_x, best_r = None, np.inf
        for attempt in range(restarts + 1):
            x = start(idx, attempt)
            for it in range(max_iter):
                if basis is not None:
                    x -= basis @ (basis.conj().T @ x)
                _kernels.hess_solve(lu, piv, mult, x)
                if basis is not None:
                    x -= basis @ (basis.conj().T @ x)
                nrm = np.linalg.norm(x)
                if not np.isfinite(nrm) or nrm == 0.0:
                    break
                x /= nrm
                if it + 1 >= min_iter:
                    r = _kernels.hess_residual(h, complex(lam), x)
                    if r < best_r:
                        best_x, best_r = x.copy(), r
                    if r <= 0.1 * threshold:
                        break
            if best_r <= 0.1 * threshold:
                break
        if best_x is None:
            best_x = start(idx, 0)
            best_r = np.inf
        xs[:, idx] = best_x
        hres[idx] = best_r
        computed.append(idx)

    psi = q @ xs
    psi /= np.linalg.norm(psi, axis=0)
    res = np.linalg.norm(g @ psi - psi * lambdas, axis=0)
    pairs = []
    for k, lam in enumerate(lambdas):
        v = _phase_fix(psi[:, k])
        pairs.append(Eigenpair(complex(lam), v, float(res[k]), bool(res[k] <= threshold)))
    return pairs


def attach_eigenvectors(result: SpectrumResult, g: np.ndarray,
                        select: Callable[[np.ndarray], np.ndarray] | None = None, seed: int = 0,
                        **kwargs) -> SpectrumResult:
    """Fill ``result.pairs`` for retained eigenvalues passing ``select``.

    ``select`` maps the eigenvalue array to a boolean mask; by default every
    eigenvalue with modulus at or above the floor is used.
    """
    lam = result.eigenvalues
    mask = ~result.zero_mask
    if select is not None:
        mask &= np.asarray(select(lam), dtype=bool)
    # conjugate partners sit next to each other; compute Im >= 0 first
    chosen = lam[mask]
    order = np.lexsort((chosen.imag < 0,))
    result.pairs = eigenvectors(g, chosen[order], seed=seed, **kwargs)
    result.pairs.sort(key=lambda pr: (-abs(pr.lam), -pr.lam.real, -pr.lam.imag))
    return result


def gamma_window(lo: float, hi: float) -> Callable[[np.ndarray], np.ndarray]:
    """Selector for ``lo < -2 ln|lambda| < hi``, always keeping ``lambda = 1``."""
    def select(lam):
        a = np.abs(lam)
        with np.errstate(divide="ignore"):
            gam = -2.0 * np.log(a)
        keep = (gam > lo) & (gam < hi)
        keep[np.argmin(np.abs(lam - 1.0))] = True
        return keep
    return select


def write_spectrum_csv(result: SpectrumResult, stream: IO[str], realization: int | None = None,
                       header: bool = True):
    """Columns ``[realization,] re, im, abs, gamma, xi``; ``xi`` blank without a vector."""
    from .locstats import gamma_of, ipr  # local import keeps module layering flat

    xi_of = {}
    for pr in result.pairs:
        xi_of.setdefault(pr.lam, []).append(ipr(pr.psi))
    used: dict[complex, int] = {}
    w = csv.writer(stream, lineterminator="\n")
    cols = ["re", "im", "abs", "gamma", "xi"]
    if header:
        w.writerow((["realization"] if realization is not None else []) + cols)
    for lam in result.eigenvalues.tolist():
        a = abs(lam)
        gam = gamma_of(lam)
        xis = xi_of.get(lam)
        xi = ""
        if xis:
            k = used.get(lam, 0)
            if k < len(xis):
                xi = repr(float(xis[k]))
                used[lam] = k + 1
        row = [repr(lam.real), repr(lam.imag), repr(a), repr(gam) if np.isfinite(gam) else "inf", xi]
        w.writerow(([realization] if realization is not None else []) + row)
