"""Localization observables: IPR, relaxation rates, the density W(gamma),
IPR-vs-gamma curves, spectral gap, delocalization edge and finite-size
scaling fits ``xi ~ N**mu``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .gmatrix import DEFAULT_ALPHA
from .spectra import LAMBDA_FLOOR, Eigenpair, SpectrumResult

__all__ = [
    "GammaDensity",
    "IprCurve",
    "ScalingFit",
    "GapEstimate",
    "ipr",
    "gamma_of",
    "gamma_grid",
    "density_w",
    "density_zscores",
    "ipr_vs_gamma",
    "scaling_fit",
    "estimate_gap",
    "bin_slopes",
    "delocalization_edge",
]


def ipr(psi) -> float | np.ndarray:
    """Inverse participation ratio ``(sum |psi|^2)^2 / sum |psi|^4``.

    A 2-D input is treated as a stack of column vectors.
    """
    a2 = np.abs(np.asarray(psi)) ** 2
    s2 = a2.sum(axis=0)
    s4 = (a2 * a2).sum(axis=0)
    if np.any(s2 == 0):
        raise ValueError("IPR of a zero vector")
    out = s2 * s2 / s4
    return float(out) if np.ndim(out) == 0 else out


def gamma_of(lam) -> float | np.ndarray:
    """Relaxation rate ``-2 ln|lambda|``; ``inf`` for ``lambda = 0``."""
    a = np.abs(np.asarray(lam))
    with np.errstate(divide="ignore"):
        g = -2.0 * np.log(a)
    return float(g) if np.ndim(g) == 0 else g


def gamma_grid(bin_width: float = 0.25, gamma_max: float = 10.0) -> np.ndarray:
    nbins = gamma_max / bin_width
    if bin_width <= 0 or abs(nbins - round(nbins)) > 1e-9:
        raise ValueError("bin_width must be positive and divide gamma_max")
    return np.linspace(0.0, gamma_max, int(round(nbins)) + 1)


@dataclass(frozen=True)
class GammaDensity:
    bin_edges: np.ndarray
    w: np.ndarray
    counts: np.ndarray
    n_states: int
    excluded_zero_states: int
    excluded_beyond: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def stderr(self) -> np.ndarray:
        """Multinomial standard error of each bin density."""
        f = self.counts / self.n_states
        return np.sqrt(f * (1.0 - f) / self.n_states) / self.widths

    def to_csv(self, stream: IO[str], label=None, header: bool = True):
        w = csv.writer(stream, lineterminator="\n")
        lead = [] if label is None else [label]
        if header:
            w.writerow((["N"] if label is not None else []) + ["gamma_lo", "gamma_hi", "count", "W", "W_stderr"])
        for lo, hi, c, d, e in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts, self.w, self.stderr):
            w.writerow(lead + [repr(float(lo)), repr(float(hi)), int(c), repr(float(d)), repr(float(e))])


def density_w(eigenvalues, bin_width: float = 0.25, gamma_max: float = 10.0,
              lambda_floor: float = LAMBDA_FLOOR) -> GammaDensity:
    """Normalized histogram of ``gamma`` with unit integral over ``[0, gamma_max]``.

    States with ``|lambda| < lambda_floor`` are excluded and counted, as are
    states with ``gamma > gamma_max``. Pass pooled eigenvalues to average over
    realizations.
    """
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    a = np.abs(lam)
    zero = a < lambda_floor
    gam = gamma_of(lam[~zero])
    # |lambda| may exceed one by roundoff; those belong to gamma = 0
    gam = np.maximum(np.atleast_1d(gam), 0.0)
    inside = gam <= gamma_max
    if not inside.any():
        raise ValueError("no eigenvalue survives the floor and gamma_max cut")
    edges = gamma_grid(bin_width, gamma_max)
    counts, _ = np.histogram(gam[inside], bins=edges)
    n = int(inside.sum())
    return GammaDensity(edges, counts / (n * np.diff(edges)), counts, n, int(zero.sum()), int((~inside).sum()))


def density_zscores(a: GammaDensity, b: GammaDensity) -> np.ndarray:
    """Bin-wise ``(w_a - w_b) / sigma`` with multinomial errors; 0 where both bins are empty."""
    if not np.array_equal(a.bin_edges, b.bin_edges):
        raise ValueError("densities use different grids")
    sigma = np.hypot(a.stderr, b.stderr)
    diff = a.w - b.w
    z = np.zeros_like(diff)
    nz = sigma > 0
    z[nz] = diff[nz] / sigma[nz]
    # an occupied bin against an empty one with no variance on either side
    z[(~nz) & (diff != 0)] = np.inf
    return z


@dataclass(frozen=True)
class IprCurve:
    bin_edges: np.ndarray
    mean_xi: np.ndarray
    counts: np.ndarray

    def to_csv(self, stream: IO[str], label=None, header: bool = True):
        w = csv.writer(stream, lineterminator="\n")
        lead = [] if label is None else [label]
        if header:
            w.writerow((["N"] if label is not None else []) + ["gamma_lo", "gamma_hi", "n_pairs", "xi_mean"])
        for lo, hi, c, x in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts, self.mean_xi):
            w.writerow(lead + [repr(float(lo)), repr(float(hi)), int(c), "" if c == 0 else repr(float(x))])


def ipr_vs_gamma(pairs: SpectrumResult | Iterable[Eigenpair] | tuple[np.ndarray, np.ndarray],
                 bin_width: float = 0.25, gamma_max: float = 10.0, verified_only: bool = True) -> IprCurve:
    """Mean IPR per ``gamma`` bin; empty bins hold NaN.

    ``pairs`` is a spectrum with vectors, a list of eigenpairs, or a
    ``(gammas, xis)`` tuple of pooled values.
    """
    if isinstance(pairs, tuple):
        gam, xi = (np.asarray(v, dtype=float) for v in pairs)
    else:
        plist = pairs.pairs if isinstance(pairs, SpectrumResult) else list(pairs)
        if verified_only:
            plist = [p for p in plist if p.verified]
        gam = np.array([max(p.gamma, 0.0) for p in plist])
        xi = np.array([ipr(p.psi) for p in plist])
    edges = gamma_grid(bin_width, gamma_max)
    inside = (gam >= 0) & (gam <= gamma_max)
    idx = np.clip(np.searchsorted(edges, gam[inside], side="right") - 1, 0, edges.size - 2)
    counts = np.bincount(idx, minlength=edges.size - 1)
    sums = np.bincount(idx, weights=xi[inside], minlength=edges.size - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return IprCurve(edges, mean, counts)


@dataclass(frozen=True)
class ScalingFit:
    """``log10 xi = intercept + mu * log10 N``."""

    mu: float
    intercept: float
    stderr: float
    sizes: tuple[int, ...]

    def confidence_interval(self, level: float = 0.95) -> tuple[float, float]:
        dof = len(self.sizes) - 2
        half = stats.t.ppf(0.5 + level / 2.0, dof) * self.stderr if dof > 0 else math.inf
        return self.mu - half, self.mu + half


def scaling_fit(sizes: Sequence[int], xis: Sequence[float]) -> ScalingFit:
    sizes = [int(s) for s in sizes]
    xis = np.asarray(xis, dtype=float)
    if len(sizes) < 3:
        raise ValueError("scaling fit needs at least 3 sizes")
    if len(sizes) != xis.size:
        raise ValueError("sizes and xis differ in length")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    if np.any(xis <= 0) or not np.all(np.isfinite(xis)):
        raise ValueError("IPR values must be positive and finite")
    res = stats.linregress(np.log10(sizes), np.log10(xis))
    return ScalingFit(float(res.slope), float(res.intercept), float(res.stderr), tuple(sizes))


@dataclass(frozen=True)
class GapEstimate:
    gamma_c: float
    gamma_alpha: float
    gamma_d: float | None = None


def estimate_gap(spectrum: SpectrumResult | np.ndarray, alpha: float = DEFAULT_ALPHA,
                 lambda_floor: float = LAMBDA_FLOOR) -> GapEstimate:
    """Smallest relaxation rate apart from the unit eigenvalue and the zero states."""
    lam = spectrum.eigenvalues if isinstance(spectrum, SpectrumResult) else np.asarray(spectrum, dtype=complex)
    lam = np.asarray(lam, dtype=complex).ravel()
    if lam.size:
        k = int(np.argmin(np.abs(lam - 1.0)))
        if abs(lam[k] - 1.0) < 1e-8:
            lam = np.delete(lam, k)
    lam = lam[np.abs(lam) >= lambda_floor]
    gamma_c = float(gamma_of(lam).min()) if lam.size else math.inf
    return GapEstimate(gamma_c, 2.0 * abs(math.log(alpha)))


def bin_slopes(curves: Mapping[int, IprCurve], min_sizes: int = 3) -> np.ndarray:
    """Per-bin scaling exponent across sizes; NaN where fewer than ``min_sizes`` sizes have data."""
    sizes = sorted(curves)
    edges = curves[sizes[0]].bin_edges
    for s in sizes:
        if not np.array_equal(curves[s].bin_edges, edges):
            raise ValueError("curves use different gamma grids")
    table = np.array([curves[s].mean_xi for s in sizes])
    mus = np.full(edges.size - 1, np.nan)
    for b in range(edges.size - 1):
        ok = np.isfinite(table[:, b]) & (table[:, b] > 0)
        if ok.sum() >= min_sizes:
            mus[b] = scaling_fit([s for s, o in zip(sizes, ok) if o], table[ok, b]).mu
    return mus


def delocalization_edge(curves: Mapping[int, IprCurve], mu_star: float = 0.3) -> float | None:
    """Left edge of the lowest bin from which every fittable bin scales faster than ``mu_star``.

    Bins without enough data are skipped; ``None`` when no bin qualifies.
    """
    if len(curves) < 3:
        raise ValueError("need curves for at least 3 sizes")
    mus = bin_slopes(curves)
    edges = next(iter(curves.values())).bin_edges
    fittable = np.flatnonzero(np.isfinite(mus))
    edge = None
    for b in fittable[::-1]:
        if mus[b] > mu_star:
            edge = float(edges[b])
        else:
            break
    return edge
