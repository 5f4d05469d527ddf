"""PageRank by power iteration, rank ordering and decay fits."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from scipy import stats

from .gmatrix import GoogleOperator, apply_g

__all__ = [
    "ConvergenceError",
    "PageRankVector",
    "DecayFit",
    "CumulativeTable",
    "power_iterate",
    "rank_order",
    "fit_beta",
    "cumulative_pagerank",
    "fit_cumulative_slope",
    "write_pagerank_csv",
]


class ConvergenceError(RuntimeError):
    """Power iteration hit ``max_iter``; carries the last iterate."""

    def __init__(self, message, last_iterate, residual):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


def rank_order(p) -> np.ndarray:
    """Indices sorting ``p`` decreasingly, ties by ascending index."""
    p = np.asarray(p.p if isinstance(p, PageRankVector) else p)
    return np.argsort(-p, kind="stable")


@dataclass
class PageRankVector:
    p: np.ndarray
    iterations_used: int = 0
    final_residual: float = 0.0
    residuals: list[float] = field(default_factory=list, repr=False)
    order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.order = rank_order(self.p)

    @property
    def n(self) -> int:
        return self.p.size

    def sorted(self) -> np.ndarray:
        return self.p[self.order]


def power_iterate(op: GoogleOperator, tol: float = 1e-12, max_iter: int = 1000, seed: int = 0) -> PageRankVector:
    """Iterate ``v <- G v`` from a seeded random positive start.

    Stops once the L1 change between iterates falls below ``tol``; the change
    contracts by at least ``alpha`` per step, so the returned vector satisfies
    ``|G p - p|_1 <= tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    v = rng.random(op.n) + 0.5
    v /= v.sum()
    history = []
    res = np.inf
    for it in range(1, max_iter + 1):
        w = apply_g(op, v)
        w /= w.sum()
        res = float(np.abs(w - v).sum())
        history.append(res)
        v = w
        if res < tol:
            return PageRankVector(v, it, res, history)
    raise ConvergenceError(f"no convergence in {max_iter} iterations (residual {res:.3e})", v, res)


@dataclass(frozen=True)
class DecayFit:
    beta: float
    fit_range: tuple[int, int]
    stderr: float
    r_squared: float

    @property
    def nu(self) -> float:
        return 1.0 + 1.0 / self.beta

    @property
    def poor(self) -> bool:
        """True when a straight-line decay describes the data badly."""
        return self.r_squared < 0.99 or self.stderr > 0.05 * abs(self.beta)


def fit_beta(pr: PageRankVector | np.ndarray, fit_range: tuple[int, int] | None = None) -> DecayFit:
    """Fit ``p_j ~ j**-beta`` over ranks ``fit_range`` (default ``[10, N/10]``)."""
    ps = pr.sorted() if isinstance(pr, PageRankVector) else np.sort(np.asarray(pr, dtype=float))[::-1]
    n = ps.size
    lo, hi = fit_range if fit_range is not None else (10, n // 10)
    lo, hi = max(int(lo), 1), min(int(hi), n)
    if hi - lo + 1 < 10:
        raise ValueError(f"rank window [{lo}, {hi}] has fewer than 10 points")
    j = np.arange(lo, hi + 1)
    y = np.log(ps[lo - 1:hi])
    if np.ptp(y) == 0.0:
        raise ValueError("PageRank is constant on the fit window")
    res = stats.linregress(np.log(j), y)
    if res.slope >= 0:
        raise ValueError("PageRank does not decay on the fit window")
    return DecayFit(float(-res.slope), (lo, hi), float(res.stderr), float(res.rvalue ** 2))


@dataclass(frozen=True)
class CumulativeTable:
    """``count[i] = #{j : p_j >= grid[i]}`` for a PageRank of size ``n``."""

    grid: np.ndarray
    count: np.ndarray
    n: int

    def to_csv(self, stream: IO[str]):
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["p", "P_c", "P_c_over_N"])
        w.writerow([repr(0.0), self.n, repr(1.0)])
        for p, c in zip(self.grid, self.count):
            w.writerow([repr(float(p)), int(c), repr(c / self.n)])


def cumulative_pagerank(pr: PageRankVector | np.ndarray, grid: Sequence[float] | None = None,
                        points: int = 100) -> CumulativeTable:
    """Cumulative PageRank counts; the default grid is logarithmic from min to max ``p``."""
    p = pr.p if isinstance(pr, PageRankVector) else np.asarray(pr, dtype=float)
    ps = np.sort(p)
    if grid is None:
        grid = np.geomspace(ps[0], ps[-1], points)
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be positive and strictly ascending")
    count = ps.size - np.searchsorted(ps, grid, side="left")
    return CumulativeTable(grid, count, ps.size)


def fit_cumulative_slope(table: CumulativeTable, fraction: tuple[float, float] = (0.25, 0.75)):
    """Log-log slope of ``P_c(p)`` over a central part of the ``log p`` span.

    ``fraction`` selects the sub-interval of ``[log p_min, log p_max]``;
    returns ``(slope, stderr)``.
    """
    lg = np.log(table.grid)
    lo = lg[0] + fraction[0] * (lg[-1] - lg[0])
    hi = lg[0] + fraction[1] * (lg[-1] - lg[0])
    sel = (lg >= lo) & (lg <= hi) & (table.count > 0)
    if sel.sum() < 5:
        raise ValueError("too few grid points in the mid-range")
    res = stats.linregress(lg[sel], np.log(table.count[sel]))
    return float(res.slope), float(res.stderr)


def write_pagerank_csv(pr: PageRankVector, stream: IO[str], labels: Sequence[str] | None = None):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["rank", "node", "p"])
    for j, node in enumerate(pr.order.tolist(), start=1):
        w.writerow([j, labels[node] if labels is not None else node, repr(float(pr.p[node]))])
