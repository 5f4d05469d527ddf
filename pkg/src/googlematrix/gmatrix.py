"""Column-stochastic link matrix and the Google operator
``G = alpha * S + (1 - alpha) * E / N``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import IO

import numpy as np
import scipy.sparse as sp

from .digraph import DirectedGraph

__all__ = [
    "DEFAULT_ALPHA",
    "DENSE_CAP_ENV",
    "DenseCapError",
    "StochasticMatrix",
    "GoogleOperator",
    "build_s",
    "apply_g",
    "dense_cap",
    "materialize_dense",
    "write_dense_csv",
]

DEFAULT_ALPHA = 0.85
DENSE_CAP_ENV = "GOOGLEMATRIX_DENSE_CAP"
_DEFAULT_DENSE_CAP = 2 ** 13


class DenseCapError(ValueError):
    """The matrix is too large to materialize densely."""


@dataclass(frozen=True)
class StochasticMatrix:
    """Sparse ``S`` without its dangling columns.

    ``columns`` is a CSC matrix whose non-dangling columns sum to one;
    ``dangling`` lists the zero out-degree columns, which are implicitly
    uniform ``1/N``.
    """

    n: int
    columns: sp.csc_matrix
    dangling: np.ndarray


def build_s(graph: DirectedGraph) -> StochasticMatrix:
    n = graph.n_nodes
    if n == 0:
        raise ValueError("empty graph")
    kout = graph.out_degrees
    src, dst = graph.sources, graph.targets
    values = 1.0 / kout[src]
    cols = sp.csc_matrix((values, (dst, src)), shape=(n, n))
    cols.sort_indices()
    dangling = np.flatnonzero(kout == 0)
    dangling.setflags(write=False)
    return StochasticMatrix(n, cols, dangling)


@dataclass(frozen=True)
class GoogleOperator:
    s: StochasticMatrix
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @classmethod
    def from_graph(cls, graph: DirectedGraph, alpha: float = DEFAULT_ALPHA) -> "GoogleOperator":
        return cls(build_s(graph), alpha)

    @property
    def n(self) -> int:
        return self.s.n

    def __matmul__(self, v):
        return apply_g(self, v)


def apply_g(op: GoogleOperator, v) -> np.ndarray:
    """``G @ v`` in O(|E| + N) without forming E or the dangling columns.

    ``v`` may be a vector or a matrix of column vectors.
    """
    v = np.asarray(v, dtype=float)
    n = op.n
    if v.shape[0] != n:
        raise ValueError(f"dimension mismatch: operator is {n}, vector is {v.shape[0]}")
    a = op.alpha
    out = a * (op.s.columns @ v)
    shift = (a * v[op.s.dangling].sum(axis=0) + (1.0 - a) * v.sum(axis=0)) / n
    out += shift
    return out


def dense_cap() -> int:
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return _DEFAULT_DENSE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise DenseCapError(f"{DENSE_CAP_ENV}={raw!r} is not an integer") from None
    if cap < 1:
        raise DenseCapError(f"{DENSE_CAP_ENV} must be positive")
    return cap


def materialize_dense(op: GoogleOperator, cap: int | None = None) -> np.ndarray:
    """Explicit ``N x N`` Google matrix (C order)."""
    n = op.n
    cap = dense_cap() if cap is None else cap
    if n > cap:
        raise DenseCapError(f"N = {n} exceeds the dense cap of {cap}; lower N or raise {DENSE_CAP_ENV}")
    a = op.alpha
    g = np.full((n, n), (1.0 - a) / n)
    g += a * op.s.columns.toarray()
    if op.s.dangling.size:
        g[:, op.s.dangling] += a / n
    return g


def write_dense_csv(g: np.ndarray, stream: IO[str]):
    """One matrix row per line, comma separated, shortest round-trip floats."""
    for row in g:
        stream.write(",".join(repr(float(x)) for x in row))
        stream.write("\n")
