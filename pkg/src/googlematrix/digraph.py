"""Directed graphs, the directed Albert-Barabasi generator, degree-preserving
randomization, edge-list I/O and degree statistics.

Edges follow the adjacency convention ``A[i, j] = 1`` when node ``j`` links
to node ``i``; a graph stores them as (source, target) pairs.
"""

from __future__ import annotations

import csv
import random
import warnings
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np
from scipy import stats

__all__ = [
    "DirectedGraph",
    "AbParams",
    "DegreeStats",
    "TailFit",
    "EdgeListError",
    "DegenerateGraphWarning",
    "ab_generate",
    "preferential_pick",
    "rewire_preserving_degrees",
    "load_edge_list",
    "write_edge_list",
    "degree_stats",
    "fit_tail",
]


class EdgeListError(ValueError):
    """Raised for unreadable edge-list input."""


class DegenerateGraphWarning(UserWarning):
    """No valid degree-preserving swap could be found."""


def _frozen(a, dtype=np.int64):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


class DirectedGraph:
    """Immutable simple directed graph in dual CSR layout.

    ``out_adj(i)`` lists the targets of node ``i``, ``in_adj(i)`` its sources.
    Edges are kept sorted by (source, target), so two graphs with the same
    edge set compare equal.
    """

    __slots__ = ("n_nodes", "sources", "targets", "_out_ptr", "_in_ptr", "_in_src")

    def __init__(self, n_nodes: int, sources, targets):
        n_nodes = int(n_nodes)
        if n_nodes < 0:
            raise ValueError("n_nodes must be nonnegative")
        src = np.asarray(sources, dtype=np.int64).ravel()
        dst = np.asarray(targets, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise ValueError("sources and targets differ in length")
        if src.size:
            if min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n_nodes:
                raise ValueError("edge endpoint out of range")
            if np.any(src == dst):
                raise ValueError("self-loops are not allowed")
        key = src * n_nodes + dst
        order = np.argsort(key, kind="stable")
        key = key[order]
        if key.size > 1 and np.any(key[1:] == key[:-1]):
            raise ValueError("duplicate edges are not allowed")
        src, dst = src[order], dst[order]

        self.n_nodes = n_nodes
        self.sources = _frozen(src)
        self.targets = _frozen(dst)
        self._out_ptr = _frozen(np.concatenate(([0], np.cumsum(np.bincount(src, minlength=n_nodes)))))
        in_order = np.lexsort((src, dst))
        self._in_src = _frozen(src[in_order])
        self._in_ptr = _frozen(np.concatenate(([0], np.cumsum(np.bincount(dst, minlength=n_nodes)))))

    @classmethod
    def from_edges(cls, n_nodes: int, edges: Iterable[tuple[int, int]]) -> "DirectedGraph":
        pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(n_nodes, pairs[:, 0], pairs[:, 1])

    @property
    def n_edges(self) -> int:
        return int(self.sources.size)

    def out_adj(self, i: int) -> np.ndarray:
        return self.targets[self._out_ptr[i]:self._out_ptr[i + 1]]

    def in_adj(self, i: int) -> np.ndarray:
        return self._in_src[self._in_ptr[i]:self._in_ptr[i + 1]]

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out_ptr)

    @property
    def in_degrees(self) -> np.ndarray:
        return np.diff(self._in_ptr)

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.sources.tolist(), self.targets.tolist()))

    def adjacency(self) -> np.ndarray:
        """Dense 0/1 matrix with ``A[target, source] = 1``."""
        a = np.zeros((self.n_nodes, self.n_nodes))
        a[self.targets, self.sources] = 1.0
        return a

    def __eq__(self, other):
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and np.array_equal(self.sources, other.sources)
            and np.array_equal(self.targets, other.targets)
        )

    def __hash__(self):
        return hash((self.n_nodes, self.sources.tobytes(), self.targets.tobytes()))

    def __repr__(self):
        return f"DirectedGraph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


# ---------------------------------------------------------------------------
# Albert-Barabasi growth


@dataclass(frozen=True)
class AbParams:
    """Parameters of the directed Albert-Barabasi process.

    Each step adds ``m`` links with probability ``p``, rewires ``m`` links with
    probability ``q`` and otherwise adds a node carrying ``m`` out-links.
    """

    m: int = 5
    p: float = 0.2
    q: float = 0.1
    n_target: int = 1024
    seed: int = 0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.p + self.q > 1.0:
            raise ValueError(f"p + q must not exceed 1, got {self.p + self.q}")
        if self.p + self.q == 1.0 and self.n_target > self.m:
            raise ValueError("p + q = 1 never adds nodes")
        if self.n_target < self.m:
            raise ValueError(f"n_target ({self.n_target}) must be >= m ({self.m})")


_MAX_RESAMPLE = 100


class _GrowingGraph:
    """Mutable edge store with an urn for (k+1)-weighted sampling.

    The urn holds every node once plus both endpoints of every edge, so a
    uniform draw lands on node ``i`` with probability proportional to
    ``k_in + k_out + 1``.
    """

    def __init__(self, m: int, rng: random.Random):
        self.rng = rng
        self.n = m
        self.src: list[int] = []
        self.dst: list[int] = []
        self.keys: set[int] = set()
        for i in range(m):
            if m > 1:
                self.add(i, (i + 1) % m)

    def _key(self, s: int, t: int) -> int:
        return (s << 32) | t

    def add(self, s: int, t: int):
        self.src.append(s)
        self.dst.append(t)
        self.keys.add(self._key(s, t))

    def retarget(self, e: int, t: int):
        s = self.src[e]
        self.keys.discard(self._key(s, self.dst[e]))
        self.dst[e] = t
        self.keys.add(self._key(s, t))

    def pick(self) -> int:
        r = self.rng.randrange(self.n + 2 * len(self.src))
        if r < self.n:
            return r
        r -= self.n
        return self.dst[r >> 1] if r & 1 else self.src[r >> 1]

    def target_for(self, s: int) -> int | None:
        for _ in range(_MAX_RESAMPLE):
            t = self.pick()
            if t != s and self._key(s, t) not in self.keys:
                return t
        return None


def ab_generate(params: AbParams) -> DirectedGraph:
    """Grow a directed Albert-Barabasi network with ``params.n_target`` nodes.

    The process starts from ``m`` nodes on a directed ring. New link ends are
    drawn with probability ``(k_i + 1) / sum_j (k_j + 1)`` where ``k`` is the
    total degree; link sources are uniform (added links), kept (rewired links)
    or the new node. A target that would form a self-loop or a duplicate edge
    is redrawn up to 100 times before the link is dropped.
    """
    rng = random.Random(params.seed)
    m, p, q = params.m, params.p, params.q
    g = _GrowingGraph(m, rng)
    while g.n < params.n_target:
        u = rng.random()
        if u < p:
            for _ in range(m):
                s = rng.randrange(g.n)
                t = g.target_for(s)
                if t is not None:
                    g.add(s, t)
        elif u < p + q:
            for _ in range(m):
                if not g.src:
                    break
                e = rng.randrange(len(g.src))
                t = g.target_for(g.src[e])
                if t is not None:
                    g.retarget(e, t)
        else:
            s = g.n
            g.n += 1
            for _ in range(m):
                t = g.target_for(s)
                if t is not None:
                    g.add(s, t)
    return DirectedGraph(g.n, g.src, g.dst)


def preferential_pick(graph: DirectedGraph, rng: np.random.Generator, size: int | None = None):
    """Draw node(s) with probability ``(k_i + 1) / sum_j (k_j + 1)``."""
    n, e = graph.n_nodes, graph.n_edges
    if n == 0:
        raise ValueError("cannot pick from an empty graph")
    r = rng.integers(0, n + 2 * e, size=size)
    if size is None:
        if r < n:
            return int(r)
        r -= n
        return int(graph.targets[r >> 1] if r & 1 else graph.sources[r >> 1])
    out = r.copy()
    hit = r >= n
    rr = r[hit] - n
    out[hit] = np.where(rr & 1, graph.targets[rr >> 1], graph.sources[rr >> 1])
    return out


# ---------------------------------------------------------------------------
# Degree-preserving null model


def rewire_preserving_degrees(graph: DirectedGraph, n_swaps: int | None = None, seed: int = 0) -> DirectedGraph:
    """Randomize links by endpoint swaps keeping every in- and out-degree.

    Two edges ``a->b``, ``c->d`` become ``a->d``, ``c->b``; swaps that would
    create a self-loop or a duplicate (or leave the edge set unchanged) are
    redrawn. ``n_swaps`` defaults to ten times the edge count. When no valid
    swap turns up within the attempt budget the input is returned and a
    :class:`DegenerateGraphWarning` is issued.
    """
    n_edges = graph.n_edges
    if n_swaps is None:
        n_swaps = 10 * n_edges
    if n_swaps <= 0:
        return graph
    if n_edges < 2:
        warnings.warn("fewer than two edges, nothing to swap", DegenerateGraphWarning, stacklevel=2)
        return graph

    rng = random.Random(seed)
    src = graph.sources.tolist()
    dst = graph.targets.tolist()
    keys = {(s << 32) | t for s, t in zip(src, dst)}
    max_failures = max(1000, 10 * n_edges)
    done = failures = 0
    while done < n_swaps:
        i = rng.randrange(n_edges)
        j = rng.randrange(n_edges)
        a, b, c, d = src[i], dst[i], src[j], dst[j]
        if a == c or b == d or a == d or c == b or ((a << 32) | d) in keys or ((c << 32) | b) in keys:
            failures += 1
            if failures > max_failures:
                warnings.warn(
                    f"no valid swap in {max_failures} consecutive attempts after {done} swaps",
                    DegenerateGraphWarning,
                    stacklevel=2,
                )
                if done == 0:
                    return graph
                break
            continue
        failures = 0
        keys.discard((a << 32) | b)
        keys.discard((c << 32) | d)
        keys.add((a << 32) | d)
        keys.add((c << 32) | b)
        dst[i], dst[j] = d, b
        done += 1
    return DirectedGraph(graph.n_nodes, src, dst)


# ---------------------------------------------------------------------------
# Edge-list I/O


def load_edge_list(source: IO[str] | Iterable[str]) -> tuple[DirectedGraph, list[str]]:
    """Read ``source target`` lines into a graph.

    Labels are arbitrary tokens numbered in first-seen order; the returned list
    maps index to label. Duplicate links collapse and self-loops are dropped
    (their node is still registered). Blank lines and lines starting with
    ``#`` are skipped.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    keys: set[tuple[int, int]] = set()
    src: list[int] = []
    dst: list[int] = []
    for lineno, line in enumerate(source, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 2:
            raise EdgeListError(f"line {lineno}: expected 'source target', got {text!r}")
        ids = []
        for tok in parts:
            k = index.get(tok)
            if k is None:
                k = index[tok] = len(labels)
                labels.append(tok)
            ids.append(k)
        s, t = ids
        if s == t or (s, t) in keys:
            continue
        keys.add((s, t))
        src.append(s)
        dst.append(t)
    if not labels:
        raise EdgeListError("edge list is empty")
    return DirectedGraph(len(labels), src, dst), labels


def write_edge_list(graph: DirectedGraph, stream: IO[str], labels: Sequence[str] | None = None):
    """Write one ``source target`` line per edge (LF endings)."""
    for s, t in zip(graph.sources.tolist(), graph.targets.tolist()):
        if labels is None:
            stream.write(f"{s} {t}\n")
        else:
            stream.write(f"{labels[s]} {labels[t]}\n")


# ---------------------------------------------------------------------------
# Degree statistics


def _cumulative(degrees: np.ndarray, kmax: int) -> np.ndarray:
    n = degrees.size
    counts = np.bincount(degrees, minlength=kmax + 1)
    # P_c(k) = #{deg >= k} / N
    return counts[::-1].cumsum()[::-1] / n


@dataclass(frozen=True)
class DegreeStats:
    in_degrees: np.ndarray
    out_degrees: np.ndarray
    cumulative_in: np.ndarray
    cumulative_out: np.ndarray
    mean_total: float

    @property
    def mean_degree(self) -> float:
        """Links per node, i.e. the mean in-degree (= mean out-degree)."""
        return self.mean_total / 2.0

    def to_csv(self, stream: IO[str]):
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["k", "P_c_in", "P_c_out"])
        for k, (a, b) in enumerate(zip(self.cumulative_in, self.cumulative_out)):
            w.writerow([k, repr(float(a)), repr(float(b))])


def degree_stats(graph: DirectedGraph) -> DegreeStats:
    kin = graph.in_degrees
    kout = graph.out_degrees
    n = graph.n_nodes
    if n == 0:
        raise ValueError("empty graph")
    kmax = int(max(kin.max(initial=0), kout.max(initial=0)))
    return DegreeStats(
        in_degrees=kin,
        out_degrees=kout,
        cumulative_in=_cumulative(kin, kmax),
        cumulative_out=_cumulative(kout, kmax),
        mean_total=2.0 * graph.n_edges / n,
    )


@dataclass(frozen=True)
class TailFit:
    model: str
    exponent: float
    fit_range: tuple[int, int]
    stderr: float


def fit_tail(cumulative: np.ndarray, model: str = "algebraic", fit_range: tuple[int, int] | None = None) -> TailFit:
    """Fit the decay of a cumulative degree table ``P_c[k]``.

    ``model="algebraic"`` fits ``P_c ~ k**-exponent`` on log-log axes,
    ``"exponential"`` fits ``P_c ~ exp(-exponent * k)``. The default range is
    ``[2, k_max // 4]`` with ``k_max`` the largest degree present.
    """
    pc = np.asarray(cumulative, dtype=float)
    if model not in ("algebraic", "exponential"):
        raise ValueError(f"unknown model {model!r}")
    support = np.flatnonzero(pc > 0)
    if support.size == 0:
        raise ValueError("empty cumulative table")
    kmax = int(support[-1])
    lo, hi = fit_range if fit_range is not None else (2, kmax // 4)
    lo = max(int(lo), 1 if model == "algebraic" else 0)
    hi = min(int(hi), kmax)
    k = np.arange(pc.size)
    sel = (k >= lo) & (k <= hi) & (pc > 0)
    if sel.sum() < 5:
        raise ValueError(f"fit range [{lo}, {hi}] holds fewer than 5 usable points")
    x = np.log(k[sel]) if model == "algebraic" else k[sel].astype(float)
    res = stats.linregress(x, np.log(pc[sel]))
    return TailFit(model, float(-res.slope), (lo, hi), float(res.stderr))
