"""Seeded multi-realization experiments: generate, build G, PageRank,
spectrum, statistics, then per-figure CSV products and a manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..digraph import AbParams, DirectedGraph, ab_generate, load_edge_list, rewire_preserving_degrees
from ..gmatrix import GoogleOperator, materialize_dense
from ..locstats import estimate_gap, gamma_of, ipr
from ..pagerank import ConvergenceError, fit_beta, power_iterate
from ..spectra import SpectrumError, attach_eigenvectors, full_spectrum, gamma_window
from ._csvfmt import fmt
from .config import MANIFEST_FORMAT, ExperimentConfig, EdgeListNetwork

log = logging.getLogger(__name__)

__all__ = ["Task", "TaskResult", "derive_seed", "plan_tasks", "run_task", "run", "REALIZATION_FIELDS"]


def derive_seed(base_seed: int, key: int, realization: int) -> int:
    """Per-realization seed: ``SeedSequence(base_seed, spawn_key=(key, realization))``.

    ``key`` is the target size N for AB networks and the edge-list index
    otherwise, so each (size, realization) gets an independent stream.
    """
    ss = np.random.SeedSequence(base_seed, spawn_key=(int(key), int(realization)))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _sub_seed(seed: int, stage: int) -> int:
    return int(np.random.SeedSequence([seed, stage]).generate_state(1, dtype=np.uint32)[0])


@dataclass(frozen=True)
class Task:
    entry: int
    key: int
    realization: int
    seed: int


@dataclass
class TaskResult:
    task: Task
    n: int = 0
    status: str = "ok"
    error: str = ""
    error_kind: str = ""
    n_edges: int = 0
    mean_degree: float = math.nan
    pagerank_ipr: float = math.nan
    pagerank_iterations: int = 0
    beta: float = math.nan
    pagerank: np.ndarray | None = field(default=None, repr=False)
    eigenvalues: np.ndarray | None = field(default=None, repr=False)
    pair_lams: np.ndarray | None = field(default=None, repr=False)
    pair_xis: np.ndarray | None = field(default=None, repr=False)
    n_unverified: int = 0
    zero_fraction: float = math.nan
    gamma_c: float = math.nan
    bulk_ipr: float = math.nan
    bulk_count: int = 0
    bulk_profile: np.ndarray | None = field(default=None, repr=False)
    timings: dict[str, float] = field(default_factory=dict)


REALIZATION_FIELDS = [
    "entry", "N", "realization", "seed", "status", "n_edges", "mean_degree", "pagerank_ipr", "pagerank_iterations",
    "beta", "zero_fraction", "gamma_c", "bulk_ipr", "bulk_count", "n_unverified", "error",
]


def plan_tasks(config: ExperimentConfig) -> list[Task]:
    tasks = []
    keys = config.sizes if not isinstance(config.network, EdgeListNetwork) else range(len(config.network.paths))
    for entry, (key, nr) in enumerate(zip(keys, config.n_realizations)):
        for r in range(nr):
            tasks.append(Task(entry, int(key), r, derive_seed(config.seed, key, r)))
    return tasks


def _build_graph(config: ExperimentConfig, task: Task) -> DirectedGraph:
    net = config.network
    if isinstance(net, EdgeListNetwork):
        with open(net.paths[task.entry]) as fh:
            graph, _ = load_edge_list(fh)
        if net.randomize:
            n_swaps = None if net.randomize is True else int(net.randomize)
            graph = rewire_preserving_degrees(graph, n_swaps, seed=_sub_seed(task.seed, 3))
        return graph
    return ab_generate(AbParams(net.m, net.p, net.q, task.key, task.seed))


def _vector_selector(config: ExperimentConfig):
    v = config.vectors
    if v == "none":
        return None
    if v == "all":
        return lambda lam: np.ones(lam.shape, dtype=bool)
    if v == "bulk":
        if config.bulk_rule == "top10":
            lo, hi = 0.0, config.gamma_max
        else:
            lo, hi = config.bulk_window
        return gamma_window(lo, hi)
    return gamma_window(*v)


def _bulk_mask(config: ExperimentConfig, lams: np.ndarray, xis: np.ndarray) -> np.ndarray:
    gam = gamma_of(lams)
    if config.bulk_rule == "top10":
        cand = np.flatnonzero((gam > 0) & (gam < config.gamma_max) & (np.abs(lams - 1.0) >= 1e-8))
        mask = np.zeros(lams.size, dtype=bool)
        # stable: highest xi first, ties by position
        top = cand[np.argsort(-xis[cand], kind="stable")[:10]]
        mask[top] = True
        return mask
    lo, hi = config.bulk_window
    return (gam > lo) & (gam < hi)


def run_task(config: ExperimentConfig, task: Task) -> TaskResult:
    """One realization; failures are captured in the result rather than raised."""
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        threadpool_limits = None
    res = TaskResult(task)
    try:
        if threadpool_limits is not None:
            with threadpool_limits(limits=1):
                _run_task(config, task, res)
        else:
            _run_task(config, task, res)
    except Exception as exc:  # noqa: BLE001 - recorded per realization
        res.status = "error"
        res.error_kind = "numerical" if isinstance(exc, (ConvergenceError, SpectrumError, ArithmeticError,
                                                          np.linalg.LinAlgError)) else "input"
        res.error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        log.warning("N=%s realization %s failed: %s", task.key, task.realization, res.error)
    return res


def _run_task(config: ExperimentConfig, task: Task, res: TaskResult):
    t0 = time.perf_counter()
    graph = _build_graph(config, task)
    res.n = graph.n_nodes
    res.n_edges = graph.n_edges
    res.mean_degree = graph.n_edges / graph.n_nodes
    t1 = time.perf_counter()
    res.timings["generate"] = t1 - t0

    op = GoogleOperator.from_graph(graph, config.alpha)
    pr = power_iterate(op, tol=config.tol, max_iter=config.max_iter, seed=_sub_seed(task.seed, 1))
    res.pagerank = pr.p
    res.pagerank_ipr = ipr(pr.p)
    res.pagerank_iterations = pr.iterations_used
    if graph.n_nodes // 10 - 10 + 1 >= 10:
        try:
            res.beta = fit_beta(pr).beta
        except ValueError:
            pass
    t2 = time.perf_counter()
    res.timings["pagerank"] = t2 - t1
    if config.mode != "full_spectrum":
        return

    g = materialize_dense(op)
    spec = full_spectrum(g, method=config.method)
    t3 = time.perf_counter()
    res.timings["eigenvalues"] = t3 - t2
    res.eigenvalues = spec.eigenvalues
    res.zero_fraction = spec.zero_fraction
    res.gamma_c = estimate_gap(spec, config.alpha).gamma_c
    select = _vector_selector(config)
    if select is not None:
        attach_eigenvectors(spec, g, select=select, seed=_sub_seed(task.seed, 2))
    del g
    pairs = [p for p in spec.pairs if p.verified]
    res.n_unverified = len(spec.pairs) - len(pairs)
    res.pair_lams = np.array([p.lam for p in pairs], dtype=complex)
    res.pair_xis = np.array([ipr(p.psi) for p in pairs])
    if pairs:
        bulk = _bulk_mask(config, res.pair_lams, res.pair_xis)
        res.bulk_count = int(bulk.sum())
        if res.bulk_count:
            res.bulk_ipr = float(np.mean(res.pair_xis[bulk]))
            prof = np.zeros(graph.n_nodes)
            for p, b in zip(pairs, bulk):
                if b:
                    a2 = np.abs(p.psi) ** 2
                    prof += a2 / a2.sum()
            res.bulk_profile = (prof / res.bulk_count)[pr.order]
    res.timings["eigenvectors"] = time.perf_counter() - t3


# ---------------------------------------------------------------------------
# raw per-realization files


def raw_stem(res: TaskResult) -> str:
    return f"N{res.n}_e{res.task.entry}_r{res.task.realization}"


def _write_raw(out: Path, res: TaskResult) -> list[Path]:
    raw = out / "raw"
    raw.mkdir(parents=True, exist_ok=True)
    written = []
    if res.pagerank is not None:
        ps = np.sort(res.pagerank)[::-1]
        path = raw / f"{raw_stem(res)}_profile.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["j", "p", "bulk_psi2"])
            prof = res.bulk_profile
            for j in range(ps.size):
                w.writerow([j + 1, fmt(ps[j]), "" if prof is None else fmt(prof[j])])
        written.append(path)
    if res.eigenvalues is not None:
        # same layout as spectra.write_spectrum_csv; only the IPR of each vector is kept
        path = raw / f"{raw_stem(res)}_spectrum.csv"
        xi_of: dict[complex, list[float]] = {}
        for lam, xi in zip(res.pair_lams.tolist(), res.pair_xis.tolist()):
            xi_of.setdefault(lam, []).append(xi)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re", "im", "abs", "gamma", "xi"])
            for lam in res.eigenvalues.tolist():
                xis = xi_of.get(lam)
                xi = fmt(xis.pop(0)) if xis else ""
                w.writerow([fmt(lam.real), fmt(lam.imag), fmt(abs(lam)), fmt(gamma_of(lam)), xi])
        written.append(path)
    return written


def _write_realizations(out: Path, results: list[TaskResult]) -> Path:
    path = out / "realizations.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REALIZATION_FIELDS)
        for r in results:
            w.writerow([
                r.task.entry, r.n, r.task.realization, r.task.seed, r.status, r.n_edges, fmt(r.mean_degree),
                fmt(r.pagerank_ipr), r.pagerank_iterations, fmt(r.beta), fmt(r.zero_fraction),
                fmt(r.gamma_c), fmt(r.bulk_ipr), r.bulk_count, r.n_unverified, r.error,
            ])
    return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _versions() -> dict[str, str]:
    import numba
    import scipy

    return {
        "googlematrix": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "platform": platform.platform(),
    }


def _execute(config: ExperimentConfig, tasks: list[Task], jobs: int) -> list[TaskResult]:
    if jobs <= 1 or len(tasks) <= 1:
        return [run_task(config, t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(run_task, [config] * len(tasks), tasks))
    return results


def run(config: ExperimentConfig, jobs: int = 1, output_dir: str | Path | None = None) -> dict:
    """Run every (size, realization) task, write CSV products and the manifest.

    Returns the manifest dictionary (also written to ``manifest.json``).
    """
    from .figures import emit_all

    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = plan_tasks(config)
    t_start = time.perf_counter()
    results = _execute(config, tasks, jobs)
    results.sort(key=lambda r: (r.task.entry, r.task.realization))

    files = []
    for r in results:
        files += _write_raw(out, r)
    files.append(_write_realizations(out, results))
    summary_path = out / "summary.csv"
    from .figures import write_summary

    write_summary(out, results, summary_path)
    files.append(summary_path)
    files += emit_all(out, config)

    failures = [r for r in results if r.status != "ok"]
    manifest = {
        "format": MANIFEST_FORMAT,
        "config": config.to_dict(),
        "seeds": [{"entry": r.task.entry, "N": r.n, "key": r.task.key, "realization": r.task.realization,
                   "seed": r.task.seed} for r in results],
        "versions": _versions(),
        "timings": [{"N": r.n, "realization": r.task.realization, **{k: round(v, 6) for k, v in r.timings.items()}}
                    for r in results],
        "wall_clock": round(time.perf_counter() - t_start, 3),
        "failures": [{"N": r.n, "realization": r.task.realization, "kind": r.error_kind, "error": r.error} for r in failures],
        "files": [{"path": str(p.relative_to(out)), "sha256": _sha256(p)} for p in sorted(set(files))],
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
