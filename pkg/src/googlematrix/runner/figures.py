"""Per-figure CSV products, rebuilt from the raw per-realization files.

Everything here reads ``realizations.csv`` and ``raw/`` from an output
directory, so ``googlematrix figure`` on a finished run reproduces exactly the
files written by the run itself.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from ..locstats import delocalization_edge, density_w, ipr_vs_gamma, scaling_fit
from ..pagerank import cumulative_pagerank
from ._csvfmt import fmt, parse
from .config import ExperimentConfig, load_config

__all__ = ["FIGURE_TAGS", "MissingInputError", "emit_figure", "emit_all", "write_summary", "SUMMARY_METRICS"]

FIGURE_TAGS = ("fig1", "fig2", "fig3", "fig4", "fig5")
SUMMARY_METRICS = ("mean_degree", "pagerank_ipr", "pagerank_iterations", "beta", "zero_fraction", "gamma_c",
                   "bulk_ipr")


class MissingInputError(FileNotFoundError):
    """An upstream product needed for a figure is absent."""


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _read_csv(path: Path, what: str) -> list[dict[str, str]]:
    if not path.is_file():
        raise MissingInputError(f"{what} needs {path}, which does not exist")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _ok_rows(out: Path, what: str) -> list[dict[str, str]]:
    rows = [r for r in _read_csv(out / "realizations.csv", what) if r["status"] == "ok"]
    if not rows:
        raise MissingInputError(f"{what}: realizations.csv lists no successful realization")
    return rows


def _by_entry(rows):
    groups = defaultdict(list)
    for r in rows:
        groups[(int(r["entry"]), int(r["N"]))].append(r)
    return dict(sorted(groups.items()))


def _raw_path(out: Path, row, kind: str) -> Path:
    return out / "raw" / f"N{row['N']}_e{row['entry']}_r{row['realization']}_{kind}.csv"


# ---------------------------------------------------------------------------
# summary (means over realizations)


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return math.nan, math.nan
    n = len(vals)
    mean = math.fsum(vals) / n
    if n == 1:
        return mean, math.nan
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var / n)


def write_summary(out: Path, results, path: Path):
    """Means and standard errors per size, computed from ``realizations.csv``.

    The means are cross-checked against the in-memory per-realization values;
    a mismatch raises ``RuntimeError``.
    """
    all_rows = _read_csv(out / "realizations.csv", "summary")
    groups = defaultdict(list)
    for r in all_rows:
        groups[int(r["entry"])].append(r)
    mem = defaultdict(list)
    for res in results:
        if res.status == "ok":
            mem[res.task.entry].append(res)
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["entry", "N", "n_ok", "n_failed"] + [f"{m}_{s}" for m in SUMMARY_METRICS for s in ("mean", "stderr")])
        for entry in sorted(groups):
            rows = groups[entry]
            ok = [r for r in rows if r["status"] == "ok"]
            n = rows[0]["N"] if not ok else ok[0]["N"]
            line = [entry, n, len(ok), len(rows) - len(ok)]
            for m in SUMMARY_METRICS:
                mean, se = _mean_stderr([parse(r[m]) for r in ok])
                check, _ = _mean_stderr([float(getattr(x, m)) for x in mem[entry]])
                if not (math.isnan(mean) and math.isnan(check)) and not math.isclose(mean, check, rel_tol=1e-12,
                                                                                     abs_tol=0.0):
                    raise RuntimeError(f"aggregation mismatch for {m} at entry {entry}: {mean!r} vs {check!r}")
                line += [fmt(mean), fmt(se)]
            w.writerow(line)


# ---------------------------------------------------------------------------
# figure products


def _spectra(out: Path, rows, what: str):
    """Yield ``(key, row, lams, gammas, xis)`` per realization from raw spectrum files."""
    for key, group in _by_entry(rows).items():
        for row in group:
            path = _raw_path(out, row, "spectrum")
            if not path.is_file():
                raise MissingInputError(f"{what} needs {path}; rerun with mode 'full_spectrum'")
            with open(path, newline="") as fh:
                data = list(csv.DictReader(fh))
            lams = np.array([complex(float(d["re"]), float(d["im"])) for d in data])
            gam = np.array([float(d["gamma"]) for d in data])
            xi = np.array([parse(d["xi"]) for d in data])
            yield key, row, data, lams, gam, xi


def _fig1(out: Path, rows) -> list[Path]:
    path = out / "fig1_spectrum.csv"
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["N", "realization", "re", "im", "abs", "gamma", "xi"])
        for (_, n), row, data, *_ in _spectra(out, rows, "fig1"):
            for d in data:
                w.writerow([n, row["realization"], d["re"], d["im"], d["abs"], d["gamma"], d["xi"]])
    return [path]


def _fig23(out: Path, rows, config: ExperimentConfig, tag: str) -> list[Path]:
    pooled = defaultdict(lambda: ([], [], []))
    for key, _, _, lams, gam, xi in _spectra(out, rows, tag):
        lam_l, gam_l, xi_l = pooled[key]
        lam_l.append(lams)
        have = np.isfinite(xi)
        gam_l.append(np.maximum(gam[have], 0.0))
        xi_l.append(xi[have])
    dens_path = out / f"{tag}_density.csv"
    ipr_path = out / f"{tag}_ipr.csv"
    zero_path = out / f"{tag}_zeros.csv"
    curves = {}
    with open(dens_path, "w", newline="") as fd, open(ipr_path, "w", newline="") as fi, \
            open(zero_path, "w", newline="") as fz:
        wz = _writer(fz)
        wz.writerow(["N", "n_eigenvalues", "zero_count", "zero_fraction", "n_binned", "beyond_gamma_max"])
        for i, ((_, n), (lam_l, gam_l, xi_l)) in enumerate(pooled.items()):
            lam = np.concatenate(lam_l)
            d = density_w(lam, config.bin_width, config.gamma_max)
            d.to_csv(fd, label=n, header=i == 0)
            c = ipr_vs_gamma((np.concatenate(gam_l), np.concatenate(xi_l)), config.bin_width, config.gamma_max)
            c.to_csv(fi, label=n, header=i == 0)
            curves[n] = c
            wz.writerow([n, lam.size, d.excluded_zero_states, fmt(d.excluded_zero_states / lam.size), d.n_states,
                         d.excluded_beyond])
    paths = [dens_path, ipr_path, zero_path]
    if len(curves) >= 3 and len(curves) == len(pooled):
        edge_path = out / f"{tag}_edge.csv"
        edge = delocalization_edge(curves, config.mu_star)
        with open(edge_path, "w", newline="") as fh:
            w = _writer(fh)
            w.writerow(["mu_star", "gamma_d"])
            w.writerow([fmt(config.mu_star), "" if edge is None else fmt(edge)])
        paths.append(edge_path)
    return paths


def _fig4(out: Path, rows) -> list[Path]:
    groups = _by_entry(rows)
    sizes = [n for _, n in groups]
    if len(set(sizes)) < 3:
        raise ValueError(f"fig4 needs at least 3 distinct sizes for slopes, got {sorted(set(sizes))}")
    series = {}
    for name, col in (("pagerank", "pagerank_ipr"), ("bulk", "bulk_ipr")):
        pts = []
        for (_, n), group in groups.items():
            mean, se = _mean_stderr([parse(r[col]) for r in group])
            if math.isfinite(mean):
                pts.append((n, mean, se, sum(math.isfinite(parse(r[col])) for r in group)))
        if pts:
            series[name] = sorted(pts)
    path = out / "fig4_scaling.csv"
    fits_path = out / "fig4_fits.csv"
    with open(path, "w", newline="") as fh, open(fits_path, "w", newline="") as ff:
        w = _writer(fh)
        w.writerow(["series", "N", "n_realizations", "xi_mean", "xi_stderr", "log10_N", "log10_xi"])
        wf = _writer(ff)
        wf.writerow(["series", "n_sizes", "mu", "mu_stderr", "intercept", "mu_ci95_lo", "mu_ci95_hi"])
        for name, pts in series.items():
            for n, mean, se, k in pts:
                w.writerow([name, n, k, fmt(mean), fmt(se), fmt(math.log10(n)), fmt(math.log10(mean))])
            if len(pts) >= 3:
                fit = scaling_fit([p[0] for p in pts], [p[1] for p in pts])
                lo, hi = fit.confidence_interval()
                wf.writerow([name, len(pts), fmt(fit.mu), fmt(fit.stderr), fmt(fit.intercept), fmt(lo), fmt(hi)])
    return [path, fits_path]


def _fig5(out: Path, rows) -> list[Path]:
    path = out / "fig5_profile.csv"
    cum_path = out / "fig5_cumulative.csv"
    with open(path, "w", newline="") as fh, open(cum_path, "w", newline="") as fc:
        w = _writer(fh)
        w.writerow(["N", "j", "p", "bulk_psi2"])
        wc = _writer(fc)
        wc.writerow(["N", "p", "P_c", "P_c_over_N"])
        for (_, n), group in _by_entry(rows).items():
            ps, prof = [], []
            for row in group:
                raw = _read_csv(_raw_path(out, row, "profile"), "fig5")
                ps.append([float(d["p"]) for d in raw])
                if raw and raw[0]["bulk_psi2"] != "":
                    prof.append([float(d["bulk_psi2"]) for d in raw])
            p_mean = np.mean(np.array(ps), axis=0)
            b_mean = np.mean(np.array(prof), axis=0) if prof else None
            for j in range(p_mean.size):
                w.writerow([n, j + 1, fmt(p_mean[j]), "" if b_mean is None else fmt(b_mean[j])])
            table = cumulative_pagerank(p_mean)
            for p, c in zip(table.grid, table.count):
                wc.writerow([n, fmt(p), int(c), fmt(c / table.n)])
    return [path, cum_path]


def emit_figure(tag: str, out_dir: str | Path, config: ExperimentConfig | None = None) -> list[Path]:
    """Write the CSV products of one figure tag from the raw files in ``out_dir``.

    ``config`` defaults to the one echoed in ``out_dir/manifest.json``.
    """
    out = Path(out_dir)
    if tag not in FIGURE_TAGS:
        raise ValueError(f"unknown figure tag {tag!r}; choose from {', '.join(FIGURE_TAGS)}")
    rows = _ok_rows(out, tag)
    if tag == "fig1":
        return _fig1(out, rows)
    if tag == "fig4":
        return _fig4(out, rows)
    if tag == "fig5":
        return _fig5(out, rows)
    if config is None:
        manifest = out / "manifest.json"
        if not manifest.is_file():
            raise MissingInputError(f"{tag} needs {manifest} for binning parameters")
        config = load_config(manifest)
    return _fig23(out, rows, config, tag)


def emit_all(out_dir: str | Path, config: ExperimentConfig) -> list[Path]:
    """Every product the configuration supports.

    Density and IPR panels go under ``fig2`` for model networks and ``fig3``
    for edge-list networks; ``fig4`` needs three or more sizes.
    """
    out = Path(out_dir)
    try:
        rows = _ok_rows(out, "figures")
    except MissingInputError:
        return []
    paths = []
    if config.mode == "full_spectrum":
        paths += emit_figure("fig1", out, config)
        paths += emit_figure("fig2" if config.network.kind == "ab" else "fig3", out, config)
    if len({int(r["N"]) for r in rows}) >= 3:
        paths += emit_figure("fig4", out, config)
    paths += emit_figure("fig5", out, config)
    return paths
