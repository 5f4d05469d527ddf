import csv
import hashlib
import json
import math
import tracemalloc

import numpy as np
import pytest

from googlematrix.runner.config import ConfigError, config_from_dict, default_realizations, load_config
from googlematrix.runner.figures import MissingInputError, emit_figure
from googlematrix.runner.pipeline import derive_seed, plan_tasks, run, run_task

AB = {"kind": "ab", "m": 5, "p": 0.2, "q": 0.1}


def small_config(tmp_path, **over):
    d = {"network": dict(AB), "sizes": [64, 128, 256], "n_realizations": 2, "mode": "full_spectrum",
         "seed": 5, "output_dir": str(tmp_path / "out")}
    d.update(over)
    return config_from_dict(d)


def csv_digests(root):
    return {p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*.csv"))}


# -- configuration -----------------------------------------------------------


@pytest.mark.parametrize("bad, msg", [
    ({"network": {"kind": "ab", "qq": 0.1}, "sizes": [64]}, "unknown key"),
    ({"network": AB, "sizes": [64], "alhpa": 0.85}, "unknown key"),
    ({"network": AB, "sizes": [64], "alpha": 1.2}, "alpha"),
    ({"network": AB, "sizes": [128, 64]}, "increasing"),
    ({"network": AB, "sizes": [64], "n_realizations": 0}, ">= 1"),
    ({"network": AB, "sizes": [64], "mode": "dense"}, "mode"),
    ({"network": AB, "sizes": [2 ** 14], "mode": "full_spectrum"}, "dense cap"),
    ({"network": {"kind": "ab", "p": 0.5, "q": 0.6}, "sizes": [64]}, "p \\+ q"),
    ({"network": {"kind": "edge_list"}}, "exactly one"),
    ({"network": AB, "sizes": [64], "bin_width": 0.3}, "divide"),
    ({"sizes": [64]}, "network"),
])
def test_config_rejects(bad, msg):
    with pytest.raises(ConfigError, match=msg):
        config_from_dict(bad)


def test_config_defaults_and_ladder():
    cfg = config_from_dict({"network": AB, "sizes": [2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13, 2 ** 14]})
    assert cfg.n_realizations == (100, 50, 20, 10, 5)
    assert cfg.alpha == 0.85 and cfg.mode == "pagerank_only"
    assert default_realizations(2 ** 16) == 5
    assert config_from_dict({"network": AB, "sizes": [64], "seeds": 9}).seed == 9


def test_dense_cap_env_controls_config(monkeypatch):
    monkeypatch.setenv("GOOGLEMATRIX_DENSE_CAP", "100")
    with pytest.raises(ConfigError, match="dense cap 100"):
        config_from_dict({"network": AB, "sizes": [128], "mode": "full_spectrum"})


def test_config_round_trip_through_manifest_echo(tmp_path):
    cfg = small_config(tmp_path)
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"format": "googlematrix-manifest/1", "config": cfg.to_dict()}))
    assert load_config(path) == cfg


def test_edge_list_paths_resolve_against_config(tmp_path):
    (tmp_path / "g.txt").write_text("0 1\n1 2\n2 0\n")
    (tmp_path / "c.json").write_text(json.dumps({"network": {"kind": "edge_list", "path": "g.txt"}}))
    cfg = load_config(tmp_path / "c.json")
    assert cfg.network.paths == (str((tmp_path / "g.txt").resolve()),)
    assert cfg.bulk_rule == "top10"
    with pytest.raises(ConfigError, match="randomize"):
        config_from_dict({"network": {"kind": "edge_list", "path": "g.txt"}, "n_realizations": 3}, tmp_path)


# -- seeds and tasks ---------------------------------------------------------


def test_seed_rule():
    assert derive_seed(5, 64, 0) == derive_seed(5, 64, 0)
    seeds = {derive_seed(5, n, r) for n in (64, 128) for r in range(50)}
    assert len(seeds) == 100
    assert derive_seed(5, 64, 1) == int(np.random.SeedSequence(5, spawn_key=(64, 1)).generate_state(1)[0])


def test_plan_tasks(tmp_path):
    tasks = plan_tasks(small_config(tmp_path, n_realizations=[1, 2, 3]))
    assert [(t.key, t.realization) for t in tasks] == [(64, 0), (128, 0), (128, 1), (256, 0), (256, 1), (256, 2)]


def test_task_failure_is_recorded(tmp_path):
    cfg = small_config(tmp_path, max_iter=2)
    res = run_task(cfg, plan_tasks(cfg)[0])
    assert res.status == "error" and res.error_kind == "numerical"
    assert "ConvergenceError" in res.error


# -- full runs ---------------------------------------------------------------


@pytest.fixture(scope="module")
def finished_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("run")
    cfg = small_config(root)
    manifest = run(cfg)
    return root / "out", cfg, manifest


def test_run_outputs_and_manifest(finished_run):
    out, cfg, manifest = finished_run
    assert manifest["format"] == "googlematrix-manifest/1"
    listed = {f["path"] for f in manifest["files"]}
    on_disk = {p.relative_to(out).as_posix() for p in out.rglob("*.csv")}
    assert listed == on_disk
    for f in manifest["files"]:
        assert hashlib.sha256((out / f["path"]).read_bytes()).hexdigest() == f["sha256"]
    assert len(manifest["seeds"]) == 6
    assert {"numpy", "scipy", "numba", "python"} <= set(manifest["versions"])
    assert all("eigenvalues" in t for t in manifest["timings"])
    assert not manifest["failures"]
    for name in ("fig1_spectrum.csv", "fig2_density.csv", "fig2_ipr.csv", "fig4_scaling.csv", "fig4_fits.csv",
                 "fig5_profile.csv", "fig5_cumulative.csv", "summary.csv", "realizations.csv"):
        assert (out / name).is_file(), name


def test_csvs_use_lf_and_dot_decimals(finished_run):
    out, _, _ = finished_run
    for p in out.rglob("*.csv"):
        data = p.read_bytes()
        assert b"\r" not in data
        assert data.endswith(b"\n")
    row = next(csv.DictReader(open(out / "summary.csv")))
    float(row["pagerank_ipr_mean"])


def test_summary_equals_mean_of_realizations(finished_run):
    out, _, _ = finished_run
    rows = list(csv.DictReader(open(out / "realizations.csv")))
    for s in csv.DictReader(open(out / "summary.csv")):
        vals = [float(r["pagerank_ipr"]) for r in rows if r["N"] == s["N"]]
        assert float(s["pagerank_ipr_mean"]) == math.fsum(vals) / len(vals)
        zf = [float(r["zero_fraction"]) for r in rows if r["N"] == s["N"]]
        assert float(s["zero_fraction_mean"]) == pytest.approx(np.mean(zf), rel=1e-15)


def test_spectrum_rows_and_unit_eigenvalue(finished_run):
    out, _, _ = finished_run
    rows = list(csv.DictReader(open(out / "raw" / "N128_e1_r0_spectrum.csv")))
    assert len(rows) == 128
    assert sum(abs(complex(float(r["re"]), float(r["im"])) - 1) < 1e-8 for r in rows) == 1
    assert rows[0]["xi"] != ""


def test_rerun_is_byte_identical_and_job_independent(finished_run, tmp_path):
    out, cfg, _ = finished_run
    again = load_config(out / "manifest.json")
    run(again, jobs=2, output_dir=tmp_path / "again")
    assert csv_digests(tmp_path / "again") == csv_digests(out)


def test_figure_rebuild_matches_run(finished_run, tmp_path):
    out, cfg, _ = finished_run
    import shutil

    copy = tmp_path / "copy"
    shutil.copytree(out, copy)
    for p in copy.glob("fig*.csv"):
        p.unlink()
    for tag in ("fig1", "fig2", "fig4", "fig5"):
        emit_figure(tag, copy)
    assert csv_digests(copy) == csv_digests(out)


def test_figure_missing_inputs_named(tmp_path):
    with pytest.raises(MissingInputError, match="realizations.csv"):
        emit_figure("fig1", tmp_path)
    with pytest.raises(ValueError, match="unknown figure tag"):
        emit_figure("fig9", tmp_path)


def test_fig4_needs_three_sizes(tmp_path):
    cfg = small_config(tmp_path, sizes=[64], mode="pagerank_only")
    run(cfg)
    with pytest.raises(ValueError, match="at least 3"):
        emit_figure("fig4", tmp_path / "out")
    with pytest.raises(MissingInputError, match="full_spectrum"):
        emit_figure("fig1", tmp_path / "out")


def test_fig1_three_cycle(tmp_path):
    (tmp_path / "c3.txt").write_text("0 1\n1 2\n2 0\n")
    cfg = config_from_dict({"network": {"kind": "edge_list", "path": str(tmp_path / "c3.txt")},
                            "mode": "full_spectrum", "output_dir": str(tmp_path / "o")})
    run(cfg)
    rows = list(csv.DictReader(open(tmp_path / "o" / "fig1_spectrum.csv")))
    assert len(rows) == 3
    ims = sorted(float(r["im"]) for r in rows)
    s = 0.85 * math.sin(2 * math.pi / 3)
    assert ims == pytest.approx([-s, 0.0, s], abs=1e-12)
    assert (tmp_path / "o" / "fig3_density.csv").is_file()


def test_randomized_edge_list_spectrum(tmp_path):
    from googlematrix.digraph import AbParams, ab_generate, write_edge_list

    g = ab_generate(AbParams(5, 0.2, 0.1, 200, seed=1))
    with open(tmp_path / "g.txt", "w") as fh:
        write_edge_list(g, fh)
    cfg = config_from_dict({"network": {"kind": "edge_list", "path": str(tmp_path / "g.txt"),
                                        "randomize": 10 * g.n_edges},
                            "n_realizations": 2, "mode": "full_spectrum", "output_dir": str(tmp_path / "o")})
    manifest = run(cfg)
    assert not manifest["failures"]
    rows = list(csv.DictReader(open(tmp_path / "o" / "fig1_spectrum.csv")))
    for r in ("0", "1"):
        lam = [complex(float(x["re"]), float(x["im"])) for x in rows if x["realization"] == r]
        assert sum(abs(v - 1) < 1e-8 for v in lam) == 1
    real = list(csv.DictReader(open(tmp_path / "o" / "realizations.csv")))
    assert real[0]["seed"] != real[1]["seed"]
    assert real[0]["zero_fraction"] != real[1]["zero_fraction"] or real[0]["gamma_c"] != real[1]["gamma_c"]


def test_pagerank_only_memory_guard():
    """At N = 2^17 a dense matrix would need 137 GB; the sparse path stays far below."""
    cfg = config_from_dict({"network": AB, "sizes": [2 ** 17], "n_realizations": 1, "seed": 3})
    tracemalloc.start()
    try:
        res = run_task(cfg, plan_tasks(cfg)[0])
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    assert res.status == "ok", res.error
    n = 2 ** 17
    assert peak < 500e6
    assert peak < 8 * n * n / 200
    assert res.eigenvalues is None
