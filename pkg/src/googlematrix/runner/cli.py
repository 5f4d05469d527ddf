"""Command-line entry point ``googlematrix``.

Subcommands::

    generate  write the configured AB graphs as edge lists plus degree tables
    pagerank  run the pipeline with PageRank only (sparse, sizes up to 2^19)
    spectrum  run the pipeline with full dense spectra
    scan      run the pipeline in the mode given by the config
    figure    rebuild one figure's CSV products from an existing run

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from ..digraph import AbParams, EdgeListError, ab_generate, degree_stats, write_edge_list
from ..gmatrix import DenseCapError
from ..pagerank import ConvergenceError
from ..spectra import SpectrumError
from .config import ConfigError, EdgeListNetwork, ExperimentConfig, load_config
from .figures import FIGURE_TAGS, MissingInputError, emit_figure
from .pipeline import derive_seed, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("googlematrix")


def _common(p: argparse.ArgumentParser, config_required: bool = True):
    p.add_argument("--config", required=config_required, help="JSON experiment config (or a run manifest)")
    p.add_argument("--out", help="output directory (overrides config output_dir)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes (default 1)")
    p.add_argument("--seed", type=int, help="base seed (overrides config seed)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="googlematrix", description="Google matrix experiments on directed networks")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("generate", "write AB graphs as edge lists with degree tables"),
        ("pagerank", "PageRank-only run"),
        ("spectrum", "full-spectrum run"),
        ("scan", "run in the mode set by the config"),
    ):
        _common(sub.add_parser(name, help=helptext))
    fig = sub.add_parser("figure", help="rebuild figure CSVs from a finished run")
    fig.add_argument("tag", choices=FIGURE_TAGS)
    _common(fig, config_required=False)
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    changes = {}
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _generate(cfg: ExperimentConfig) -> int:
    if isinstance(cfg.network, EdgeListNetwork):
        raise ConfigError("generate needs an AB network config")
    out = Path(cfg.output_dir) / "graphs"
    out.mkdir(parents=True, exist_ok=True)
    net = cfg.network
    for n, nr in zip(cfg.sizes, cfg.n_realizations):
        for r in range(nr):
            seed = derive_seed(cfg.seed, n, r)
            graph = ab_generate(AbParams(net.m, net.p, net.q, n, seed))
            with open(out / f"N{n}_r{r}.txt", "w", newline="") as fh:
                write_edge_list(graph, fh)
            with open(out / f"N{n}_r{r}_degrees.csv", "w", newline="") as fh:
                degree_stats(graph).to_csv(fh)
            log.info("N=%d r=%d seed=%d edges=%d", n, r, seed, graph.n_edges)
    return EXIT_OK


def _run(cfg: ExperimentConfig, jobs: int) -> int:
    manifest = run(cfg, jobs=jobs)
    failures = manifest["failures"]
    for f in failures:
        print(f"realization failed: N={f['N']} r={f['realization']}: {f['error']}", file=sys.stderr)
    if any(f["kind"] == "numerical" for f in failures):
        return EXIT_NUMERICAL
    if failures:
        return EXIT_CONFIG
    print(json.dumps({"output_dir": str(Path(cfg.output_dir).resolve()), "files": len(manifest["files"]),
                      "wall_clock": manifest["wall_clock"]}))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "figure":
            if args.out is None:
                raise ConfigError("figure needs --out pointing at a finished run")
            cfg = load_config(args.config) if args.config else None
            for path in emit_figure(args.tag, args.out, cfg):
                print(path)
            return EXIT_OK
        cfg = _load(args)
        if args.command == "generate":
            return _generate(cfg)
        if args.command == "pagerank":
            cfg = dataclasses.replace(cfg, mode="pagerank_only")
        elif args.command == "spectrum":
            if cfg.mode != "full_spectrum":
                from .config import config_from_dict

                d = cfg.to_dict()
                d["mode"] = "full_spectrum"
                d["network"] = {k: v for k, v in d["network"].items() if v is not None}
                if d["network"]["kind"] == "edge_list":
                    d.pop("sizes")
                cfg = config_from_dict(d)  # re-validates the dense cap
        return _run(cfg, args.jobs)
    except (ConfigError, EdgeListError, DenseCapError, MissingInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, SpectrumError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
