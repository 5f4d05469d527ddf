"""Experiment configuration (JSON) with strict key checking."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

from ..gmatrix import DEFAULT_ALPHA, dense_cap

__all__ = [
    "ConfigError",
    "AbNetwork",
    "EdgeListNetwork",
    "ExperimentConfig",
    "MANIFEST_FORMAT",
    "load_config",
    "config_from_dict",
    "default_realizations",
]

MANIFEST_FORMAT = "googlematrix-manifest/1"

# realizations per size used for the density/IPR ladder
_LADDER = {2 ** 10: 100, 2 ** 11: 50, 2 ** 12: 20, 2 ** 13: 10, 2 ** 14: 5}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def default_realizations(n: int) -> int:
    return _LADDER.get(n, 5)


@dataclass(frozen=True)
class AbNetwork:
    m: int = 5
    p: float = 0.2
    q: float = 0.1
    kind: str = "ab"


@dataclass(frozen=True)
class EdgeListNetwork:
    paths: tuple[str, ...]
    randomize: int | bool | None = None
    kind: str = "edge_list"


@dataclass(frozen=True)
class ExperimentConfig:
    network: AbNetwork | EdgeListNetwork
    sizes: tuple[int, ...] = ()
    n_realizations: tuple[int, ...] = ()
    alpha: float = DEFAULT_ALPHA
    mode: str = "pagerank_only"
    seed: int = 0
    output_dir: str = "out"
    tol: float = 1e-12
    max_iter: int = 1000
    method: str = "lapack"
    vectors: str | tuple[float, float] = "bulk"
    bulk_window: tuple[float, float] = (3.0, 4.0)
    bulk_rule: str = "window"
    bin_width: float = 0.25
    gamma_max: float = 10.0
    mu_star: float = 0.3

    @property
    def n_entries(self) -> int:
        if isinstance(self.network, EdgeListNetwork):
            return len(self.network.paths)
        return len(self.sizes)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        net = d["network"]
        if net["kind"] == "edge_list":
            net["paths"] = list(net["paths"])
        d["sizes"] = list(d["sizes"])
        d["n_realizations"] = list(d["n_realizations"])
        d["bulk_window"] = list(d["bulk_window"])
        if isinstance(d["vectors"], tuple):
            d["vectors"] = list(d["vectors"])
        return d


def _check_keys(d: dict, allowed: set[str], where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _num(d, key, typ, where, default):
    v = d.get(key, default)
    if typ is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{where}.{key} must be an integer, got {v!r}")
    elif isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return typ(v)


def _pair(v, where):
    if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        raise ConfigError(f"{where} must be a [lo, hi] pair")
    lo, hi = float(v[0]), float(v[1])
    if not lo < hi:
        raise ConfigError(f"{where} must satisfy lo < hi")
    return lo, hi


def config_from_dict(d: dict, base: Path | None = None) -> ExperimentConfig:
    _check_keys(d, {
        "network", "sizes", "n_realizations", "alpha", "mode", "seed", "output_dir", "tol", "max_iter",
        "method", "vectors", "bulk_window", "bulk_rule", "bin_width", "gamma_max", "mu_star", "seeds",
    }, "config")
    if "seeds" in d:
        # accepted spelling for the base seed
        if "seed" in d:
            raise ConfigError("give either 'seed' or 'seeds', not both")
        d = {("seed" if k == "seeds" else k): v for k, v in d.items()}
    if "network" not in d:
        raise ConfigError("config.network is required")
    net = d["network"]
    _check_keys(net, {"kind", "m", "p", "q", "path", "paths", "randomize"}, "network")
    kind = net.get("kind", "ab")
    if kind == "ab":
        _check_keys(net, {"kind", "m", "p", "q"}, "network (ab)")
        network = AbNetwork(_num(net, "m", int, "network", 5), _num(net, "p", float, "network", 0.2),
                            _num(net, "q", float, "network", 0.1))
        if network.m < 1 or not (0 <= network.p <= 1 and 0 <= network.q <= 1) or network.p + network.q >= 1:
            raise ConfigError("network needs m >= 1, p, q in [0, 1] and p + q < 1")
    elif kind == "edge_list":
        _check_keys(net, {"kind", "path", "paths", "randomize"}, "network (edge_list)")
        if ("path" in net) == ("paths" in net):
            raise ConfigError("edge_list network needs exactly one of 'path' or 'paths'")
        raw = [net["path"]] if "path" in net else net["paths"]
        if not raw or not all(isinstance(p, str) for p in raw):
            raise ConfigError("edge_list paths must be strings")
        paths = tuple(str(((base / p) if base is not None else Path(p)).resolve()) for p in raw)
        rnd = net.get("randomize")
        if rnd is not None and not isinstance(rnd, bool) and (not isinstance(rnd, int) or rnd < 0):
            raise ConfigError("network.randomize must be true/false or a swap count")
        network = EdgeListNetwork(paths, rnd)
    else:
        raise ConfigError(f"unknown network kind {kind!r}")

    sizes: tuple[int, ...] = ()
    if kind == "ab":
        raw_sizes = d.get("sizes")
        if not isinstance(raw_sizes, list) or not raw_sizes:
            raise ConfigError("config.sizes must be a nonempty list for AB networks")
        if not all(isinstance(s, int) and not isinstance(s, bool) and s >= network.m for s in raw_sizes):
            raise ConfigError(f"sizes must be integers >= m ({network.m})")
        if any(b <= a for a, b in zip(raw_sizes, raw_sizes[1:])):
            raise ConfigError("sizes must be strictly increasing")
        sizes = tuple(raw_sizes)
    elif "sizes" in d:
        raise ConfigError("sizes are implied by the edge lists; drop config.sizes")
    n_entries = len(sizes) if kind == "ab" else len(network.paths)

    nr = d.get("n_realizations")
    if nr is None:
        nr_t = tuple(default_realizations(s) for s in sizes) if kind == "ab" else (1,) * n_entries
    elif isinstance(nr, int) and not isinstance(nr, bool):
        nr_t = (nr,) * n_entries
    elif isinstance(nr, list) and len(nr) == n_entries and all(isinstance(x, int) for x in nr):
        nr_t = tuple(nr)
    else:
        raise ConfigError("n_realizations must be an integer or one integer per size")
    if min(nr_t) < 1:
        raise ConfigError("n_realizations must be >= 1")
    if kind == "edge_list" and not network.randomize and max(nr_t) > 1:
        raise ConfigError("several realizations of an edge list need network.randomize")

    alpha = _num(d, "alpha", float, "config", DEFAULT_ALPHA)
    if not 0 < alpha < 1:
        raise ConfigError("alpha must lie in (0, 1)")
    mode = d.get("mode", "pagerank_only")
    if mode not in ("pagerank_only", "full_spectrum"):
        raise ConfigError(f"mode must be 'pagerank_only' or 'full_spectrum', got {mode!r}")
    if mode == "full_spectrum" and kind == "ab":
        cap = dense_cap()
        if max(sizes) > cap:
            raise ConfigError(f"full_spectrum mode needs every size <= dense cap {cap}")
    method = d.get("method", "lapack")
    if method not in ("lapack", "francis"):
        raise ConfigError("method must be 'lapack' or 'francis'")
    vectors = d.get("vectors", "bulk")
    if isinstance(vectors, list):
        vectors = _pair(vectors, "config.vectors")
    elif vectors not in ("all", "bulk", "none"):
        raise ConfigError("vectors must be 'all', 'bulk', 'none' or a [lo, hi] gamma window")
    bulk_rule = d.get("bulk_rule", "window" if kind == "ab" else "top10")
    if bulk_rule not in ("window", "top10"):
        raise ConfigError("bulk_rule must be 'window' or 'top10'")
    cfg = ExperimentConfig(
        network=network,
        sizes=sizes,
        n_realizations=nr_t,
        alpha=alpha,
        mode=mode,
        seed=_num(d, "seed", int, "config", 0),
        output_dir=str(d.get("output_dir", "out")),
        tol=_num(d, "tol", float, "config", 1e-12),
        max_iter=_num(d, "max_iter", int, "config", 1000),
        method=method,
        vectors=vectors,
        bulk_window=_pair(d.get("bulk_window", [3.0, 4.0]), "config.bulk_window"),
        bulk_rule=bulk_rule,
        bin_width=_num(d, "bin_width", float, "config", 0.25),
        gamma_max=_num(d, "gamma_max", float, "config", 10.0),
        mu_star=_num(d, "mu_star", float, "config", 0.3),
    )
    if cfg.tol <= 0 or cfg.max_iter < 1:
        raise ConfigError("tol must be positive and max_iter >= 1")
    nb = cfg.gamma_max / cfg.bin_width if cfg.bin_width > 0 else -1
    if nb <= 0 or abs(nb - round(nb)) > 1e-9:
        raise ConfigError("bin_width must be positive and divide gamma_max")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a JSON config, or the config echoed in a run manifest."""
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if isinstance(d, dict) and d.get("format") == MANIFEST_FORMAT:
        d = d["config"]
        return config_from_dict(d)
    return config_from_dict(d, base=path.parent)
