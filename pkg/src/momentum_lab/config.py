"""Run configuration: a single JSON document plus dotted-path CLI overrides."""

from __future__ import annotations

import copy
import json

__all__ = ["DEFAULTS", "load_config", "apply_overrides", "parse_override_value"]

DEFAULTS = {
    "dataset": {"synth": {"n": 256, "kappa": 1e4, "seed": 0}},
    "target_column": None,
    "n_subsample": 2048,
    "standardize": True,
    "kernel": {"gamma": 0.1, "lambda": 0.0},
    "tolerance": 1e-7,
    "variants": [{"tag": "cd-nag", "omega": 1.0}],
    "m_grid": [1, 2, 4, 8, 16, 32],
    "k_grid": [16, 64],
    "beta_mode": "practical",
    "seeds": [0],
    "max_iters": 200_000,
    "output_path": "sweep.csv",
    "scheme": "uniform",
    "adaptive": {"warmup": 50, "check_interval": 10, "probe_rows": 100},
}

_KNOWN_KEYS = set(DEFAULTS)


def load_config(path: str | None) -> dict:
    """Defaults merged with the JSON document at ``path`` (if given)."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path) as fh:
            user = json.load(fh)
        unknown = set(user) - _KNOWN_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, value in user.items():
            cfg[key] = value
    return cfg


def parse_override_value(raw: str):
    """JSON when it parses, bare string otherwise (so --kernel.gamma 0.2,
    --dataset.path data.csv and --m_grid [1,2,4] all do the right thing)."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(cfg: dict, pairs: list[tuple[str, str]]) -> dict:
    """Set dotted key paths; each flag name is the key path one-for-one."""
    for dotted, raw in pairs:
        parts = dotted.split(".")
        if parts[0] not in _KNOWN_KEYS:
            raise ValueError(f"unknown config key {dotted!r}")
        node = cfg
        for part in parts[:-1]:
            nxt = node.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                node[part] = nxt
            node = nxt
        node[parts[-1]] = parse_override_value(raw)
    return cfg
