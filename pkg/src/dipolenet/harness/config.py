"""JSON sweep configuration."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from dipolenet.activation import SOLVERS
from dipolenet.channel import MODES
from dipolenet.errors import ConfigError, ParameterError
from dipolenet.params import NetworkParams

DEFAULT_N_GRID = tuple(float(n) for n in range(100, 1001, 100))
DEFAULT_REPS = 100
DEFAULT_MASTER_SEED = 1

# config key -> NetworkParams attribute
_PARAM_KEYS = {
    "alpha": "alpha",
    "power_w": "power",
    "noise_var": "noise_var",
    "bandwidth_hz": "bandwidth",
    "r_min": "r_min",
    "gamma_exp": "gamma_exp",
    "mark_radius": "mark_radius",
    "window_area": "window_area",
}
KNOWN_KEYS = frozenset({"n_grid", "reps", "solver", "mode", "master_seed", *_PARAM_KEYS})


@dataclass(frozen=True)
class SweepSettings:
    n_grid: tuple = DEFAULT_N_GRID
    reps: int = DEFAULT_REPS
    solver: str = "tblas"
    mode: str = "pathloss"
    master_seed: int = DEFAULT_MASTER_SEED

    def to_dict(self) -> dict:
        return {"n_grid": list(self.n_grid), "reps": self.reps, "solver": self.solver,
                "mode": self.mode, "master_seed": self.master_seed}


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"config key {key!r} must be a finite number, got {value!r}", key)
    return float(value)


def _integer(key, value, low, high=None):
    if isinstance(value, bool) or not isinstance(value, int) or value < low or (high is not None and value > high):
        bounds = f">= {low}" if high is None else f"in [{low}, {high}]"
        raise ConfigError(f"config key {key!r} must be an integer {bounds}, got {value!r}", key)
    return value


def parse_config(doc: dict) -> tuple[NetworkParams, SweepSettings]:
    """Validate a decoded config document. Missing keys take the simulation defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}", unknown[0])

    settings = {}
    if "n_grid" in doc:
        grid = doc["n_grid"]
        if not isinstance(grid, list) or not grid:
            raise ConfigError("config key 'n_grid' must be a nonempty list", "n_grid")
        grid = tuple(_number("n_grid", n) for n in grid)
        if any(n <= 0 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("config key 'n_grid' must be strictly ascending and positive", "n_grid")
        settings["n_grid"] = grid
    if "reps" in doc:
        settings["reps"] = _integer("reps", doc["reps"], 1)
    if "master_seed" in doc:
        settings["master_seed"] = _integer("master_seed", doc["master_seed"], 0, 2 ** 64 - 1)
    for key, allowed in (("solver", SOLVERS), ("mode", MODES)):
        if key in doc:
            if doc[key] not in allowed:
                raise ConfigError(f"config key {key!r} must be one of {list(allowed)}, got {doc[key]!r}", key)
            settings[key] = doc[key]
    sweep = SweepSettings(**settings)

    kwargs = {"n": sweep.n_grid[0]}
    for key, attr in _PARAM_KEYS.items():
        if key in doc:
            kwargs[attr] = _number(key, doc[key])
    try:
        params = NetworkParams(**kwargs)
    except ParameterError as exc:
        # NetworkParams messages start with the offending attribute name
        attr = str(exc).split()[0]
        key = next((k for k, a in _PARAM_KEYS.items() if a == attr), attr)
        raise ConfigError(f"config key {key!r}: {exc}", key) from exc
    return params, sweep


def load_config(path) -> tuple[NetworkParams, SweepSettings]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_config(doc)
