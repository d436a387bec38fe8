"""Configuration loading, validation and resolution.

Configs are YAML files with up to five top-level keys: ``experiment``,
``seed``, ``workers``, ``out``, ``tolerances`` and ``params``. Unknown
keys anywhere are rejected rather than ignored, and the resolved config
(with every default materialized) is echoed into each report so a run
can be reproduced from its own output.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from ..errors import ConfigurationError

_TOP_KEYS = {"experiment", "seed", "workers", "out", "tolerances", "params"}


@dataclass
class ResolvedConfig:
    experiment: str
    seed: int = 0
    workers: int = 1
    out: str | None = None
    tolerances: dict = field(default_factory=dict)
    params: object = None


def load_config_file(path: str | Path) -> dict:
    raw = Path(path).read_text()
    data = yaml.safe_load(raw)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a mapping at the top level")
    return data


def _coerce(name: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigurationError(f"param {name!r} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigurationError(f"param {name!r} must be an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"param {name!r} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigurationError(f"param {name!r} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, (list, tuple)):
            raise ConfigurationError(f"param {name!r} must be a list, got {value!r}")
        return list(value)
    return value


def build_params(params_cls: type, overrides: dict | None):
    """Instantiate a params dataclass with validated overrides."""
    defaults = params_cls()
    overrides = overrides or {}
    if not isinstance(overrides, dict):
        raise ConfigurationError("params must be a mapping")
    known = {f.name for f in fields(params_cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigurationError(
            f"unknown params {sorted(unknown)}; known params: {sorted(known)}"
        )
    values = {}
    for f in fields(params_cls):
        if f.name in overrides:
            values[f.name] = _coerce(f.name, overrides[f.name], getattr(defaults, f.name))
        else:
            values[f.name] = getattr(defaults, f.name)
    return params_cls(**values)


def validate_config_dict(data: dict, experiments: dict) -> ResolvedConfig:
    """Validate a raw config mapping against the experiment registry."""
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(
            f"unknown config keys {sorted(unknown)}; allowed: {sorted(_TOP_KEYS)}"
        )
    name = data.get("experiment")
    if not isinstance(name, str) or name not in experiments:
        raise ConfigurationError(
            f"config must name a known experiment, got {name!r}; known: {sorted(experiments)}"
        )
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigurationError(f"seed must be a non-negative integer, got {seed!r}")
    workers = data.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigurationError(f"workers must be a positive integer, got {workers!r}")
    out = data.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigurationError(f"out must be a string path, got {out!r}")
    tolerances = data.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigurationError("tolerances must be a mapping of metric name to value")
    for key, value in tolerances.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"tolerance {key!r} must be a number, got {value!r}")
    params = build_params(experiments[name].params_cls, data.get("params"))
    return ResolvedConfig(
        experiment=name,
        seed=seed,
        workers=workers,
        out=out,
        tolerances={k: float(v) for k, v in tolerances.items()},
        params=params,
    )


def build_config(
    experiments: dict,
    experiment: str | None = None,
    config_path: str | Path | None = None,
    seed: int | None = None,
    workers: int | None = None,
    out: str | None = None,
) -> ResolvedConfig:
    """Merge a config file with command-line overrides into a resolved config."""
    data = load_config_file(config_path) if config_path else {}
    if experiment is not None:
        file_name = data.get("experiment")
        if file_name is not None and file_name != experiment:
            raise ConfigurationError(
                f"config file names experiment {file_name!r} but {experiment!r} was requested"
            )
        data["experiment"] = experiment
    if seed is not None:
        data["seed"] = seed
    if workers is not None:
        data["workers"] = workers
    if out is not None:
        data["out"] = out
    return validate_config_dict(data, experiments)
