"""JSON experiment configurations."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..samplers import DistributionSpec

EXPERIMENTS = (
    "baiyin", "covariance", "theorem_b", "symmetrization", "tail_lemma", "weak_lp_tail",
    "omega_events", "gamma_sandwich", "gamma", "decomposition",
)
TOP_LEVEL_KEYS = {"experiment", "grids", "distribution", "trials", "seed", "params", "output"}
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """A configuration file is missing, malformed or inconsistent."""


@dataclass
class ExperimentConfig:
    """Parsed sweep configuration.

    ``grids`` maps a grid name (``n``, ``beta``, ``N``, ...) to a list of
    positive values; cells are the Cartesian product in key order.  ``params``
    holds experiment-specific scalars (``u``, ``r``, ``eps``, ``kappa3``,
    ``kappa4``, ...).
    """

    experiment: str
    grids: dict = field(default_factory=dict)
    distribution: DistributionSpec | None = None
    trials: int = 1
    seed: int | None = None
    params: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not isinstance(self.grids, dict):
            raise ConfigError("grids must be an object of lists")
        for k, vals in self.grids.items():
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"grid {k!r} must be a nonempty list")
            for v in vals:
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                    raise ConfigError(f"grid {k!r} has a non-positive value {v!r}")
        for b in self.grids.get("beta", []):
            if b > 1:
                raise ConfigError(f"beta must lie in (0, 1], got {b}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if self.seed is not None and (isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0):
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        fmt = self.output.get("format", "csv")
        if fmt not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}, got {fmt!r}")

    def grid(self, name, default=None):
        if name in self.grids:
            return list(self.grids[name])
        if default is None:
            raise ConfigError(f"experiment {self.experiment!r} needs grid {name!r}")
        return list(default)

    def param(self, name, default=None):
        return self.params.get(name, default)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("a config must be a JSON object")
        unknown = set(data) - TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' key")
        dist = data.get("distribution")
        try:
            spec = DistributionSpec.from_dict(dist) if dist is not None else None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad distribution: {exc}") from exc
        return cls(
            experiment=data["experiment"],
            grids=data.get("grids", {}),
            distribution=spec,
            trials=data.get("trials", 1),
            seed=data.get("seed"),
            params=dict(data.get("params", {})),
            output=dict(data.get("output", {})),
        )

    @classmethod
    def from_json(cls, path):
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self):
        out = {"experiment": self.experiment, "grids": self.grids, "trials": self.trials,
               "params": self.params, "output": self.output}
        if self.distribution is not None:
            out["distribution"] = self.distribution.to_dict()
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    def require_distribution(self):
        if self.distribution is None:
            raise ConfigError(f"experiment {self.experiment!r} needs a distribution")
        return self.distribution
