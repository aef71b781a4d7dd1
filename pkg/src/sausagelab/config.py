"""Experiment configuration: a single TOML file drives every run.

All numeric defaults are desk-scale. Seeds for calibration and evaluation
must differ; replica streams are derived as (master_seed, replica_index),
so distinct masters guarantee disjoint randomness.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field, asdict
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .errors import InvalidParameterError, SeedOverlapError
from .paths import Drift
from .topology import RadiusWindow
from .regeneration import RegenerationParams
from .weights import TestWeight, builtin_weights

logger = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "load_config", "default_dt"]


def default_dt(r0: float) -> float:
    """Step size keeping P(one step exceeds r0/4) below 1e-6."""
    return (r0 / 4.0) ** 2 / 36.0


@dataclass
class ExperimentConfig:
    # model
    mu: tuple = (1.0, 0.0)
    t: float = 200.0
    dt: float | None = None
    max_spacing: float | None = None
    confirm_margin: float = 30.0
    # window and weights
    r0: float = 0.5
    r1: float = 1.0
    weight_names: tuple = ("indicator", "hat", "ramp_up", "ramp_down", "smooth")
    custom_weights: tuple = ()
    # regeneration
    level_spacing: float = 1.0
    backtrack: float = 0.5
    t_confirm: float | None = 20.0
    osc_grid: int = 16
    drop_initial_cycles: int = 1
    calibration_cycles: int = 24
    calibration_horizon: float = 80.0
    # replicas and seeds
    n_calibration: int = 2000
    n_evaluation: int = 2000
    seed_calibration: int = 20250801
    seed_evaluation: int = 20250802
    # rasterization
    cell_divisor: float = 16.0
    # diagnostics
    renewal_t_grid: tuple = (25.0, 50.0, 100.0, 200.0)
    functional_s_grid: tuple = (0.25, 0.5, 1.0)
    # surrogate mode
    surrogate: bool = False
    surrogate_rho: float = 0.7
    surrogate_t: float = 100.0
    surrogate_calibration_t: float = 2000.0
    # orchestration
    workers: int = 1
    out_dir: str = "out"
    check_ks_max: float = 0.05
    store_paths: bool = True

    def __post_init__(self):
        if self.dt is None:
            self.dt = default_dt(self.r0)
        if self.max_spacing is None:
            self.max_spacing = self.r0 / 4.0
        self.validate()

    def validate(self):
        if len(self.mu) != 2 or float(np.hypot(*self.mu)) == 0.0:
            raise InvalidParameterError("mu must be a nonzero planar vector")
        for name, v in [("t", self.t), ("dt", self.dt),
                        ("max_spacing", self.max_spacing),
                        ("level_spacing", self.level_spacing),
                        ("backtrack", self.backtrack),
                        ("cell_divisor", self.cell_divisor),
                        ("calibration_horizon", self.calibration_horizon)]:
            if v <= 0:
                raise InvalidParameterError(f"{name} must be positive")
        if not 0 < self.r0 < self.r1:
            raise InvalidParameterError("window must satisfy 0 < r0 < r1")
        if self.confirm_margin < 0:
            raise InvalidParameterError("confirm_margin must be nonnegative")
        if self.n_calibration < 0 or self.n_evaluation < 0:
            raise InvalidParameterError("replica counts must be nonnegative")
        if self.calibration_cycles < 2:
            raise InvalidParameterError("calibration_cycles must be at least 2")
        if self.drop_initial_cycles < 0:
            raise InvalidParameterError("drop_initial_cycles must be nonnegative")
        if self.workers < 1:
            raise InvalidParameterError("workers must be at least 1")
        if self.seed_calibration == self.seed_evaluation:
            raise SeedOverlapError(
                "calibration and evaluation master seeds must differ")
        if self.cell_divisor < 16.0:
            raise InvalidParameterError("cell_divisor must be at least 16")
        if self.max_spacing > self.r0 / 4.0 + 1e-12:
            logger.warning("max_spacing %.4g exceeds r0/4 = %.4g; topology may "
                           "miss thin features", self.max_spacing, self.r0 / 4.0)
        if self.dt > default_dt(self.r0):
            logger.warning("dt %.4g exceeds the default rule %.4g; the polygonal "
                           "trace is coarser than the conservative default",
                           self.dt, default_dt(self.r0))

    # derived objects -----------------------------------------------------

    def drift(self) -> Drift:
        return Drift(mu=tuple(float(x) for x in self.mu))

    def window(self) -> RadiusWindow:
        return RadiusWindow(self.r0, self.r1)

    def weights(self) -> list[TestWeight]:
        ws = builtin_weights(self.window(), list(self.weight_names))
        for spec in self.custom_weights:
            ws.append(TestWeight(self.window(),
                                 np.asarray(spec["breaks"], dtype=np.float64),
                                 np.asarray(spec["coeffs"], dtype=np.float64),
                                 name=spec["name"]))
        names = [w.name for w in ws]
        if len(set(names)) != len(names):
            raise InvalidParameterError("weight names must be unique")
        return ws

    def regen_params(self) -> RegenerationParams:
        return RegenerationParams(level_spacing=self.level_spacing,
                                  backtrack=self.backtrack,
                                  t_confirm=self.t_confirm,
                                  osc_grid=self.osc_grid)

    def horizon(self) -> float:
        return self.t + self.confirm_margin

    def cell(self) -> float:
        return self.r1 / self.cell_divisor

    def shift_seeds(self, offset: int) -> "ExperimentConfig":
        """Same experiment with both master seeds shifted by the offset."""
        cfg = ExperimentConfig(**{**asdict(self),
                                  "seed_calibration": self.seed_calibration + offset,
                                  "seed_evaluation": self.seed_evaluation + offset})
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """Hash of the science-relevant fields.

        Orchestration settings (output directory, worker count, check
        threshold, path storage) never change the computed numbers, so two
        runs differing only there share a hash.
        """
        d = self.to_dict()
        for key in ("out_dir", "workers", "check_ks_max", "store_paths"):
            d.pop(key)
        blob = json.dumps(d, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_SECTION_KEYS = {
    "drift": {"mu": "mu"},
    "path": {"t": "t", "dt": "dt", "max_spacing": "max_spacing",
             "confirm_margin": "confirm_margin"},
    "window": {"r0": "r0", "r1": "r1"},
    "weights": {"names": "weight_names"},
    "regeneration": {"level_spacing": "level_spacing", "backtrack": "backtrack",
                     "t_confirm": "t_confirm", "osc_grid": "osc_grid",
                     "drop_initial_cycles": "drop_initial_cycles",
                     "calibration_cycles": "calibration_cycles",
                     "calibration_horizon": "calibration_horizon"},
    "replicas": {"n_calibration": "n_calibration",
                 "n_evaluation": "n_evaluation"},
    "seeds": {"calibration": "seed_calibration",
              "evaluation": "seed_evaluation"},
    "raster": {"cell_divisor": "cell_divisor"},
    "diagnostics": {"renewal_t_grid": "renewal_t_grid",
                    "functional_s_grid": "functional_s_grid"},
    "surrogate": {"enabled": "surrogate", "rho": "surrogate_rho",
                  "t": "surrogate_t",
                  "calibration_t": "surrogate_calibration_t"},
    "run": {"workers": "workers", "out_dir": "out_dir",
            "check_ks_max": "check_ks_max", "store_paths": "store_paths"},
}


def load_config(path) -> ExperimentConfig:
    """Parse a TOML experiment file into an ExperimentConfig."""
    try:
        raw = tomllib.loads(Path(path).read_text())
    except tomllib.TOMLDecodeError as exc:
        raise InvalidParameterError(f"{path}: not valid TOML: {exc}") from exc
    kwargs = {}
    for section, mapping in _SECTION_KEYS.items():
        sub = raw.get(section, {})
        if not isinstance(sub, dict):
            raise InvalidParameterError(f"section [{section}] must be a table")
        for toml_key, attr in mapping.items():
            if toml_key in sub:
                v = sub[toml_key]
                if isinstance(v, list):
                    v = tuple(v)
                kwargs[attr] = v
    custom = raw.get("weights", {}).get("custom", [])
    if custom:
        kwargs["custom_weights"] = tuple(
            {"name": c["name"], "breaks": c["breaks"], "coeffs": c["coeffs"]}
            for c in custom)
    known = set()
    for mapping in _SECTION_KEYS.values():
        known.update(mapping)
    for section, sub in raw.items():
        if section not in _SECTION_KEYS:
            raise InvalidParameterError(f"unknown config section [{section}]")
        for key in sub:
            if key not in _SECTION_KEYS[section] and key != "custom":
                raise InvalidParameterError(
                    f"unknown key '{key}' in section [{section}]")
    return ExperimentConfig(**kwargs)
