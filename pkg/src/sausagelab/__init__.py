"""Simulation laboratory for drifted planar Brownian paths: offset-filtration
persistence of the traced sausage, regeneration cycles, and renewal-reward
limit statistics, with rasterization oracles for cross-checking.
"""

__version__ = "0.1.0"

from .config import ExperimentConfig, load_config
from .errors import (InvalidParameterError, ResourceLimitError,
                     SeedOverlapError)
from .experiment import CltReport, clt_experiment
from .limitstats import (CycleData, RewardSequence, center_rewards,
                         covariance_matrix, estimate_rho,
                         green_kubo_variance, ks_normal)
from .paths import (Drift, DriftedPath, ResampledPath, resample_to_spacing,
                    simulate_path)
from .raster import raster_area, rasterization_betti_oracle
from .regeneration import (RegenerationParams, RegenerationTimes,
                           detect_regenerations, extract_cycles)
from .topology import (AlphaComplex, BettiCurve, PersistencePairs,
                       RadiusWindow, betti_curve, build_alpha_complex,
                       persistence_deg1)
from .weights import TestWeight, builtin_weights

__all__ = [
    "__version__",
    "ExperimentConfig", "load_config",
    "InvalidParameterError", "ResourceLimitError", "SeedOverlapError",
    "CltReport", "clt_experiment",
    "CycleData", "RewardSequence", "center_rewards", "covariance_matrix",
    "estimate_rho", "green_kubo_variance", "ks_normal",
    "Drift", "DriftedPath", "ResampledPath", "resample_to_spacing",
    "simulate_path",
    "raster_area", "rasterization_betti_oracle",
    "RegenerationParams", "RegenerationTimes", "detect_regenerations",
    "extract_cycles",
    "AlphaComplex", "BettiCurve", "PersistencePairs", "RadiusWindow",
    "betti_curve", "build_alpha_complex", "persistence_deg1",
    "TestWeight", "builtin_weights",
]
