"""Shared fixtures.

The full-scale experiment fixture is session scoped and lazy: only the
acceptance tests request it, so module test runs never pay for it.
"""

import time

import pytest

from sausagelab.config import ExperimentConfig
from sausagelab.experiment import clt_experiment


def acceptance_config() -> ExperimentConfig:
    """The frozen full-scale configuration used by the acceptance tests."""
    return ExperimentConfig(
        t=200.0, dt=0.05, max_spacing=0.05, r0=0.2, r1=0.5,
        calibration_cycles=48, calibration_horizon=100.0,
        n_calibration=2000, n_evaluation=2000, confirm_margin=30.0,
        seed_calibration=20250801, seed_evaluation=20250802,
    )


@pytest.fixture(scope="session")
def full_report():
    """Full 2000 + 2000 replica run; takes over an hour on one core."""
    cfg = acceptance_config()
    t0 = time.perf_counter()
    report = clt_experiment(cfg)
    wall_minutes = (time.perf_counter() - t0) / 60.0
    return report, wall_minutes


@pytest.fixture(scope="session")
def tiny_config() -> ExperimentConfig:
    """Smallest config that clears the estimator sample-size guards."""
    return ExperimentConfig(
        t=12.0, dt=0.05, max_spacing=0.125, r0=0.5, r1=1.0,
        calibration_cycles=14, calibration_horizon=30.0, t_confirm=5.0,
        drop_initial_cycles=0, n_calibration=8, n_evaluation=3,
        confirm_margin=10.0, seed_calibration=101, seed_evaluation=202,
        renewal_t_grid=(6.0, 12.0),
    )
