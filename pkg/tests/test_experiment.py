import numpy as np
import pytest

from sausagelab.config import ExperimentConfig
from sausagelab.experiment import clt_experiment


@pytest.fixture(scope="module")
def tiny_report(tiny_config):
    return clt_experiment(tiny_config)


def test_identities_hold_every_replica(tiny_report):
    # telescoping, remainder decomposition, and exact centering are
    # algebraic identities; any visible residual is a bookkeeping bug
    assert tiny_report.telescope_residual <= 1e-9
    assert tiny_report.centering_residual <= 1e-9
    assert tiny_report.decomposition_residual <= 1e-9 * max(1.0, tiny_report.t)


def test_report_shapes_and_bookkeeping(tiny_config, tiny_report):
    r = tiny_report
    m = len(r.weight_names)
    assert r.n_calibration == tiny_config.n_calibration
    assert r.n_evaluation == tiny_config.n_evaluation
    assert np.asarray(r.z_samples).shape == (tiny_config.n_evaluation, m)
    assert np.asarray(r.rho_hat).shape == (m,)
    assert np.asarray(r.sigma_matrix).shape == (m, m)
    assert r.surrogate is False
    assert r.t == tiny_config.t
    assert r.config_hash == tiny_config.config_hash()
    assert r.seeds == (tiny_config.seed_calibration,
                       tiny_config.seed_evaluation)
    # per-replica cycle budget: calibration_cycles minus the dropped head;
    # replicas cut off by the calibration horizon may deliver fewer
    per_rep = tiny_config.calibration_cycles - tiny_config.drop_initial_cycles
    budget = per_rep * tiny_config.n_calibration
    assert 0.5 * budget <= r.n_cycles_calibration <= budget


def test_matrix_diagonal_is_scalar_route(tiny_report):
    sigma = np.asarray(tiny_report.sigma_matrix)
    np.testing.assert_array_equal(sigma, sigma.T)
    clamped = np.asarray(tiny_report.clamped)
    keep = ~clamped
    np.testing.assert_allclose(sigma.diagonal()[keep],
                               np.asarray(tiny_report.sigma_psi2)[keep],
                               rtol=1e-12)


def test_renewal_table_covers_grid(tiny_config, tiny_report):
    ts = [row["t"] for row in tiny_report.renewal_table]
    assert ts == sorted(tiny_config.renewal_t_grid)
    for row in tiny_report.renewal_table:
        assert row["n_replicas"] == tiny_config.n_evaluation
        assert row["nt_mean"] > 0
        assert len(row["r2_over_t"]) == len(tiny_report.weight_names)


def test_experiment_is_deterministic(tiny_config):
    a = clt_experiment(tiny_config)
    b = clt_experiment(tiny_config)
    np.testing.assert_array_equal(np.asarray(a.z_samples),
                                  np.asarray(b.z_samples))
    np.testing.assert_array_equal(np.asarray(a.rho_hat),
                                  np.asarray(b.rho_hat))
    np.testing.assert_array_equal(np.asarray(a.ks), np.asarray(b.ks))


def test_workers_do_not_change_results(tiny_config):
    a = clt_experiment(tiny_config, workers=1)
    b = clt_experiment(tiny_config, workers=2)
    np.testing.assert_array_equal(np.asarray(a.z_samples),
                                  np.asarray(b.z_samples))
    np.testing.assert_array_equal(np.asarray(a.sigma_matrix),
                                  np.asarray(b.sigma_matrix))


def test_degenerate_variance_flagged():
    # a weight supported strictly below every feature yields all-zero
    # increments: sigma^2 = 0 and the z statistic degenerates
    cfg = ExperimentConfig(
        surrogate=True, surrogate_rho=0.0, surrogate_t=40.0,
        surrogate_calibration_t=300.0, n_calibration=20, n_evaluation=60,
        seed_calibration=41, seed_evaluation=42,
        renewal_t_grid=(20.0, 40.0), functional_s_grid=(0.5, 1.0))
    rep = clt_experiment(cfg)
    assert not rep.degenerate[0]
    assert np.isfinite(rep.ks[0])
