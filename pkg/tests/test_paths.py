import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sausagelab.errors import InvalidParameterError
from sausagelab.paths import (Drift, longitudinal_process, replica_rng,
                              resample_to_spacing, simulate_path,
                              transverse_process)

DRIFT = Drift(mu=(1.0, 0.0))


def test_grid_and_start():
    path = simulate_path(DRIFT, 2.0, 0.25, 7)
    assert path.points[0, 0] == 0.0 and path.points[0, 1] == 0.0
    assert np.allclose(np.diff(path.times), 0.25)
    assert path.times[-1] >= 2.0 - 1e-12


def test_horizon_not_divisible_rounds_up():
    path = simulate_path(DRIFT, 1.0, 0.3, 7)
    assert path.times[-1] == pytest.approx(1.2)
    assert len(path.times) == 5


def test_deterministic_replay():
    a = simulate_path(DRIFT, 5.0, 0.01, 42, 3)
    b = simulate_path(DRIFT, 5.0, 0.01, 42, 3)
    assert np.array_equal(a.points, b.points)


def test_replicas_differ():
    a = simulate_path(DRIFT, 5.0, 0.01, 42, 0)
    b = simulate_path(DRIFT, 5.0, 0.01, 42, 1)
    assert not np.array_equal(a.points, b.points)


def test_replica_rng_keying_is_not_additive():
    # (master, replica) keys must not collide across (master+1, replica-1)
    x = replica_rng(10, 5).standard_normal(4)
    y = replica_rng(11, 4).standard_normal(4)
    assert not np.array_equal(x, y)


def test_noise_scale_zero_is_the_drift_line():
    path = simulate_path(DRIFT, 3.0, 0.5, 0, noise_scale=0.0)
    expect = np.outer(path.times, [1.0, 0.0])
    assert np.allclose(path.points, expect, atol=1e-15)


def test_increment_moments():
    # 4000 replicas of a single step: mean dt*mu, var dt
    dt = 0.7
    rows = np.array([simulate_path(DRIFT, dt, dt, 99, i).points[1]
                     for i in range(4000)])
    inc = rows - np.array([dt, 0.0])
    assert abs(inc[:, 0].mean()) < 4 * np.sqrt(dt / 4000)
    assert abs(inc[:, 1].mean()) < 4 * np.sqrt(dt / 4000)
    assert np.var(inc[:, 0]) == pytest.approx(dt, rel=0.1)
    assert np.var(inc[:, 1]) == pytest.approx(dt, rel=0.1)


def test_longitudinal_and_transverse_are_projections():
    drift = Drift(mu=(3.0, 4.0))
    path = simulate_path(drift, 2.0, 0.1, 5)
    u = longitudinal_process(path)
    v = transverse_process(path)
    e = np.array([0.6, 0.8])
    assert np.allclose(u, path.points @ e)
    assert np.allclose(v, path.points @ np.array([-0.8, 0.6]))
    assert np.allclose(u**2 + v**2, (path.points**2).sum(axis=1))


def test_zero_drift_rejected():
    with pytest.raises(InvalidParameterError):
        Drift(mu=(0.0, 0.0))


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_bad_horizon_rejected(bad):
    with pytest.raises(InvalidParameterError):
        simulate_path(DRIFT, bad, 0.1, 0)


def test_resample_respects_spacing():
    path = simulate_path(DRIFT, 10.0, 0.2, 17)
    res = resample_to_spacing(path, 0.15)
    seg = np.diff(res.points, axis=0)
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    assert lengths.max() <= 0.15 + 1e-12


def test_resample_keeps_original_samples():
    path = simulate_path(DRIFT, 4.0, 0.1, 3)
    res = resample_to_spacing(path, 0.05)
    # every original time survives with its exact position
    idx = np.searchsorted(res.times, path.times)
    assert np.allclose(res.times[idx], path.times)
    assert np.array_equal(res.points[idx], path.points)


def test_resample_points_lie_on_segments():
    path = simulate_path(DRIFT, 2.0, 0.5, 11)
    res = resample_to_spacing(path, 0.01)
    k = np.searchsorted(path.times, res.times, side="right") - 1
    k = np.clip(k, 0, len(path.times) - 2)
    t0 = path.times[k]
    frac = (res.times - t0) / (path.times[k + 1] - t0)
    expect = path.points[k] + frac[:, None] * (path.points[k + 1] - path.points[k])
    assert np.allclose(res.points, expect, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    horizon=st.floats(0.3, 8.0),
    dt=st.floats(0.01, 0.5),
    spacing=st.floats(0.02, 0.4),
    seed=st.integers(0, 2**31),
    mu=st.tuples(st.floats(-2, 2), st.floats(-2, 2)).filter(
        lambda m: m[0] ** 2 + m[1] ** 2 > 1e-4),
)
def test_resample_invariants(horizon, dt, spacing, seed, mu):
    path = simulate_path(Drift(mu=mu), horizon, dt, seed)
    res = resample_to_spacing(path, spacing)
    assert np.all(np.diff(res.times) > 0)
    assert res.times[0] == path.times[0]
    assert res.times[-1] == path.times[-1]
    seg = np.diff(res.points, axis=0)
    assert np.hypot(seg[:, 0], seg[:, 1]).max() <= spacing + 1e-9
