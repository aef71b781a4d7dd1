import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sausagelab.topology import RadiusWindow
from sausagelab.weights import (builtin_weights, hat_weight, indicator_weight,
                                ramp_down_weight, ramp_up_weight,
                                smoothstep_weight)

WINDOW = RadiusWindow(0.2, 0.5)
W = WINDOW.r1 - WINDOW.r0


def test_indicator_values_and_integral():
    psi = indicator_weight(WINDOW)
    assert psi(0.3) == 1.0
    assert psi(0.1) == 0.0 and psi(0.7) == 0.0
    assert psi.integrate(0.0, 1.0) == pytest.approx(W, abs=1e-15)
    assert psi.integrate(0.25, 0.35) == pytest.approx(0.1, abs=1e-15)
    assert psi.sup_norm == 1.0


def test_ramps_are_mirror_images():
    up = ramp_up_weight(WINDOW)
    down = ramp_down_weight(WINDOW)
    for r in np.linspace(WINDOW.r0, WINDOW.r1, 11):
        assert up(r) == pytest.approx(down(WINDOW.r1 - (r - WINDOW.r0)), abs=1e-12)
    assert up(WINDOW.r0) == 0.0 and up(WINDOW.r1) == pytest.approx(1.0)
    assert up.integrate(0, 1) == pytest.approx(W / 2, abs=1e-12)
    assert down.integrate(0, 1) == pytest.approx(W / 2, abs=1e-12)


def test_hat_peak_and_integral():
    hat = hat_weight(WINDOW)
    mid = 0.5 * (WINDOW.r0 + WINDOW.r1)
    assert hat(mid) == pytest.approx(1.0)
    assert hat(WINDOW.r0) == 0.0 and hat(WINDOW.r1) == 0.0
    assert hat.integrate(0, 1) == pytest.approx(W / 2, abs=1e-12)
    assert hat.sup_norm == pytest.approx(1.0)


def test_smoothstep_boundary_and_symmetry():
    sm = smoothstep_weight(WINDOW)
    assert sm(WINDOW.r0) == pytest.approx(0.0, abs=1e-15)
    assert sm(WINDOW.r1) == pytest.approx(1.0, abs=1e-12)
    mid = 0.5 * (WINDOW.r0 + WINDOW.r1)
    assert sm(mid) == pytest.approx(0.5, abs=1e-12)
    # smoothstep integral over the window is half the width
    assert sm.integrate(WINDOW.r0, WINDOW.r1) == pytest.approx(W / 2, abs=1e-12)
    # derivative vanishes at both ends: values flatten near the edges
    eps = 1e-6
    assert sm(WINDOW.r0 + eps) < 1e-10
    assert 1.0 - sm(WINDOW.r1 - eps) < 1e-10


def test_builtin_set_names_and_support():
    weights = builtin_weights(WINDOW)
    assert [w.name for w in weights] == [
        "indicator", "hat", "ramp_up", "ramp_down", "smooth"]
    r_out = np.array([0.0, 0.19, 0.51, 2.0])
    for w in weights:
        assert np.all(w(r_out) == 0.0)
        assert w.sup_norm <= 1.0 + 1e-12


def test_algebra_add_and_scale():
    up = ramp_up_weight(WINDOW)
    down = ramp_down_weight(WINDOW)
    s = up + down
    for r in np.linspace(0.1, 0.6, 17):
        assert s(r) == pytest.approx(up(r) + down(r), abs=1e-12)
    half = up * 0.5
    assert half(0.4) == pytest.approx(0.5 * up(0.4), abs=1e-15)
    assert half.integrate(0, 1) == pytest.approx(0.5 * up.integrate(0, 1), abs=1e-14)


def test_vectorized_call_matches_scalar():
    hat = hat_weight(WINDOW)
    rs = np.linspace(0, 1, 37)
    vec = hat(rs)
    assert vec.shape == rs.shape
    for r, v in zip(rs, vec):
        assert v == hat(float(r))


windows = st.tuples(st.floats(0.05, 2.0), st.floats(0.06, 3.0)).map(
    lambda ab: RadiusWindow(min(ab), min(ab) + abs(ab[1] - ab[0]) + 0.01))


@settings(max_examples=60, deadline=None)
@given(windows, st.floats(0, 3), st.floats(0, 3), st.floats(0, 3),
       st.sampled_from(["indicator", "hat", "ramp_up", "ramp_down", "smooth"]))
def test_integral_additivity_property(window, a, b, c, name):
    (psi,) = builtin_weights(window, names=[name])
    lo, mid, hi = sorted([a, b, c])
    whole = psi.integrate(lo, hi)
    split = psi.integrate(lo, mid) + psi.integrate(mid, hi)
    assert split == pytest.approx(whole, abs=1e-12, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(windows, st.floats(0, 3), st.floats(0, 3),
       st.sampled_from(["indicator", "hat", "ramp_up", "ramp_down", "smooth"]))
def test_integral_bounded_by_sup_property(window, a, b, name):
    (psi,) = builtin_weights(window, names=[name])
    lo, hi = sorted([a, b])
    val = psi.integrate(lo, hi)
    assert 0.0 - 1e-12 <= val <= psi.sup_norm * (hi - lo) + 1e-12


@settings(max_examples=40, deadline=None)
@given(windows,
       st.sampled_from(["indicator", "hat", "ramp_up", "ramp_down", "smooth"]),
       st.floats(0, 4))
def test_sup_norm_is_a_true_sup(window, name, r):
    (psi,) = builtin_weights(window, names=[name])
    assert psi(r) <= psi.sup_norm + 1e-12
