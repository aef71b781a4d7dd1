"""Exact-arithmetic predicate checks against brute rational evaluation."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from sausagelab import predicates


def _diametral_sign_rational(p, q, x):
    # sign of |x - m|^2 - |p - m|^2 with m the midpoint of pq, in exact
    # rational arithmetic on the float values
    px, py = Fraction(p[0]), Fraction(p[1])
    qx, qy = Fraction(q[0]), Fraction(q[1])
    xx, xy = Fraction(x[0]), Fraction(x[1])
    mx, my = (px + qx) / 2, (py + qy) / 2
    d_in = (xx - mx) ** 2 + (xy - my) ** 2
    d_rad = (px - mx) ** 2 + (py - my) ** 2
    diff = d_in - d_rad
    return (diff > 0) - (diff < 0)


coord = st.floats(-8, 8, allow_nan=False, allow_infinity=False, width=32)
point = st.tuples(coord, coord)


@settings(max_examples=300, deadline=None)
@given(point, point, point)
def test_diametral_sign_matches_rational(p, q, x):
    got = predicates.diametral_sign(p[0], p[1], q[0], q[1], x[0], x[1])
    assert got == _diametral_sign_rational(p, q, x)


def test_diametral_sign_exact_boundary():
    # x exactly on the diametral circle of pq: zero, not noise
    assert predicates.diametral_sign(0.0, 0.0, 2.0, 0.0, 1.0, 1.0) == 0


def test_diametral_sign_near_degenerate():
    # a point 1 ulp inside/outside must get the exact answer
    lo = np.nextafter(0.5, 0.0)
    hi = np.nextafter(0.5, 1.0)
    assert predicates.diametral_sign(0.0, 0.0, 1.0, 0.0, 0.5, 0.5) == 0
    assert predicates.diametral_sign(0.0, 0.0, 1.0, 0.0, 0.5, lo) == -1
    assert predicates.diametral_sign(0.0, 0.0, 1.0, 0.0, 0.5, hi) == 1


def test_all_collinear():
    line = np.column_stack([np.arange(5.0), 2.0 * np.arange(5.0)])
    assert predicates.all_collinear(line)
    bent = line.copy()
    bent[3, 1] += 1e-9
    assert not predicates.all_collinear(bent)
    assert predicates.all_collinear(line[:2])
    assert predicates.all_collinear(line[:1])
