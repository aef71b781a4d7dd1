"""Exact-sign geometric predicates with floating-point filters.

All decisions that affect combinatorics (Gabriel tests, collinearity) go
through these. The fast path evaluates the predicate in float64 and accepts
the sign when the magnitude clears a conservative error bound; otherwise the
predicate is re-evaluated in exact rational arithmetic (doubles are dyadic
rationals, so Fraction conversion is lossless).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

# Conservative relative filter for the diametral-disk quadratic form. The
# float expression has a handful of multiply-adds, so ~1e-13 relative slack
# is far above any accumulated rounding at float64 precision.
_FILTER = 1e-13


def diametral_sign(px: float, py: float, qx: float, qy: float, zx: float, zy: float) -> int:
    """Sign of |z - m|^2 - |pq/2|^2 where m is the midpoint of pq.

    Returns -1 if z lies strictly inside the diametral disk of segment pq,
    +1 if strictly outside, 0 if exactly on the circle.
    """
    ax = 2.0 * zx - px - qx
    ay = 2.0 * zy - py - qy
    bx = qx - px
    by = qy - py
    lhs = ax * ax + ay * ay
    rhs = bx * bx + by * by
    d = lhs - rhs
    scale = lhs + rhs
    if abs(d) > _FILTER * scale:
        return -1 if d < 0.0 else 1
    return _diametral_sign_exact(px, py, qx, qy, zx, zy)


def _diametral_sign_exact(px, py, qx, qy, zx, zy) -> int:
    px, py, qx, qy, zx, zy = (Fraction(v) for v in (px, py, qx, qy, zx, zy))
    ax = 2 * zx - px - qx
    ay = 2 * zy - py - qy
    bx = qx - px
    by = qy - py
    d = ax * ax + ay * ay - bx * bx - by * by
    if d < 0:
        return -1
    if d > 0:
        return 1
    return 0


def all_collinear(points: np.ndarray) -> bool:
    """Exact test that every point lies on one line.

    Used only on the rare fallback path after Qhull refuses an input, so the
    rational arithmetic cost does not matter.
    """
    n = len(points)
    if n <= 2:
        return True
    x0 = Fraction(float(points[0, 0]))
    y0 = Fraction(float(points[0, 1]))
    dx1 = Fraction(float(points[1, 0])) - x0
    dy1 = Fraction(float(points[1, 1])) - y0
    for k in range(2, n):
        dxk = Fraction(float(points[k, 0])) - x0
        dyk = Fraction(float(points[k, 1])) - y0
        if dx1 * dyk - dy1 * dxk != 0:
            return False
    return True
