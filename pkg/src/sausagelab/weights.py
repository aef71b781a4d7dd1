"""Piecewise-polynomial test weights on a compact radius window.

Weights are stored as polynomials of degree at most 3 on a partition of the
window, so every integral used downstream has a closed-form antiderivative
and acceptance checks carry no quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .topology import RadiusWindow

__all__ = [
    "TestWeight",
    "indicator_weight",
    "ramp_up_weight",
    "ramp_down_weight",
    "hat_weight",
    "smoothstep_weight",
    "builtin_weights",
]


def _piece_sup(lo: float, hi: float, coeffs: np.ndarray) -> float:
    """Exact sup of |c0 + c1 r + c2 r^2 + c3 r^3| on [lo, hi].

    Candidates are the endpoints and the real roots of the derivative
    (a quadratic), so no sampling is involved.
    """
    c0, c1, c2, c3 = coeffs
    cands = [lo, hi]
    # roots of 3 c3 r^2 + 2 c2 r + c1
    a, b, c = 3.0 * c3, 2.0 * c2, c1
    if abs(a) > 0.0:
        disc = b * b - 4.0 * a * c
        if disc >= 0.0:
            sq = np.sqrt(disc)
            cands.extend([(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)])
    elif abs(b) > 0.0:
        cands.append(-c / b)
    vals = [
        abs(c0 + r * (c1 + r * (c2 + r * c3)))
        for r in cands
        if lo - 1e-15 <= r <= hi + 1e-15
    ]
    return float(max(vals))


@dataclass(frozen=True)
class TestWeight:
    """A weight psi on [r0, r1], polynomial of degree <= 3 per piece.

    ``breaks`` has k+1 increasing entries partitioning the window;
    ``coeffs[i]`` holds (c0, c1, c2, c3) for the i-th piece, in the global
    radius variable. Outside the window psi is zero.
    """

    window: RadiusWindow
    breaks: np.ndarray
    coeffs: np.ndarray
    name: str = "weight"
    sup_norm: float = field(init=False, default=0.0)

    def __post_init__(self):
        breaks = np.asarray(self.breaks, dtype=np.float64)
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if breaks.ndim != 1 or breaks.size < 2:
            raise InvalidParameterError("breaks must hold at least two radii")
        if coeffs.shape != (breaks.size - 1, 4):
            raise InvalidParameterError(
                f"coeffs shape {coeffs.shape} does not match {breaks.size - 1} pieces")
        if not np.all(np.diff(breaks) > 0):
            raise InvalidParameterError("breaks must be strictly increasing")
        w = self.window
        if abs(breaks[0] - w.r0) > 1e-12 or abs(breaks[-1] - w.r1) > 1e-12:
            raise InvalidParameterError("pieces must partition [r0, r1] exactly")
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "coeffs", coeffs)
        sup = max(
            _piece_sup(breaks[i], breaks[i + 1], coeffs[i])
            for i in range(breaks.size - 1)
        )
        object.__setattr__(self, "sup_norm", sup)

    def __call__(self, r) -> np.ndarray:
        """Evaluate psi(r), zero outside the window (vectorized)."""
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros_like(r)
        inside = (r >= self.breaks[0]) & (r <= self.breaks[-1])
        idx = np.clip(np.searchsorted(self.breaks, r, side="right") - 1,
                      0, self.breaks.size - 2)
        c = self.coeffs[idx]
        val = c[..., 0] + r * (c[..., 1] + r * (c[..., 2] + r * c[..., 3]))
        out[inside] = val[inside]
        return out

    def _antiderivative(self, r: np.ndarray, idx: np.ndarray) -> np.ndarray:
        c = self.coeffs[idx]
        return r * (c[..., 0] + r * (c[..., 1] / 2.0
                                     + r * (c[..., 2] / 3.0 + r * c[..., 3] / 4.0)))

    def integrate(self, a, b) -> np.ndarray:
        """Exact integral of psi over [a, b] clipped to the window.

        Accepts scalars or arrays; intervals with b <= a contribute 0.
        """
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        a, b = np.broadcast_arrays(a, b)
        total = np.zeros(a.shape, dtype=np.float64)
        for i in range(self.breaks.size - 1):
            lo = np.clip(a, self.breaks[i], self.breaks[i + 1])
            hi = np.clip(b, self.breaks[i], self.breaks[i + 1])
            hi = np.maximum(hi, lo)
            ii = np.full(a.shape, i, dtype=np.intp)
            total += self._antiderivative(hi, ii) - self._antiderivative(lo, ii)
        return total if total.ndim else float(total)

    def __add__(self, other: "TestWeight") -> "TestWeight":
        if not isinstance(other, TestWeight):
            return NotImplemented
        if (abs(self.window.r0 - other.window.r0) > 1e-12
                or abs(self.window.r1 - other.window.r1) > 1e-12):
            raise InvalidParameterError("can only add weights on the same window")
        breaks = np.unique(np.concatenate([self.breaks, other.breaks]))
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        idx_a = np.clip(np.searchsorted(self.breaks, mids) - 1, 0, self.coeffs.shape[0] - 1)
        idx_b = np.clip(np.searchsorted(other.breaks, mids) - 1, 0, other.coeffs.shape[0] - 1)
        coeffs = self.coeffs[idx_a] + other.coeffs[idx_b]
        return TestWeight(self.window, breaks, coeffs,
                          name=f"{self.name}+{other.name}")

    def __mul__(self, scalar: float) -> "TestWeight":
        return TestWeight(self.window, self.breaks, self.coeffs * float(scalar),
                          name=f"{scalar}*{self.name}")

    __rmul__ = __mul__


def indicator_weight(window: RadiusWindow) -> TestWeight:
    """psi = 1 on the window."""
    breaks = np.array([window.r0, window.r1])
    coeffs = np.array([[1.0, 0.0, 0.0, 0.0]])
    return TestWeight(window, breaks, coeffs, name="indicator")


def ramp_up_weight(window: RadiusWindow) -> TestWeight:
    """Linear ramp from 0 at r0 to 1 at r1."""
    r0, r1 = window.r0, window.r1
    s = 1.0 / (r1 - r0)
    breaks = np.array([r0, r1])
    coeffs = np.array([[-r0 * s, s, 0.0, 0.0]])
    return TestWeight(window, breaks, coeffs, name="ramp_up")


def ramp_down_weight(window: RadiusWindow) -> TestWeight:
    """Linear ramp from 1 at r0 down to 0 at r1."""
    r0, r1 = window.r0, window.r1
    s = 1.0 / (r1 - r0)
    breaks = np.array([r0, r1])
    coeffs = np.array([[r1 * s, -s, 0.0, 0.0]])
    return TestWeight(window, breaks, coeffs, name="ramp_down")


def hat_weight(window: RadiusWindow) -> TestWeight:
    """Piecewise-linear hat: 0 at the window edges, 1 at the midpoint."""
    r0, r1 = window.r0, window.r1
    mid = 0.5 * (r0 + r1)
    s = 2.0 / (r1 - r0)
    breaks = np.array([r0, mid, r1])
    coeffs = np.array([
        [-r0 * s, s, 0.0, 0.0],
        [r1 * s, -s, 0.0, 0.0],
    ])
    return TestWeight(window, breaks, coeffs, name="hat")


def smoothstep_weight(window: RadiusWindow) -> TestWeight:
    """Cubic smoothstep 3u^2 - 2u^3 with u = (r - r0)/(r1 - r0).

    Rises from 0 to 1 with zero slope at both window edges; a single cubic
    piece, so still exactly integrable.
    """
    r0, r1 = window.r0, window.r1
    w = r1 - r0
    # psi(r) = a (r-r0)^2 + b (r-r0)^3 expanded in powers of r
    a = 3.0 / w**2
    b = -2.0 / w**3
    c0 = a * r0**2 - b * r0**3
    c1 = -2.0 * a * r0 + 3.0 * b * r0**2
    c2 = a - 3.0 * b * r0
    c3 = b
    breaks = np.array([r0, r1])
    coeffs = np.array([[c0, c1, c2, c3]])
    return TestWeight(window, breaks, coeffs, name="smooth")


_BUILTINS = {
    "indicator": indicator_weight,
    "ramp_up": ramp_up_weight,
    "ramp_down": ramp_down_weight,
    "hat": hat_weight,
    "smooth": smoothstep_weight,
}


def builtin_weights(window: RadiusWindow, names=None) -> list[TestWeight]:
    """Construct named built-in weights; default is the full family of five."""
    if names is None:
        names = ["indicator", "hat", "ramp_up", "ramp_down", "smooth"]
    out = []
    for n in names:
        if n not in _BUILTINS:
            raise InvalidParameterError(
                f"unknown weight '{n}'; choose from {sorted(_BUILTINS)}")
        out.append(_BUILTINS[n](window))
    return out
