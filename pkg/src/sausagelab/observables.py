"""Scalar observables of the offset filtration.

Integrates persistence pairs against test weights, evaluates the integrated
hole count, checks the deterministic area bound, and runs the second-moment
scaling diagnostic. Everything here is exact given the pairs except the
sausage area, which carries an explicit two-sided rasterization error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .paths import ResampledPath
from .raster import raster_area
from .topology import (PersistencePairs, RadiusWindow, build_alpha_complex,
                       persistence_deg1)
from .weights import TestWeight, indicator_weight

logger = logging.getLogger(__name__)

__all__ = [
    "phi_psi",
    "h_t",
    "sausage_area",
    "check_area_bound",
    "AreaBoundCheck",
    "ObservableSample",
    "moment_scaling_diagnostic",
    "PrefixEvaluator",
]


def phi_psi(pairs: PersistencePairs, psi: TestWeight) -> float:
    """Integral of the Betti curve against psi.

    Each pair (b, d) contributes the exact integral of psi over
    [max(b, r0), min(d, r1)], empty intervals contributing zero.
    """
    if pairs.births.size == 0:
        return 0.0
    return float(np.sum(psi.integrate(pairs.births, pairs.deaths)))


def h_t(pairs: PersistencePairs, window: RadiusWindow) -> float:
    """Integrated hole count over the window (psi identically 1)."""
    return phi_psi(pairs, indicator_weight(window))


def sausage_area(points: np.ndarray, r: float, cell: float) -> tuple[float, float]:
    """Rasterized area of the union of radius-r disks around the points.

    Returns (area, error) where the true area lies within area +/- error.
    """
    return raster_area(points, r, cell)


@dataclass(frozen=True)
class AreaBoundCheck:
    lhs: float
    rhs: float
    ok: bool


def check_area_bound(pairs: PersistencePairs, window: RadiusWindow,
                     area_r1: float, area_error: float = 0.0) -> AreaBoundCheck:
    """Check the deterministic inequality H(K) <= |K^{r1}| / (2 pi r0).

    The right side is inflated by the rasterization error bound so a true
    inequality can never fail due to grid resolution.
    """
    lhs = h_t(pairs, window)
    rhs = (area_r1 + area_error) / (2.0 * math.pi * window.r0)
    return AreaBoundCheck(lhs=lhs, rhs=rhs, ok=bool(lhs <= rhs))


@dataclass(frozen=True)
class ObservableSample:
    """One replica's scalar observables at a fixed horizon."""

    t: float
    phi: dict
    h: float
    area_r1: float
    area_error: float
    seed: int
    dt: float
    max_spacing: float


def moment_scaling_diagnostic(samples: list[ObservableSample]):
    """Second-moment growth table for the integrated hole count.

    Groups samples by horizon, reports (t, mean of h^2, mean_h2 / (1 + t^3))
    and the fitted slope of log mean_h2 against log t. Requires at least two
    distinct horizons with at least 100 replicas each.
    """
    groups: dict[float, list[float]] = {}
    for s in samples:
        groups.setdefault(s.t, []).append(s.h)
    if len(groups) < 2:
        raise InvalidParameterError("need samples at >= 2 distinct horizons")
    for t, hs in groups.items():
        if len(hs) < 100:
            raise InvalidParameterError(
                f"need >= 100 replicas per horizon, got {len(hs)} at t={t}")
    ts = np.array(sorted(groups))
    mean_h2 = np.array([np.mean(np.square(groups[t])) for t in ts])
    ratio = mean_h2 / (1.0 + ts**3)
    if np.all(mean_h2 > 0):
        slope = float(np.polyfit(np.log(ts), np.log(mean_h2), 1)[0])
    else:
        slope = float("nan")
    rows = [(float(t), float(m), float(q)) for t, m, q in zip(ts, mean_h2, ratio)]
    return rows, slope


class PrefixEvaluator:
    """Evaluates Phi_psi at path prefixes, with caching.

    A prefix at time t is the set of resampled samples with timestamp <= t,
    plus the interpolated path position at t itself when t falls strictly
    inside a segment. Values are computed by full recomputation of the alpha
    complex on the prefix cloud; the cache only stores results, so repeated
    queries at the same time are free and all callers see identical values.
    """

    def __init__(self, path: ResampledPath, window: RadiusWindow,
                 weights: list[TestWeight]):
        self.path = path
        self.window = window
        self.weights = list(weights)
        self._names = [w.name for w in self.weights]
        if len(set(self._names)) != len(self._names):
            raise InvalidParameterError("weight names must be unique")
        self._cache: dict[float, dict] = {}
        self.n_evaluations = 0

    def prefix_points(self, t: float) -> np.ndarray:
        times = self.path.times
        if t < times[0] - 1e-12:
            raise InvalidParameterError(f"prefix time {t} precedes the path start")
        n = int(np.searchsorted(times, t, side="right"))
        n = max(n, 1)
        pts = self.path.points[:n]
        if n < times.size and t > times[n - 1]:
            t0, t1 = times[n - 1], times[n]
            frac = (t - t0) / (t1 - t0)
            tip = self.path.points[n - 1] + frac * (self.path.points[n] - self.path.points[n - 1])
            pts = np.vstack([pts, tip])
        return pts

    def pairs_at(self, t: float) -> PersistencePairs:
        cx = build_alpha_complex(self.prefix_points(t))
        return persistence_deg1(cx)

    def phi_at(self, t: float) -> dict:
        """Phi_psi(t) for every weight, as {weight name: value}."""
        key = float(t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        pairs = self.pairs_at(t)
        out = {w.name: phi_psi(pairs, w) for w in self.weights}
        self._cache[key] = out
        self.n_evaluations += 1
        return out

    def phi_vector(self, t: float) -> np.ndarray:
        d = self.phi_at(t)
        return np.array([d[n] for n in self._names])
