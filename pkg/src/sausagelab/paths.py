"""Drifted planar Brownian paths on a uniform time grid.

The base object is a polygonal trace of ``X_t = B_t + mu * t`` sampled at
``t_k = k * dt``.  Increments are exact Gaussians, so the marginal law of the
sampled skeleton is exact for every ``dt``; the polygon in between is linear
interpolation.  Downstream geometry never sees the grid directly, it sees the
resampled trace with a guaranteed maximum spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from .errors import InvalidParameterError

__all__ = [
    "Drift",
    "DriftedPath",
    "ResampledPath",
    "replica_rng",
    "simulate_path",
    "longitudinal_process",
    "transverse_process",
    "resample_to_spacing",
]


@dataclass(frozen=True)
class Drift:
    """Nonzero drift vector with its unit frame.

    Attributes
    ----------
    mu : np.ndarray
        Drift vector, shape (2,), must be nonzero.
    """

    mu: np.ndarray

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        if mu.shape != (2,):
            raise InvalidParameterError(f"drift must be a 2-vector, got shape {mu.shape}")
        if not np.all(np.isfinite(mu)):
            raise InvalidParameterError("drift must be finite")
        if float(np.hypot(mu[0], mu[1])) == 0.0:
            raise InvalidParameterError("drift must be nonzero")
        object.__setattr__(self, "mu", mu)

    @property
    def speed(self) -> float:
        """Euclidean norm of the drift."""
        return float(np.hypot(self.mu[0], self.mu[1]))

    @property
    def unit(self) -> np.ndarray:
        """Unit vector along the drift (longitudinal direction)."""
        return self.mu / self.speed

    @property
    def unit_perp(self) -> np.ndarray:
        """Unit vector orthogonal to the drift, rotated +90 degrees."""
        e = self.unit
        return np.array([-e[1], e[0]])


@dataclass(frozen=True)
class DriftedPath:
    """A sampled drifted Brownian path.

    ``times[k] = k * dt`` and ``points[k]`` is the position at ``times[k]``.
    ``horizon`` equals ``times[-1]`` and is at least the requested horizon.
    """

    times: np.ndarray
    points: np.ndarray
    drift: Drift
    dt: float
    seed: tuple[int, int] | None = field(default=None)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class ResampledPath:
    """Polygonal trace with spacing guarantee.

    Produced by :func:`resample_to_spacing`.  Original samples appear as a
    subsequence (``is_original`` marks them); inserted points subdivide long
    segments evenly and carry linearly interpolated times.
    """

    times: np.ndarray
    points: np.ndarray
    max_spacing: float
    is_original: np.ndarray
    base: DriftedPath

    def prefix_count(self, t: float) -> int:
        """Number of points with time <= t."""
        return int(np.searchsorted(self.times, t, side="right"))

    def __len__(self) -> int:
        return len(self.times)


def replica_rng(master_seed: int, replica_index: int) -> Generator:
    """Counter-based splittable generator for one replica.

    Philox keyed by ``(master_seed, replica_index)`` through a SeedSequence.
    Streams for distinct pairs are independent, and the mapping is stable
    across runs and platforms.
    """
    if replica_index < 0:
        raise InvalidParameterError("replica_index must be >= 0")
    return Generator(Philox(SeedSequence((int(master_seed), int(replica_index)))))


def simulate_path(
    drift: Drift,
    horizon: float,
    dt: float,
    master_seed: int,
    replica_index: int = 0,
    *,
    noise_scale: float = 1.0,
) -> DriftedPath:
    """Simulate ``X_t = B_t + mu t`` on the grid ``k * dt``.

    Parameters
    ----------
    drift : Drift
        Nonzero drift vector.
    horizon : float
        Requested final time, > 0.  The grid runs to ``ceil(horizon/dt)``
        steps, so the actual horizon may exceed the request by < dt.
    dt : float
        Grid step, > 0.
    master_seed, replica_index : int
        Replica stream key, see :func:`replica_rng`.
    noise_scale : float
        Multiplier on the Brownian part.  0 gives the deterministic drift
        line; used as a variance-0 test hook.

    Returns
    -------
    DriftedPath
    """
    if not (horizon > 0.0 and math.isfinite(horizon)):
        raise InvalidParameterError(f"horizon must be positive, got {horizon}")
    if not (dt > 0.0 and math.isfinite(dt)):
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    if noise_scale < 0.0:
        raise InvalidParameterError("noise_scale must be >= 0")

    n_steps = int(math.ceil(horizon / dt - 1e-12))
    n_steps = max(n_steps, 1)
    rng = replica_rng(master_seed, replica_index)
    gauss = rng.standard_normal((n_steps, 2))
    steps = drift.mu[None, :] * dt + noise_scale * math.sqrt(dt) * gauss
    points = np.empty((n_steps + 1, 2))
    points[0] = 0.0
    np.cumsum(steps, axis=0, out=points[1:])
    times = dt * np.arange(n_steps + 1)
    return DriftedPath(times=times, points=points, drift=drift, dt=float(dt),
                       seed=(int(master_seed), int(replica_index)))


def longitudinal_process(path: DriftedPath | ResampledPath, drift: Drift | None = None) -> np.ndarray:
    """Projection of the path onto the drift direction, ``U_t = <X_t, e>``."""
    d = drift if drift is not None else _drift_of(path)
    return path.points @ d.unit


def transverse_process(path: DriftedPath | ResampledPath, drift: Drift | None = None) -> np.ndarray:
    """Projection onto the direction orthogonal to the drift."""
    d = drift if drift is not None else _drift_of(path)
    return path.points @ d.unit_perp


def _drift_of(path: DriftedPath | ResampledPath) -> Drift:
    return path.drift if isinstance(path, DriftedPath) else path.base.drift


def resample_to_spacing(path: DriftedPath, max_spacing: float) -> ResampledPath:
    """Insert points on long segments so consecutive distances are <= max_spacing.

    Each segment of length L > max_spacing is subdivided into
    ``ceil(L / max_spacing)`` equal parts.  Original samples are kept verbatim
    and marked in ``is_original``; inserted points get linearly interpolated
    times, so time-prefixes of the resampled trace are well defined.
    """
    if not (max_spacing > 0.0 and math.isfinite(max_spacing)):
        raise InvalidParameterError(f"max_spacing must be positive, got {max_spacing}")

    pts = path.points
    tms = path.times
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    # pieces per segment; guard against float dust at exact multiples
    n_pieces = np.maximum(np.ceil(seg_len / max_spacing - 1e-12).astype(np.int64), 1)
    n_insert = n_pieces - 1
    total = len(pts) + int(n_insert.sum())
    if total == len(pts):
        out_t = tms.copy()
        out_p = pts.copy()
        mask = np.ones(total, dtype=bool)
        return ResampledPath(out_t, out_p, float(max_spacing), mask, path)

    # slot index of each original sample in the output array
    slots = np.zeros(len(pts), dtype=np.int64)
    np.cumsum(n_pieces, out=slots[1:])
    out_p = np.empty((total, 2))
    out_t = np.empty(total)
    mask = np.zeros(total, dtype=bool)
    mask[slots] = True
    out_p[slots] = pts
    out_t[slots] = tms

    ins = np.flatnonzero(n_insert > 0)
    seg_of_insert = np.repeat(ins, n_insert[ins])
    # fraction along the segment: (1..k)/ (k+1 pieces)
    counts = n_insert[ins]
    local = np.concatenate([np.arange(1, c + 1) for c in counts]) if len(ins) else np.empty(0, np.int64)
    frac = local / n_pieces[seg_of_insert]
    out_idx = slots[seg_of_insert] + local
    out_p[out_idx] = pts[seg_of_insert] + frac[:, None] * seg[seg_of_insert]
    out_t[out_idx] = tms[seg_of_insert] + frac * np.diff(tms)[seg_of_insert]

    return ResampledPath(out_t, out_p, float(max_spacing), mask, path)
