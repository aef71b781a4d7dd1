"""Regeneration cuts of the drifted path and per-cycle increments.

A cut candidate is the first passage of the longitudinal process over a
ladder level k*L. A candidate at time s is accepted when the observed path
extends at least t_confirm past s and never backtracks more than delta below
its level over the whole observed suffix. The final interval is incomplete
by construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .paths import DriftedPath, ResampledPath, longitudinal_process
from .observables import PrefixEvaluator
from .topology import RadiusWindow
from .weights import TestWeight

logger = logging.getLogger(__name__)

__all__ = [
    "RegenerationParams",
    "RegenerationTimes",
    "CycleRecord",
    "detect_regenerations",
    "exhaustive_regeneration_oracle",
    "extract_cycles",
    "dependence_diagnostics",
    "stationarity_diagnostic",
    "eta_tail_diagnostic",
]


@dataclass(frozen=True)
class RegenerationParams:
    """Ladder construction parameters.

    t_confirm is the minimum observed time past a candidate before its
    no-backtrack condition counts as confirmed; None means 20 * L / speed,
    resolved against the path drift at detection time.
    """

    level_spacing: float = 1.0
    backtrack: float = 0.5
    t_confirm: float | None = None
    burn_in: float = 0.0
    osc_grid: int = 16

    def __post_init__(self):
        if self.level_spacing <= 0:
            raise InvalidParameterError("level_spacing must be positive")
        if self.backtrack <= 0:
            raise InvalidParameterError("backtrack must be positive")
        if self.t_confirm is not None and self.t_confirm < 0:
            raise InvalidParameterError("t_confirm must be nonnegative")
        if self.burn_in < 0:
            raise InvalidParameterError("burn_in must be nonnegative")
        if self.osc_grid < 2:
            raise InvalidParameterError("osc_grid needs at least the two endpoints")

    def resolved_t_confirm(self, speed: float) -> float:
        if self.t_confirm is not None:
            return self.t_confirm
        return 20.0 * self.level_spacing / speed


@dataclass(frozen=True)
class RegenerationTimes:
    """Accepted cuts, always starting at tau_0 = 0.

    complete[j] says whether the interval [taus[j], taus[j+1]) is fully
    observed; the final interval (running to the horizon) never is.
    n_candidates counts ladder first passages, n_rejected those that
    backtracked, n_unconfirmed those cut off by the horizon.
    """

    taus: np.ndarray
    indices: np.ndarray
    complete: np.ndarray
    horizon: float
    n_candidates: int
    n_rejected: int
    n_unconfirmed: int

    def __post_init__(self):
        if self.taus[0] != 0.0:
            raise InvalidParameterError("tau_0 must be 0")
        if np.any(np.diff(self.taus) <= 0):
            raise InvalidParameterError("taus must be strictly increasing")

    @property
    def n_complete(self) -> int:
        return int(np.sum(self.complete))


def _candidate_indices(u: np.ndarray, level_spacing: float) -> np.ndarray:
    """Grid indices of first passages over levels L, 2L, ... (deduplicated).

    When one step crosses several levels the single crossing sample stands
    for all of them.
    """
    run_max = np.maximum.accumulate(u)
    top = int(np.floor(run_max[-1] / level_spacing + 1e-12))
    if top < 1:
        return np.empty(0, dtype=np.intp)
    levels = level_spacing * np.arange(1, top + 1)
    idx = np.searchsorted(run_max, levels, side="left")
    idx = idx[idx < u.size]
    return np.unique(idx)


def detect_regenerations(path: DriftedPath,
                         params: RegenerationParams) -> RegenerationTimes:
    """Scan the path for accepted ladder cuts.

    Vectorized: suffix minima of the longitudinal process decide every
    no-backtrack condition in one pass.
    """
    if path.horizon <= params.burn_in:
        raise InvalidParameterError("path horizon must exceed burn_in")
    u = longitudinal_process(path)
    times = path.times
    horizon = path.horizon
    t_confirm = params.resolved_t_confirm(path.drift.speed)

    cand = _candidate_indices(u, params.level_spacing)
    if params.burn_in > 0:
        cand = cand[times[cand] >= params.burn_in]
    n_candidates = cand.size

    suffix_min = np.minimum.accumulate(u[::-1])[::-1]
    no_backtrack = suffix_min[cand] - u[cand] > -params.backtrack
    confirmable = horizon - times[cand] >= t_confirm

    accepted = cand[no_backtrack & confirmable]
    n_rejected = int(np.sum(~no_backtrack))
    n_unconfirmed = int(np.sum(no_backtrack & ~confirmable))

    accepted = accepted[times[accepted] > 0.0]
    taus = np.concatenate([[0.0], times[accepted]])
    indices = np.concatenate([[0], accepted]).astype(np.intp)
    complete = np.zeros(taus.size, dtype=bool)
    complete[:-1] = True
    return RegenerationTimes(taus=taus, indices=indices, complete=complete,
                             horizon=horizon, n_candidates=n_candidates,
                             n_rejected=n_rejected, n_unconfirmed=n_unconfirmed)


def exhaustive_regeneration_oracle(path: DriftedPath,
                                   params: RegenerationParams) -> RegenerationTimes:
    """Reference detector: plain loops, scanning every candidate's suffix."""
    if path.horizon <= params.burn_in:
        raise InvalidParameterError("path horizon must exceed burn_in")
    u = longitudinal_process(path)
    times = path.times
    horizon = path.horizon
    t_confirm = params.resolved_t_confirm(path.drift.speed)
    L = params.level_spacing

    cand = []
    k = 1
    while True:
        level = k * L
        hit = None
        for i in range(u.size):
            if u[i] >= level:
                hit = i
                break
        if hit is None:
            break
        if hit not in cand:
            cand.append(hit)
        k += 1
    cand = [i for i in cand if times[i] >= params.burn_in]

    accepted = []
    n_rejected = 0
    n_unconfirmed = 0
    for i in cand:
        backtracked = False
        for j in range(i, u.size):
            if u[j] - u[i] <= -params.backtrack:
                backtracked = True
                break
        if backtracked:
            n_rejected += 1
            continue
        if horizon - times[i] < t_confirm:
            n_unconfirmed += 1
            continue
        if times[i] > 0.0:
            accepted.append(i)

    taus = np.concatenate([[0.0], times[accepted]])
    indices = np.concatenate([[0], accepted]).astype(np.intp)
    complete = np.zeros(taus.size, dtype=bool)
    complete[:-1] = True
    return RegenerationTimes(taus=taus, indices=indices, complete=complete,
                             horizon=horizon, n_candidates=len(cand),
                             n_rejected=n_rejected, n_unconfirmed=n_unconfirmed)


@dataclass
class CycleRecord:
    """One complete regeneration cycle with per-weight increments."""

    index: int
    tau_n: float
    tau_np1: float
    eta: float
    delta: dict
    m_osc: dict
    y: dict = field(default_factory=dict)


def extract_cycles(path: ResampledPath, taus: RegenerationTimes,
                   weights: list[TestWeight], window: RadiusWindow,
                   osc_grid: int = 16,
                   evaluator: PrefixEvaluator | None = None,
                   with_oscillation: bool = True) -> list[CycleRecord]:
    """Per-cycle increments Delta_n and within-cycle oscillations M_n.

    Delta_n differences Phi_psi between consecutive cuts; M_n is the max of
    |Phi_psi(t) - Phi_psi(tau_n)| over osc_grid equally spaced times in the
    cycle, endpoints included, so M_n >= |Delta_n| always holds here. Only
    complete cycles are returned.
    """
    if osc_grid < 2:
        raise InvalidParameterError("osc_grid needs at least the two endpoints")
    n_complete = taus.n_complete
    if n_complete < 1 or taus.taus.size < 2:
        logger.warning("fewer than 2 cuts: no complete cycles to extract")
        return []
    if evaluator is None:
        evaluator = PrefixEvaluator(path, window, weights)

    records = []
    phi_prev = evaluator.phi_at(taus.taus[0])
    for n in range(n_complete):
        t0, t1 = float(taus.taus[n]), float(taus.taus[n + 1])
        phi_next = evaluator.phi_at(t1)
        delta = {k: phi_next[k] - phi_prev[k] for k in phi_next}
        m_osc = {k: abs(v) for k, v in delta.items()}
        if with_oscillation:
            for t in np.linspace(t0, t1, osc_grid):
                phi_t = evaluator.phi_at(float(t))
                for k in m_osc:
                    m_osc[k] = max(m_osc[k], abs(phi_t[k] - phi_prev[k]))
        records.append(CycleRecord(index=n, tau_n=t0, tau_np1=t1,
                                   eta=t1 - t0, delta=delta, m_osc=m_osc))
        phi_prev = phi_next
    return records


def _as_replica_lists(cycles) -> list[list[CycleRecord]]:
    if not cycles:
        return []
    if isinstance(cycles[0], CycleRecord):
        return [cycles]
    return list(cycles)


def _flat_series(cycles) -> tuple[dict, np.ndarray]:
    """Flatten cycle input to named value arrays plus replica labels.

    Accepts a cycle list, a list of per-replica lists, or any object with
    eta/delta/replica_id/weight_names arrays (the limit-statistics cycle
    container), so diagnostics run identically on records and flat arrays.
    """
    if hasattr(cycles, "replica_id") and hasattr(cycles, "eta"):
        series = {"eta": np.asarray(cycles.eta, dtype=np.float64)}
        delta = np.asarray(cycles.delta, dtype=np.float64)
        for j, nm in enumerate(cycles.weight_names):
            series[f"delta_{nm}"] = delta[:, j]
        return series, np.asarray(cycles.replica_id, dtype=np.intp)
    replicas = _as_replica_lists(cycles)
    flat = [c for rep in replicas for c in rep]
    if not flat:
        return {}, np.empty(0, dtype=np.intp)
    names = list(flat[0].delta.keys())
    series = {"eta": np.array([c.eta for c in flat])}
    for nm in names:
        series[f"delta_{nm}"] = np.array([c.delta[nm] for c in flat])
    rid = np.concatenate([np.full(len(rep), i, dtype=np.intp)
                          for i, rep in enumerate(replicas) if rep])
    return series, rid


def _lag_corr(x: np.ndarray, replica_id: np.ndarray, lag: int) -> tuple[float, int]:
    """Pearson correlation of in-replica pairs (x_n, x_{n+lag})."""
    if lag == 0:
        return 1.0, x.size
    if x.size <= lag:
        return float("nan"), 0
    same = replica_id[:-lag] == replica_id[lag:]
    a = x[:-lag][same]
    b = x[lag:][same]
    n = a.size
    if n < 2:
        return float("nan"), n
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        return 0.0, n
    r = float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))
    return r, n


def dependence_diagnostics(cycles, max_lag: int = 5, min_cycles: int = 200):
    """Lag correlations of the per-cycle increments and cycle lengths.

    Accepts one replica's cycle list, a list of per-replica lists, or a
    flat-array cycle container; lag pairs never straddle a replica
    boundary. Returns rows (series, lag, correlation, n_pairs, band) with
    band = 3/sqrt(n_pairs).
    """
    series, rid = _flat_series(cycles)
    total = rid.size
    if total < min_cycles:
        raise InvalidParameterError(
            f"need >= {min_cycles} complete cycles, got {total}")
    rows = []
    for key, x in series.items():
        for lag in range(0, max_lag + 1):
            r, n = _lag_corr(x, rid, lag)
            band = 3.0 / np.sqrt(n) if n > 0 else float("nan")
            rows.append((key, lag, r, n, band))
    return rows


def stationarity_diagnostic(cycles):
    """First-half versus second-half mean comparison.

    Returns rows (series, mean_first, mean_second, pooled_se, z) where z is
    the standardized difference of the two half means.
    """
    series, rid = _flat_series(cycles)
    if rid.size < 20:
        raise InvalidParameterError("need >= 20 cycles for the half-split check")
    rows = []
    for key, x in series.items():
        half = x.size // 2
        a, b = x[:half], x[half:]
        se = np.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
        z = float((a.mean() - b.mean()) / se) if se > 0 else 0.0
        rows.append((key, float(a.mean()), float(b.mean()), float(se), z))
    return rows


def eta_tail_diagnostic(etas: np.ndarray, n_grid: int = 12):
    """Fitted slope of the log survival function of the cycle lengths.

    Fits log P(eta > x) against x over a grid spanning the median to the
    upper tail. A clearly negative slope is the expected exponential-moment
    signature. Also reports the empirical fourth moment.
    """
    etas = np.asarray(etas, dtype=np.float64)
    if etas.size < 50:
        raise InvalidParameterError("need >= 50 cycle lengths for the tail fit")
    lo = np.quantile(etas, 0.5)
    hi = np.quantile(etas, 0.99)
    if hi <= lo:
        raise InvalidParameterError("degenerate cycle-length sample")
    grid = np.linspace(lo, hi, n_grid)
    surv = np.array([(etas > x).mean() for x in grid])
    keep = surv > 0
    slope = float(np.polyfit(grid[keep], np.log(surv[keep]), 1)[0])
    m4 = float(np.mean(etas**4))
    return slope, m4, grid[keep], surv[keep]
