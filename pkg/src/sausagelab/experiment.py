"""End-to-end CLT experiment: calibration on one seed stream, evaluation on
a disjoint one, estimator assembly, and all renewal diagnostics.

Replica workers are pure functions of (config, replica index); results are
aggregated in replica order, so a run is deterministic for a given config
regardless of worker count.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .config import ExperimentConfig
from .errors import InvalidParameterError, SeedOverlapError
from .limitstats import (CycleData, center_rewards, covariance_matrix,
                         estimate_rho, find_n_t, green_kubo_variance,
                         ks_normal)
from .observables import PrefixEvaluator
from .paths import resample_to_spacing, simulate_path
from .regeneration import (RegenerationTimes, detect_regenerations,
                           dependence_diagnostics, eta_tail_diagnostic,
                           extract_cycles, stationarity_diagnostic)
from .surrogate import (SURROGATE_WEIGHT_NAME, simulate_surrogate_replica,
                        surrogate_exact_variance)

logger = logging.getLogger(__name__)

__all__ = ["RenewalRow", "EvalReplica", "CalibrationReplica", "CltReport",
           "clt_experiment", "run_calibration_replica", "run_eval_replica"]


@dataclass(frozen=True)
class RenewalRow:
    """Renewal bookkeeping at one diagnostic time on one replica."""

    t: float
    n_t: int
    tau_nt: float
    a_t: float
    phi_t: np.ndarray
    phi_tau: np.ndarray


@dataclass(frozen=True)
class EvalReplica:
    replica_index: int
    phi_t: np.ndarray
    rows: tuple
    n_cuts: int
    n_unconfirmed: int


@dataclass(frozen=True)
class CalibrationReplica:
    replica_index: int
    cycles: tuple
    telescope_residual: float
    telescope_scale: float


def _truncate_cuts(regen: RegenerationTimes, n_cycles: int) -> RegenerationTimes:
    """Keep at most n_cycles complete cycles' worth of cuts."""
    keep = min(regen.n_complete, n_cycles) + 1
    return RegenerationTimes(taus=regen.taus[:keep],
                             indices=regen.indices[:keep],
                             complete=np.concatenate([
                                 np.ones(keep - 1, dtype=bool), [False]])[:keep],
                             horizon=regen.horizon,
                             n_candidates=regen.n_candidates,
                             n_rejected=regen.n_rejected,
                             n_unconfirmed=regen.n_unconfirmed)


def _surrogate_calibration_data(cfg: ExperimentConfig) -> CycleData:
    """Flat-array calibration stream; avoids per-cycle record objects.

    The surrogate observable is linear inside every cycle, so the telescope
    identity holds by construction and no record-level bookkeeping is
    needed; this keeps multi-million-cycle calibrations cheap.
    """
    etas, deltas, rids = [], [], []
    for idx in range(cfg.n_calibration):
        rep = simulate_surrogate_replica(cfg.seed_calibration, idx,
                                         cfg.surrogate_calibration_t,
                                         cfg.surrogate_rho)
        e = rep.etas[cfg.drop_initial_cycles:]
        d = rep.deltas[cfg.drop_initial_cycles:]
        etas.append(e)
        deltas.append(d)
        rids.append(np.full(e.size, idx, dtype=np.intp))
    return CycleData(eta=np.concatenate(etas),
                     delta=np.concatenate(deltas)[:, None],
                     weight_names=(SURROGATE_WEIGHT_NAME,),
                     replica_id=np.concatenate(rids))


def run_calibration_replica(idx: int, cfg: ExperimentConfig) -> CalibrationReplica:
    """Simulate one calibration path and extract its first cycles."""
    if cfg.surrogate:
        rep = simulate_surrogate_replica(cfg.seed_calibration, idx,
                                         cfg.surrogate_t, cfg.surrogate_rho)
        cycles = rep.cycle_records()
        return CalibrationReplica(idx, tuple(cycles), 0.0, 1.0)
    drift = cfg.drift()
    path = simulate_path(drift, cfg.calibration_horizon, cfg.dt,
                         cfg.seed_calibration, idx)
    regen = detect_regenerations(path, cfg.regen_params())
    regen = _truncate_cuts(regen, cfg.calibration_cycles)
    res = resample_to_spacing(path, cfg.max_spacing)
    ev = PrefixEvaluator(res, cfg.window(), cfg.weights())
    cycles = extract_cycles(res, regen, cfg.weights(), cfg.window(),
                            evaluator=ev, with_oscillation=False)
    # telescope check: partial sums of the increments against Phi at the cuts
    resid, scale = 0.0, 1.0
    if cycles:
        names = list(cycles[0].delta.keys())
        phi0 = ev.phi_vector(regen.taus[0])
        run = np.zeros(len(names))
        for n, c in enumerate(cycles):
            run += np.array([c.delta[k] for k in names])
            phi_n = ev.phi_vector(regen.taus[n + 1])
            resid = max(resid, float(np.max(np.abs(run - (phi_n - phi0)))))
        scale = max(1.0, float(np.max(np.abs(run))))
    return CalibrationReplica(idx, tuple(cycles), resid, scale)


def run_eval_replica(idx: int, cfg: ExperimentConfig) -> EvalReplica:
    """Simulate one evaluation path and record Phi plus renewal states."""
    t_main = cfg.surrogate_t if cfg.surrogate else cfg.t
    grid = sorted({float(s) for s in cfg.renewal_t_grid if s <= t_main} | {t_main})
    if cfg.surrogate:
        rep = simulate_surrogate_replica(cfg.seed_evaluation, idx,
                                         t_main, cfg.surrogate_rho)
        rows = []
        for s in grid:
            n = find_n_t(rep.taus, s)
            rows.append(RenewalRow(t=s, n_t=n, tau_nt=float(rep.taus[n]),
                                   a_t=float(s - rep.taus[n]),
                                   phi_t=np.array([rep.phi_at(s)]),
                                   phi_tau=np.array([rep.phis[n]])))
        return EvalReplica(idx, np.array([rep.phi_at(t_main)]), tuple(rows),
                           n_cuts=rep.etas.size, n_unconfirmed=0)
    drift = cfg.drift()
    path = simulate_path(drift, cfg.horizon(), cfg.dt, cfg.seed_evaluation, idx)
    regen = detect_regenerations(path, cfg.regen_params())
    res = resample_to_spacing(path, cfg.max_spacing)
    ev = PrefixEvaluator(res, cfg.window(), cfg.weights())
    rows = []
    for s in grid:
        n = find_n_t(regen.taus, s)
        tau_n = float(regen.taus[n])
        rows.append(RenewalRow(t=s, n_t=n, tau_nt=tau_n, a_t=s - tau_n,
                               phi_t=ev.phi_vector(s),
                               phi_tau=ev.phi_vector(tau_n)))
    return EvalReplica(idx, ev.phi_vector(t_main), tuple(rows),
                       n_cuts=int(regen.taus.size - 1),
                       n_unconfirmed=regen.n_unconfirmed)


def _run_replicas(fn, n: int, workers: int, label: str) -> list:
    t0 = time.monotonic()
    out = []
    if workers <= 1:
        for i in range(n):
            out.append(fn(i))
            if (i + 1) % 200 == 0:
                logger.info("%s: %d/%d replicas (%.1fs)", label, i + 1, n,
                            time.monotonic() - t0)
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for i, r in enumerate(ex.map(fn, range(n), chunksize=16)):
                out.append(r)
                if (i + 1) % 200 == 0:
                    logger.info("%s: %d/%d replicas (%.1fs)", label, i + 1, n,
                                time.monotonic() - t0)
    logger.info("%s finished: %d replicas in %.1fs", label, n,
                time.monotonic() - t0)
    return out


@dataclass
class CltReport:
    """Full experiment output; arrays are indexed by weight."""

    weight_names: tuple
    n_calibration: int
    n_evaluation: int
    n_cycles_calibration: int
    drop_initial_cycles: int
    surrogate: bool
    t: float
    # calibration estimates
    rho_hat: np.ndarray
    sigma_cyc2: np.ndarray
    sigma_psi2: np.ndarray
    clamped: np.ndarray
    eta_mean: float
    eta_m4: float
    eta_tail_slope: float
    eta_tail_grid: np.ndarray
    eta_tail_surv: np.ndarray
    sigma_matrix: np.ndarray
    psd_ok: bool
    min_eigenvalue: float
    # evaluation
    z_samples: np.ndarray
    ks: np.ndarray
    ks_self: np.ndarray
    ks_exact: np.ndarray | None
    ks_threshold: float
    z_mean: np.ndarray
    direct_var: np.ndarray
    gk_vs_direct_rel: np.ndarray
    degenerate: np.ndarray
    # index-level CLT
    s_index_ks: np.ndarray
    s_index_count: int
    # diagnostics
    lag_rows: list
    stationarity_rows: list
    renewal_table: list
    age_slope: float
    age_slope_se: float
    cramer_wold: list
    telescope_residual: float
    decomposition_residual: float
    centering_residual: float
    n_unconfirmed_total: int
    seeds: tuple = (0, 0)
    config_hash: str = ""


def _renewal_aggregate(evals: list, eta_mean: float, weight_count: int):
    """Group renewal rows by diagnostic time and summarize."""
    by_t: dict[float, list[RenewalRow]] = {}
    for e in evals:
        for row in e.rows:
            by_t.setdefault(row.t, []).append(row)
    table = []
    for s in sorted(by_t):
        rows = by_t[s]
        nts = np.array([r.n_t for r in rows], dtype=np.float64)
        a2 = np.array([r.a_t**2 for r in rows])
        r2 = np.stack([(r.phi_t - r.phi_tau) ** 2 for r in rows])
        table.append({
            "t": s,
            "n_replicas": len(rows),
            "nt_mean": float(nts.mean()),
            "nt_ratio": float(nts.mean() * eta_mean / s),
            "a2_mean": float(a2.mean()),
            "a2_se": float(a2.std(ddof=1) / np.sqrt(a2.size)) if a2.size > 1 else 0.0,
            "r2_over_t": (r2.mean(axis=0) / s).tolist(),
        })
    # trend of E[A_t^2] against t, with propagated standard error
    if len(table) >= 2:
        x = np.array([row["t"] for row in table])
        y = np.array([row["a2_mean"] for row in table])
        se = np.array([row["a2_se"] for row in table])
        xc = x - x.mean()
        sxx = float(np.sum(xc**2))
        slope = float(np.sum(xc * y) / sxx)
        slope_se = float(np.sqrt(np.sum((xc / sxx) ** 2 * se**2)))
    else:
        slope, slope_se = 0.0, 0.0
    return table, slope, slope_se


def clt_experiment(cfg: ExperimentConfig, workers: int | None = None) -> CltReport:
    """Calibrate, evaluate, and assemble the full report.

    Calibration and evaluation use disjoint master seeds (enforced), so the
    slope and variance entering the Z-scores never see the evaluation data.
    """
    if cfg.seed_calibration == cfg.seed_evaluation:
        raise SeedOverlapError("calibration and evaluation seeds overlap")
    if cfg.n_evaluation < 1:
        raise InvalidParameterError("n_evaluation must be at least 1")
    if cfg.n_calibration < 1:
        raise InvalidParameterError("n_calibration must be at least 1")
    workers = cfg.workers if workers is None else workers
    t_main = cfg.surrogate_t if cfg.surrogate else cfg.t

    if cfg.surrogate:
        data = _surrogate_calibration_data(cfg)
        telescope_rel = 0.0
    else:
        cal = _run_replicas(partial(run_calibration_replica, cfg=cfg),
                            cfg.n_calibration, workers, "calibration")
        data = CycleData.from_records([list(c.cycles) for c in cal],
                                      drop_initial=cfg.drop_initial_cycles)
        telescope_rel = max((c.telescope_residual / c.telescope_scale
                             for c in cal), default=0.0)
    rho = estimate_rho(data)
    rewards = center_rewards(data, rho)
    gk = green_kubo_variance(rewards)
    cov = covariance_matrix(rewards)

    m = data.n_weights
    centering = float(np.max(np.abs(rewards.y.sum(axis=0))))
    centering_scale = max(1.0, float(np.max(np.abs(data.delta).sum(axis=0))))
    centering_rel = centering / centering_scale

    # per-replica partial sums for the index-level CLT (replica_id is
    # nondecreasing by construction, so reduceat segments are exact)
    boundaries = np.flatnonzero(np.diff(rewards.replica_id)) + 1
    starts = np.concatenate([[0], boundaries])
    counts = np.diff(np.concatenate([starts, [rewards.n_rewards]]))
    sums = np.add.reduceat(rewards.y, starts, axis=0)
    keep = counts >= 2
    s_samples = sums[keep] / np.sqrt(counts[keep], dtype=np.float64)[:, None]
    s_index_ks = np.array([
        ks_normal(s_samples[:, j], gk.sigma_cyc2[j]) if gk.sigma_cyc2[j] > 0
        else (0.0 if np.allclose(s_samples[:, j], 0) else 1.0)
        for j in range(m)])

    evals = _run_replicas(partial(run_eval_replica, cfg=cfg),
                          cfg.n_evaluation, workers, "evaluation")
    phi_t = np.stack([e.phi_t for e in evals])
    z = (phi_t - rho[None, :] * t_main) / np.sqrt(t_main)

    degenerate = gk.sigma_psi2 <= 0
    ks = np.empty(m)
    for j in range(m):
        if degenerate[j]:
            ks[j] = 0.0 if np.allclose(z[:, j], 0.0) else 1.0
        else:
            ks[j] = ks_normal(z[:, j], float(gk.sigma_psi2[j]))
    # self-centered variant, reported for comparison only
    ks_self = np.empty(m)
    for j in range(m):
        zc = z[:, j] - z[:, j].mean()
        v = float(zc.var(ddof=1))
        ks_self[j] = ks_normal(zc, v) if v > 0 else (0.0 if np.allclose(zc, 0) else 1.0)
    ks_exact = None
    if cfg.surrogate:
        ks_exact = np.array([ks_normal(z[:, j], surrogate_exact_variance())
                             for j in range(m)])

    direct_var = z.var(axis=0, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(gk.sigma_psi2 - direct_var) / direct_var
    rel = np.where(direct_var > 0, rel, np.inf)
    rel = np.where(degenerate & (direct_var == 0), 0.0, rel)

    renewal_table, age_slope, age_slope_se = _renewal_aggregate(
        evals, gk.eta_mean, m)

    # decomposition identity with the calibrated slope, worst case over rows
    decomp = 0.0
    for e in evals:
        for row in e.rows:
            lhs = (row.phi_t - rho * row.t)
            rhs = (row.phi_tau - rho * row.tau_nt) \
                + ((row.phi_t - row.phi_tau) - rho * row.a_t)
            decomp = max(decomp, float(np.max(np.abs(lhs - rhs))))

    # diagnostics degrade gracefully on runs too small to support them
    try:
        lag_rows = dependence_diagnostics(data, max_lag=5)
    except InvalidParameterError:
        lag_rows = []
    try:
        stat_rows = stationarity_diagnostic(data)
    except InvalidParameterError:
        stat_rows = []
    try:
        tail_slope, eta_m4, tail_grid, tail_surv = eta_tail_diagnostic(data.eta)
    except InvalidParameterError:
        tail_slope = float("nan")
        eta_m4 = float(np.mean(data.eta**4)) if data.eta.size else float("nan")
        tail_grid = np.empty(0)
        tail_surv = np.empty(0)

    cw_dim = min(3, m)
    cw_rng = np.random.default_rng(np.uint64(cfg.seed_evaluation) ^ np.uint64(0x5EED5EED))
    cramer_wold = []
    sub = cov.sigma[:cw_dim, :cw_dim]
    for _ in range(5):
        a = cw_rng.standard_normal(cw_dim)
        a /= np.linalg.norm(a)
        var = float(a @ sub @ a)
        proj = z[:, :cw_dim] @ a
        ks_p = ks_normal(proj, var) if var > 0 else (0.0 if np.allclose(proj, 0) else 1.0)
        cramer_wold.append({"a": a.tolist(), "variance": var, "ks": ks_p})

    report = CltReport(
        weight_names=data.weight_names,
        n_calibration=cfg.n_calibration,
        n_evaluation=cfg.n_evaluation,
        n_cycles_calibration=data.n_cycles,
        drop_initial_cycles=cfg.drop_initial_cycles,
        surrogate=cfg.surrogate,
        t=t_main,
        rho_hat=rho,
        sigma_cyc2=gk.sigma_cyc2,
        sigma_psi2=gk.sigma_psi2,
        clamped=gk.clamped,
        eta_mean=gk.eta_mean,
        eta_m4=eta_m4,
        eta_tail_slope=tail_slope,
        eta_tail_grid=tail_grid,
        eta_tail_surv=tail_surv,
        sigma_matrix=cov.sigma,
        psd_ok=cov.psd_ok,
        min_eigenvalue=cov.min_eigenvalue,
        z_samples=z,
        ks=ks,
        ks_self=ks_self,
        ks_exact=ks_exact,
        ks_threshold=1.36 / np.sqrt(cfg.n_evaluation),
        z_mean=z.mean(axis=0),
        direct_var=direct_var,
        gk_vs_direct_rel=rel,
        degenerate=degenerate,
        s_index_ks=s_index_ks,
        s_index_count=int(s_samples.shape[0]),
        lag_rows=lag_rows,
        stationarity_rows=stat_rows,
        renewal_table=renewal_table,
        age_slope=age_slope,
        age_slope_se=age_slope_se,
        cramer_wold=cramer_wold,
        telescope_residual=telescope_rel,
        decomposition_residual=decomp,
        centering_residual=centering_rel,
        n_unconfirmed_total=sum(e.n_unconfirmed for e in evals),
        seeds=(cfg.seed_calibration, cfg.seed_evaluation),
        config_hash=cfg.config_hash(),
    )
    return report
