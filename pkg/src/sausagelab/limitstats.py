"""Cycle-level estimators: slope, centered rewards, Green-Kubo variance,
covariance matrix, renewal bookkeeping, and KS diagnostics.

Everything operates on plain arrays extracted from cycle records so the same
code path serves both the sausage pipeline and the known-limit surrogate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import InvalidParameterError
from .regeneration import CycleRecord, _as_replica_lists

__all__ = [
    "CycleData",
    "RewardSequence",
    "GreenKuboResult",
    "CovarianceResult",
    "RenewalState",
    "estimate_rho",
    "center_rewards",
    "green_kubo_variance",
    "covariance_matrix",
    "find_n_t",
    "renewal_state",
    "normal_cdf",
    "ks_distance",
    "ks_normal",
    "functional_marginals",
]


@dataclass(frozen=True)
class CycleData:
    """Flat cycle arrays: lengths, per-weight increments, replica labels."""

    eta: np.ndarray
    delta: np.ndarray
    weight_names: tuple
    replica_id: np.ndarray

    def __post_init__(self):
        if self.eta.ndim != 1 or self.delta.ndim != 2:
            raise InvalidParameterError("eta must be (N,), delta must be (N, m)")
        if self.delta.shape[0] != self.eta.size or self.replica_id.size != self.eta.size:
            raise InvalidParameterError("cycle arrays must share their length")
        if self.delta.shape[1] != len(self.weight_names):
            raise InvalidParameterError("delta width must match weight_names")
        if np.any(self.eta <= 0):
            raise InvalidParameterError("cycle lengths must be positive")

    @property
    def n_cycles(self) -> int:
        return self.eta.size

    @property
    def n_weights(self) -> int:
        return len(self.weight_names)

    @classmethod
    def from_records(cls, cycles, drop_initial: int = 0) -> "CycleData":
        """Build from one cycle list or a list of per-replica lists.

        drop_initial removes that many leading cycles from every replica
        (the cycle at tau_0 = 0 is not distributed like the later ones under
        the ladder construction).
        """
        replicas = _as_replica_lists(cycles)
        etas, deltas, rids = [], [], []
        names: tuple | None = None
        for rid, rep in enumerate(replicas):
            rep = rep[drop_initial:]
            if not rep:
                continue
            if names is None:
                names = tuple(rep[0].delta.keys())
            for c in rep:
                etas.append(c.eta)
                deltas.append([c.delta[n] for n in names])
                rids.append(rid)
        if names is None:
            raise InvalidParameterError("no cycles left after drop_initial")
        return cls(eta=np.array(etas), delta=np.array(deltas),
                   weight_names=names, replica_id=np.array(rids, dtype=np.intp))


@dataclass(frozen=True)
class RewardSequence:
    """Centered rewards y = delta - rho * eta, one column per weight."""

    y: np.ndarray
    rho: np.ndarray
    eta_mean: float
    weight_names: tuple
    replica_id: np.ndarray

    @property
    def n_rewards(self) -> int:
        return self.y.shape[0]


def estimate_rho(data: CycleData, min_cycles: int = 30) -> np.ndarray:
    """Ratio-of-sums slope estimate per weight: sum(delta) / sum(eta)."""
    if data.n_cycles < min_cycles:
        raise InvalidParameterError(
            f"need >= {min_cycles} complete cycles, got {data.n_cycles}")
    return data.delta.sum(axis=0) / data.eta.sum()


def center_rewards(data: CycleData, rho: np.ndarray) -> RewardSequence:
    """y_n = delta_n - rho * eta_n per weight.

    With the ratio-of-sums rho from the same cycles the column sums of y
    vanish identically (up to roundoff).
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=np.float64))
    if rho.size != data.n_weights:
        raise InvalidParameterError("rho must supply one slope per weight")
    if not np.all(np.isfinite(rho)):
        raise InvalidParameterError("rho must be finite")
    y = data.delta - np.outer(data.eta, rho)
    return RewardSequence(y=y, rho=rho, eta_mean=float(data.eta.mean()),
                          weight_names=data.weight_names,
                          replica_id=data.replica_id)


def _lag_pairs(replica_id: np.ndarray, lag: int) -> tuple[np.ndarray, np.ndarray]:
    n = replica_id.size
    if lag == 0:
        idx = np.arange(n)
        return idx, idx
    a = np.arange(n - lag)
    b = a + lag
    same = replica_id[a] == replica_id[b]
    return a[same], b[same]


def _lag_cov(y: np.ndarray, replica_id: np.ndarray, lag: int) -> np.ndarray:
    """Cross-covariance matrix C[i, j] = Cov(y_n^i, y_{n+lag}^j).

    Columns are centered by their full-sample means; pairs never straddle a
    replica boundary; denominator is (number of pairs) - 1.
    """
    a, b = _lag_pairs(replica_id, lag)
    if a.size < 2:
        raise InvalidParameterError("not enough in-replica pairs at this lag")
    yc = y - y.mean(axis=0, keepdims=True)
    return yc[a].T @ yc[b] / (a.size - 1)


@dataclass(frozen=True)
class GreenKuboResult:
    sigma_cyc2: np.ndarray
    sigma_psi2: np.ndarray
    clamped: np.ndarray
    eta_mean: float


def green_kubo_variance(rewards: RewardSequence,
                        min_rewards: int = 100) -> GreenKuboResult:
    """sigma_cyc^2 = Var(Y_0) + 2 Cov(Y_0, Y_1) and its per-time version.

    Negative cycle variances are clamped to zero and flagged; the limit
    guarantees nonnegativity but the plug-in estimator does not.
    """
    if rewards.n_rewards < min_rewards:
        raise InvalidParameterError(
            f"need >= {min_rewards} rewards, got {rewards.n_rewards}")
    c0 = np.diag(_lag_cov(rewards.y, rewards.replica_id, 0))
    c1 = np.diag(_lag_cov(rewards.y, rewards.replica_id, 1))
    sigma_cyc2 = c0 + 2.0 * c1
    clamped = sigma_cyc2 < 0.0
    sigma_cyc2 = np.where(clamped, 0.0, sigma_cyc2)
    sigma_psi2 = sigma_cyc2 / rewards.eta_mean
    return GreenKuboResult(sigma_cyc2=sigma_cyc2, sigma_psi2=sigma_psi2,
                           clamped=clamped, eta_mean=rewards.eta_mean)


@dataclass(frozen=True)
class CovarianceResult:
    sigma: np.ndarray
    psd_ok: bool
    min_eigenvalue: float
    eta_mean: float


def covariance_matrix(rewards: RewardSequence,
                      min_rewards: int = 100) -> CovarianceResult:
    """Plug-in limiting covariance per unit time.

    Sigma_ij = [Cov(Y0^i, Y0^j) + Cov(Y0^i, Y1^j) + Cov(Y1^i, Y0^j)] / mean(eta),
    symmetrized by averaging with its transpose. Shares the covariance
    helper with green_kubo_variance, so the diagonal matches the scalar
    estimates exactly.
    """
    if rewards.n_rewards < min_rewards:
        raise InvalidParameterError(
            f"need >= {min_rewards} rewards, got {rewards.n_rewards}")
    c00 = _lag_cov(rewards.y, rewards.replica_id, 0)
    c01 = _lag_cov(rewards.y, rewards.replica_id, 1)
    sigma = (c00 + c01 + c01.T) / rewards.eta_mean
    sigma = 0.5 * (sigma + sigma.T)
    eigs = np.linalg.eigvalsh(sigma)
    min_eig = float(eigs[0])
    psd_ok = bool(min_eig >= -1e-10 * max(np.trace(sigma), 0.0))
    return CovarianceResult(sigma=sigma, psd_ok=psd_ok,
                            min_eigenvalue=min_eig, eta_mean=rewards.eta_mean)


@dataclass(frozen=True)
class RenewalState:
    """Last completed cut index, age, and incomplete-cycle remainder."""

    n_t: int
    a_t: float
    r_t: np.ndarray

    def __post_init__(self):
        if self.n_t < 0 or self.a_t < 0:
            raise InvalidParameterError("renewal state out of range")


def find_n_t(taus: np.ndarray, t: float) -> int:
    """N_t = max{n : tau_n <= t}; taus must start at 0 and be increasing."""
    taus = np.asarray(taus, dtype=np.float64)
    if t < taus[0]:
        raise InvalidParameterError("t precedes tau_0")
    return int(np.searchsorted(taus, t, side="right") - 1)


def renewal_state(taus: np.ndarray, t: float, phi_at_t: np.ndarray,
                  phi_at_tau: np.ndarray) -> RenewalState:
    """Assemble (N_t, A_t, R_t) from the cut list and two Phi evaluations.

    phi_at_tau must be Phi evaluated at tau_{N_t} (use find_n_t first).
    """
    taus = np.asarray(taus, dtype=np.float64)
    n = find_n_t(taus, t)
    a_t = float(t - taus[n])
    r_t = np.atleast_1d(np.asarray(phi_at_t, dtype=np.float64)) \
        - np.atleast_1d(np.asarray(phi_at_tau, dtype=np.float64))
    return RenewalState(n_t=n, a_t=a_t, r_t=r_t)


def normal_cdf(x: np.ndarray, sigma2: float) -> np.ndarray:
    """CDF of Normal(0, sigma2); degenerates to a step at sigma2 = 0."""
    x = np.asarray(x, dtype=np.float64)
    if sigma2 < 0:
        raise InvalidParameterError("variance must be nonnegative")
    if sigma2 == 0.0:
        return (x >= 0.0).astype(np.float64)
    return 0.5 * (1.0 + erf(x / math.sqrt(2.0 * sigma2)))


def ks_distance(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance against a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise InvalidParameterError("no samples")
    f = np.asarray(cdf(x), dtype=np.float64)
    up = np.arange(1, n + 1) / n - f
    dn = f - np.arange(0, n) / n
    return float(max(up.max(), dn.max()))


def ks_normal(samples: np.ndarray, sigma2: float) -> float:
    """KS distance of the samples against Normal(0, sigma2)."""
    return ks_distance(samples, lambda x: normal_cdf(x, sigma2))


def functional_marginals(y_by_replica: np.ndarray, sigma_cyc2: float,
                         s_grid) -> tuple[list, list]:
    """Marginals of the partial-sum process W_n(s) = S_{floor(ns)} / sqrt(n).

    y_by_replica has one reward sequence per row. For each s the replica
    marginals are compared to Normal(0, sigma_cyc2 * s) by KS distance;
    consecutive disjoint increments are checked for vanishing correlation.
    Returns (marginal_rows, increment_rows) with rows
    (s, ks, n_replicas) and (s_lo, s_mid, s_hi, corr, band).
    """
    y = np.asarray(y_by_replica, dtype=np.float64)
    if y.ndim != 2:
        raise InvalidParameterError("y_by_replica must be (replicas, n)")
    n = y.shape[1]
    if n < 1000:
        raise InvalidParameterError("need reward sequences of length >= 1000")
    s_grid = sorted(float(s) for s in s_grid)
    if not s_grid or s_grid[0] <= 0 or s_grid[-1] > 1:
        raise InvalidParameterError("s_grid must lie in (0, 1]")
    csum = np.cumsum(y, axis=1)

    def w_at(s: float) -> np.ndarray:
        k = int(np.floor(n * s))
        if k == 0:
            return np.zeros(y.shape[0])
        return csum[:, k - 1] / np.sqrt(n)

    marginal_rows = []
    for s in s_grid:
        ks = ks_normal(w_at(s), sigma_cyc2 * s)
        marginal_rows.append((s, ks, y.shape[0]))

    increment_rows = []
    pts = [0.0] + s_grid
    band = 3.0 / np.sqrt(y.shape[0])
    for i in range(len(pts) - 2):
        a = w_at(pts[i + 1]) - w_at(pts[i]) if pts[i] > 0 else w_at(pts[i + 1])
        b = w_at(pts[i + 2]) - w_at(pts[i + 1])
        sa, sb = a.std(), b.std()
        corr = float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb)) \
            if sa > 0 and sb > 0 else 0.0
        increment_rows.append((pts[i], pts[i + 1], pts[i + 2], corr, band))
    return marginal_rows, increment_rows
