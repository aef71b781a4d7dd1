"""Known-limit surrogate process for end-to-end validation of the harness.

Cycle lengths are Exp(1) and rewards are standard normal, so with the
observable interpolated linearly between cuts the statistic
(Phi(t) - rho t) / sqrt(t) has the exact limit Normal(0, 1) for any slope
rho. The surrogate feeds the same cycle records and estimator path as the
sausage pipeline, so a failure here indicts the harness, not the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .paths import replica_rng
from .regeneration import CycleRecord

__all__ = ["SurrogateReplica", "simulate_surrogate_replica",
           "SURROGATE_WEIGHT_NAME", "surrogate_exact_variance"]

SURROGATE_WEIGHT_NAME = "surrogate"


def surrogate_exact_variance() -> float:
    """Limiting variance of the surrogate statistic: Var(Y)/E[eta] = 1."""
    return 1.0


@dataclass(frozen=True)
class SurrogateReplica:
    """One surrogate path: cuts, cumulative observable, and raw cycles."""

    taus: np.ndarray
    phis: np.ndarray
    etas: np.ndarray
    deltas: np.ndarray
    horizon: float

    def phi_at(self, t: float) -> float:
        """Piecewise-linear observable through the cut points."""
        if t < 0 or t > self.horizon:
            raise InvalidParameterError("t outside the simulated horizon")
        n = int(np.searchsorted(self.taus, t, side="right") - 1)
        if n >= self.etas.size:
            n = self.etas.size - 1
        frac = (t - self.taus[n]) / self.etas[n]
        return float(self.phis[n] + frac * self.deltas[n])

    def cycle_records(self, n_cycles: int | None = None) -> list[CycleRecord]:
        k = self.etas.size if n_cycles is None else min(n_cycles, self.etas.size)
        out = []
        for n in range(k):
            d = {SURROGATE_WEIGHT_NAME: float(self.deltas[n])}
            out.append(CycleRecord(index=n, tau_n=float(self.taus[n]),
                                   tau_np1=float(self.taus[n + 1]),
                                   eta=float(self.etas[n]), delta=d,
                                   m_osc={SURROGATE_WEIGHT_NAME: abs(float(self.deltas[n]))}))
        return out


def simulate_surrogate_replica(master_seed: int, replica_index: int,
                               t: float, rho: float) -> SurrogateReplica:
    """Generate cycles until the cuts safely cover [0, t].

    Delta_n = Y_n + rho * eta_n with Y_n iid Normal(0,1) and eta_n iid
    Exp(1); Phi is 0 at tau_0 = 0 and piecewise linear between cuts.
    """
    if t <= 0:
        raise InvalidParameterError("horizon must be positive")
    rng = replica_rng(master_seed, replica_index)
    etas = []
    total = 0.0
    block = max(32, int(t * 1.3) + 16)
    while total <= t:
        draw = rng.exponential(1.0, size=block)
        etas.append(draw)
        total += float(draw.sum())
    etas = np.concatenate(etas)
    cum = np.cumsum(etas)
    # keep exactly the cycles through the first cut strictly past t
    n_keep = int(np.searchsorted(cum, t, side="right")) + 1
    etas = etas[:n_keep]
    ys = rng.standard_normal(n_keep)
    deltas = ys + rho * etas
    taus = np.concatenate([[0.0], np.cumsum(etas)])
    phis = np.concatenate([[0.0], np.cumsum(deltas)])
    return SurrogateReplica(taus=taus, phis=phis, etas=etas, deltas=deltas,
                            horizon=float(taus[-1]))
