"""Vectorized Monte Carlo engine for two-tier instances.

Runs many replications of the dynamic or static policy in lock-step: one
arrival uniform and one acceptance uniform are drawn per period for every
path, all decision formulas are evaluated as numpy expressions, and optional
observers collect per-period process statistics (used by the martingale,
stopping-time, and pricing-loss diagnostics).

Each replication is statistically identical to ``sim.run_episode`` with the
same policy; its random stream layout differs (column-major draws from one
generator keyed by the batch seed), so seeds are not interchangeable between
the two engines.  Use the scalar engine when full traces are needed and this
one for estimation at scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Instance
from .hybrid import closed_form_v
from .policy import DynUp2Policy, Policy, StaticPolicy
from .sim import RngStream

__all__ = [
    "BatchResult",
    "StepView",
    "run_batch",
    "CheckpointProcess",
    "PricingLossTracker",
]

_BATCH_STREAM = 0xBA7C4  # keeps batch keys disjoint from per-episode streams


@dataclass
class BatchResult:
    """Per-path outcomes.  tau is the first period whose starting basic stock
    is zero (depleting period + 1), with sentinel T + 1 when the stock never
    runs out; c2_at_tau is the premium stock at the start of period tau and is
    nan on paths that never deplete."""

    revenue: np.ndarray        # (reps,)
    counts: np.ndarray         # (reps, 2) realized arrivals
    tau: np.ndarray            # (reps,)
    c2_at_tau: np.ndarray      # (reps,)

    @property
    def depleted(self) -> np.ndarray:
        return ~np.isnan(self.c2_at_tau)


@dataclass
class StepView:
    """Read-only snapshot handed to observers once per period.

    Stocks are the values entering the period; masks describe the period's
    realized events.
    """

    t: int
    s: int
    c1: np.ndarray
    c2: np.ndarray
    v: np.ndarray
    v_raw: np.ndarray
    arrived1: np.ndarray
    arrived2: np.ndarray
    upgraded: np.ndarray
    declined: np.ndarray
    plain: np.ndarray
    free: np.ndarray


def run_batch(
    instance: Instance,
    policy: Policy,
    reps: int,
    base_seed: int,
    observers=(),
) -> BatchResult:
    """Simulate ``reps`` paths of a two-tier policy in parallel."""
    if instance.n_types != 2:
        raise ValueError("batch engine supports two-tier instances only")
    if not isinstance(policy, (DynUp2Policy, StaticPolicy)):
        raise ValueError("batch engine supports dynup2 and static policies only")
    T = instance.horizon
    lam1, lam2 = instance.arrivals.rates
    r1, r2 = instance.ladder.base_prices
    gap = r2 - r1
    curve = instance.curves[0]
    floor = curve.floor
    v_star = curve.v_star
    dynamic = isinstance(policy, DynUp2Policy)
    if not dynamic:
        static_prop = policy.fixed_price
        static_v = float(curve.accept_prob(static_prop))

    rng = RngStream(seed=base_seed, stream=_BATCH_STREAM).generator()
    c1 = np.full(reps, float(instance.capacities[0]))
    c2 = np.full(reps, float(instance.capacities[1]))
    revenue = np.zeros(reps)
    n1 = np.zeros(reps, dtype=np.int64)
    n2 = np.zeros(reps, dtype=np.int64)
    tau = np.full(reps, T + 1, dtype=np.int64)
    c2_at_tau = np.full(reps, np.nan)

    ones = np.ones(reps)
    for t in range(1, T + 1):
        s = T - t + 1
        u_arrival = rng.random(reps)
        u_accept = rng.random(reps)
        arrived1 = u_arrival < lam1
        arrived2 = ~arrived1 & (u_arrival < lam1 + lam2)
        n1 += arrived1
        n2 += arrived2

        if dynamic:
            v_raw = closed_form_v(c1, c2, lam1 * s, lam2 * s, v_star)
            v = np.clip(v_raw, floor, 1.0)
            fee = np.clip(curve._p(v), 0.0, 1.0) * gap
            can_free = np.maximum(c2 - lam2 * s, 0.0) > 0.5 * lam1 * s
        else:
            v_raw = static_v * ones
            v = v_raw
            fee = static_prop * gap
            can_free = np.ones(reps, dtype=bool)

        has1 = c1 >= 1.0
        has2 = c2 >= 1.0
        offer = arrived1 & has1 & has2
        plain = arrived1 & has1 & ~has2
        free = arrived1 & ~has1 & has2 & can_free
        accept2 = arrived2 & has2
        upgraded = offer & (u_accept < v)
        declined = offer & ~upgraded

        for obs in observers:
            obs.step(
                StepView(
                    t=t,
                    s=s,
                    c1=c1,
                    c2=c2,
                    v=v,
                    v_raw=v_raw,
                    arrived1=arrived1,
                    arrived2=arrived2,
                    upgraded=upgraded,
                    declined=declined,
                    plain=plain,
                    free=free,
                )
            )

        dc1 = plain | declined
        dc2 = accept2 | upgraded | free
        # A period that consumes the last basic unit cannot touch the premium
        # stock (one arrival per period), so c2 entering period t equals the
        # premium stock at the start of period tau = t + 1.
        depleting = dc1 & (c1 == 1.0) & np.isnan(c2_at_tau)
        c2_at_tau[depleting] = c2[depleting]
        tau[depleting] = t + 1
        c1 -= dc1
        c2 -= dc2
        revenue += r2 * accept2 + r1 * (plain | declined | free)
        if dynamic:
            revenue += np.where(upgraded, r1 + fee, 0.0)
        else:
            revenue += upgraded * (r1 + fee)

    counts = np.stack([n1, n2], axis=1)
    return BatchResult(revenue=revenue, counts=counts, tau=tau, c2_at_tau=c2_at_tau)


class CheckpointProcess:
    """Tracks one of the pricing deviation processes at checkpoint periods.

    kind "upper": deviation of the premium-driven bound,
        e_t = v1 - (c2_t / (lam1 s) - lam2 / lam1), zero-mean while the bound
        stays binding in the abundant regime.
    kind "lower": deviation of the basic-driven bound,
        e_t = v1 - (1 - c1_t / (lam1 s)).
    kind "alpha": the compensating zero-drift process built from the scarce
        regime's three event branches, together with e_t = v1 - v_raw_t and
        the running max of |alpha_t - e_t| over the tracked window.

    Paths are frozen (values stop updating) once they leave the intended
    regime, so reported checkpoint means remain those of a stopped process.
    """

    def __init__(
        self,
        kind: str,
        instance: Instance,
        checkpoints,
        reps: int,
        window_end: int | None = None,
    ):
        if kind not in ("upper", "lower", "alpha"):
            raise ValueError(f"unknown process kind: {kind!r}")
        self.kind = kind
        self.lam1, self.lam2 = instance.arrivals.rates
        self.T = instance.horizon
        self.curve = instance.curves[0]
        self.checkpoints = sorted(int(c) for c in checkpoints)
        self.window_end = self.T if window_end is None else int(window_end)
        self.reps = reps
        self.v1: float | None = None
        self.values = np.zeros(reps)          # process value at current t
        self.alpha = np.zeros(reps)
        self.max_gap = np.zeros(reps)
        self.frozen = np.zeros(reps, dtype=bool)
        self.left_case = np.zeros(reps, dtype=bool)
        self.recorded: dict[int, np.ndarray] = {}

    def step(self, sv: StepView) -> None:
        lam1, lam2 = self.lam1, self.lam2
        s = sv.s
        scarce = sv.c1 + sv.c2 < (lam1 + lam2) * s
        if self.kind == "alpha":
            m = sv.c1 + sv.c2 - lam2 * s
            ok = (
                scarce
                & (m > 0.0)
                & (sv.c1 >= 1.0)
                & (sv.c2 >= 1.0)
                & (sv.v_raw >= self.curve.floor - 1e-12)
            )
            if self.v1 is None:
                self.v1 = float(np.median(sv.v_raw))
            e_t = self.v1 - sv.v_raw
            if sv.t <= self.window_end:
                gap = np.abs(self.alpha - e_t)
                live = ~self.frozen & ok
                self.max_gap[live] = np.maximum(self.max_gap[live], gap[live])
            if sv.t in self.checkpoints:
                self.recorded[sv.t] = self.alpha.copy()
            # Accumulate this period's increment on live paths.
            msafe = np.where(m > 0.0, m, 1.0)
            base = sv.c1 / (msafe * msafe)
            no_arrival = ~sv.arrived1 & ~sv.arrived2
            up_or_2 = sv.arrived2 | sv.upgraded
            ratio = np.where(sv.v_raw < 1.0, sv.v_raw / np.maximum(1.0 - sv.v_raw, 1e-30), 0.0)
            inc = np.where(
                no_arrival,
                -base * lam2,
                np.where(
                    sv.declined,
                    -base * (ratio + lam2),
                    np.where(up_or_2, base * (1.0 - lam2), 0.0),
                ),
            )
            live = ~self.frozen & ok
            self.alpha[live] += inc[live]
            newly_left = ~ok & ~self.frozen
            self.left_case |= newly_left & (sv.t <= self.window_end)
            self.frozen |= ~ok
            return

        # "upper" / "lower": bound-deviation processes in the abundant regime.
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = sv.c2 / (lam1 * s) - lam2 / lam1
            lower = 1.0 - sv.c1 / (lam1 * s)
        vstar = self.curve.v_star
        if self.kind == "upper":
            bound = upper
            ok = ~scarce & (upper <= vstar) & (upper >= lower) & (upper >= self.curve.floor)
        else:
            bound = lower
            ok = (
                ~scarce
                & (lower >= np.minimum(vstar, upper))
                & (lower <= 1.0)
                & (lower >= self.curve.floor)
            )
        ok &= (sv.c1 >= 1.0) & (sv.c2 >= 1.0)
        if self.v1 is None:
            self.v1 = float(np.median(bound))
        cur = self.v1 - bound
        live = ~self.frozen
        self.values[live] = cur[live]
        if sv.t in self.checkpoints:
            self.recorded[sv.t] = self.values.copy()
        newly_left = ~ok & ~self.frozen
        self.left_case |= newly_left & (sv.t <= self.window_end)
        self.frozen |= ~ok

    def checkpoint_stats(self):
        """Per-checkpoint (mean, standard error) of the tracked process."""
        ts, means, ses = [], [], []
        for t in self.checkpoints:
            if t not in self.recorded:
                continue
            x = self.recorded[t]
            ts.append(t)
            means.append(float(np.mean(x)))
            ses.append(float(np.std(x, ddof=1) / np.sqrt(len(x))))
        return np.array(ts), np.array(means), np.array(ses)

    @property
    def left_case_fraction(self) -> float:
        return float(np.mean(self.left_case))


class PricingLossTracker:
    """Accumulates sum of R(v_t) and the period count over t < tau.

    With tau the first period whose starting basic stock is zero, t < tau is
    exactly the set of periods entered with basic stock remaining.
    """

    def __init__(self, instance: Instance, reps: int):
        self.curve = instance.curves[0]
        self.sum_rev = np.zeros(reps)
        self.periods = np.zeros(reps, dtype=np.int64)

    def step(self, sv: StepView) -> None:
        counted = sv.c1 >= 1.0
        rev = sv.v * np.clip(self.curve._p(sv.v), 0.0, 1.0)
        self.sum_rev[counted] += rev[counted]
        self.periods[counted] += 1
