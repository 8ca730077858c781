"""Discrete-time episode simulator with full trace capture.

Each episode consumes exactly two uniforms per period from a counter-based
generator, in a fixed order: first the arrival draw, then the offer-acceptance
draw.  The acceptance uniform is drawn whether or not an offer is made, so the
stream position after any period is policy-independent; two policies run on
the same seed therefore see byte-identical arrival sequences, which is what
makes paired comparisons work.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .domain import ArrivalModel, Instance
from .policy import Decision, DecisionKind, Policy

__all__ = [
    "RngStream",
    "PeriodRecord",
    "EpisodeTrace",
    "episode_rng",
    "sample_arrival",
    "run_episode",
    "realized_counts",
    "check_trace",
    "trace_to_csv",
    "trace_summary",
]

TRACE_SCHEMA = "dynup.trace.v1"


@dataclass(frozen=True)
class RngStream:
    """Counter-based generator keyed by a 64-bit seed (and optional stream id)."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def episode_rng(base_seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for episode ``index`` under ``base_seed``."""
    return RngStream(seed=base_seed, stream=index).generator()


def sample_arrival(rng: np.random.Generator, arrivals: ArrivalModel) -> int:
    """Draw one arrival: 1..n for a request of that type, 0 for none.

    The uniform is mapped through cumulative rates in type order, so the same
    uniform always produces the same arrival regardless of the policy in play.
    """
    u = rng.random()
    return _arrival_from_uniform(u, arrivals.rates)


def _arrival_from_uniform(u: float, rates) -> int:
    acc = 0.0
    for i, lam in enumerate(rates):
        acc += lam
        if u < acc:
            return i + 1
    return 0


@dataclass(frozen=True)
class PeriodRecord:
    t: int
    arrival: int            # 1..n, or 0 for no arrival
    kind: DecisionKind
    price: float            # currency fee attached to an offer (0 otherwise)
    upgrade_accepted: bool | None
    consumption: tuple[int, ...]
    revenue: float


@dataclass
class EpisodeTrace:
    """Per-period records plus episode summary statistics."""

    seed: int
    policy: str
    records: list[PeriodRecord]
    total_revenue: float
    counts: np.ndarray                      # realized arrivals per type
    depletion_times: np.ndarray             # first depleting period per type, T+1 if never
    horizon: int

    @property
    def tau(self) -> int:
        """Depletion period of the basic tier (type 1)."""
        return int(self.depletion_times[0])


def run_episode(
    instance: Instance,
    policy: Policy,
    seed: int,
    arrival_sequence=None,
) -> EpisodeTrace:
    """Simulate one episode and return its trace.

    If ``arrival_sequence`` is given (length-T iterable of 0..n) it replaces
    the arrival draws, but uniforms are still consumed in the standard order
    so acceptance randomness stays aligned with sampled-arrival runs.
    """
    rng = episode_rng(seed)
    n = instance.n_types
    T = instance.horizon
    state = policy.init_state(instance)
    records: list[PeriodRecord] = []
    counts = np.zeros(n, dtype=np.int64)
    depletion = np.full(n, T + 1, dtype=np.int64)
    total = 0.0
    if arrival_sequence is not None:
        arrival_sequence = list(arrival_sequence)
        if len(arrival_sequence) != T:
            raise ValueError("arrival sequence length must equal the horizon")

    for t in range(1, T + 1):
        u_arrival = rng.random()
        u_accept = rng.random()
        if arrival_sequence is None:
            arrival = _arrival_from_uniform(u_arrival, instance.arrivals.rates)
        else:
            arrival = int(arrival_sequence[t - 1])
        if arrival:
            counts[arrival - 1] += 1
        decision = policy.decide(state, arrival)
        accepted: bool | None = None
        if decision.kind is DecisionKind.ACCEPT_WITH_OFFER:
            accepted = bool(u_accept < decision.v)

        before = state.remaining.copy()
        policy.commit(state, arrival, decision, accepted)
        delta = before - state.remaining
        revenue = _period_revenue(instance, arrival, decision, accepted)
        total += revenue

        # Depletion time = first period entered with zero stock; depletion
        # during the final period also reports the T + 1 sentinel since no
        # period ever started empty.
        newly_empty = (state.remaining == 0) & (delta > 0) & (depletion == T + 1)
        depletion[newly_empty] = min(t + 1, T + 1)
        records.append(
            PeriodRecord(
                t=t,
                arrival=arrival,
                kind=decision.kind,
                price=decision.price,
                upgrade_accepted=accepted,
                consumption=tuple(int(d) for d in delta),
                revenue=revenue,
            )
        )
        state.t = t + 1

    return EpisodeTrace(
        seed=seed,
        policy=policy.name,
        records=records,
        total_revenue=total,
        counts=counts,
        depletion_times=depletion,
        horizon=T,
    )


def _period_revenue(
    instance: Instance, arrival: int, decision: Decision, accepted: bool | None
) -> float:
    if arrival == 0 or decision.kind is DecisionKind.REJECT:
        return 0.0
    base = instance.price(arrival - 1)
    if decision.kind is DecisionKind.ACCEPT_WITH_OFFER and accepted:
        return base + decision.price
    return base


def realized_counts(trace: EpisodeTrace) -> np.ndarray:
    """Arrival counts per type, recomputed from the period records."""
    n = len(trace.counts)
    out = np.zeros(n, dtype=np.int64)
    for rec in trace.records:
        if rec.arrival:
            out[rec.arrival - 1] += 1
    return out


def check_trace(trace: EpisodeTrace, instance: Instance) -> None:
    """Assert capacity conservation and the revenue identity for a trace."""
    n = instance.n_types
    consumed = np.zeros(n, dtype=np.int64)
    fee_total = 0.0
    base_total = 0.0
    for rec in trace.records:
        consumed += np.asarray(rec.consumption, dtype=np.int64)
        if rec.arrival and rec.kind is not DecisionKind.REJECT:
            base_total += instance.price(rec.arrival - 1)
            if rec.kind is DecisionKind.ACCEPT_WITH_OFFER and rec.upgrade_accepted:
                fee_total += rec.price
    for i in range(n):
        if consumed[i] > instance.capacities[i]:
            raise AssertionError(
                f"type {i + 1} consumed {consumed[i]} > capacity {instance.capacities[i]}"
            )
    if abs(base_total + fee_total - trace.total_revenue) > 1e-9 * max(1.0, trace.total_revenue):
        raise AssertionError(
            f"revenue identity violated: {base_total} + {fee_total} != {trace.total_revenue}"
        )
    if not np.array_equal(realized_counts(trace), trace.counts):
        raise AssertionError("recorded arrival counts disagree with period records")
    if int(trace.counts.sum()) > trace.horizon:
        raise AssertionError("more arrivals than periods")


def trace_to_csv(trace: EpisodeTrace) -> str:
    """Render a trace as CSV: one row per period, with a schema comment line."""
    n = len(trace.counts)
    buf = io.StringIO()
    buf.write(f"# schema: {TRACE_SCHEMA}\n")
    cons_cols = ",".join(f"consumed_{i + 1}" for i in range(n))
    buf.write(f"t,arrival,decision,price,upgrade_accepted,{cons_cols},revenue\n")
    for rec in trace.records:
        acc = "" if rec.upgrade_accepted is None else str(int(rec.upgrade_accepted))
        cons = ",".join(str(c) for c in rec.consumption)
        buf.write(
            f"{rec.t},{rec.arrival},{rec.kind.value},{rec.price:.9g},{acc},{cons},{rec.revenue:.9g}\n"
        )
    return buf.getvalue()


def trace_summary(trace: EpisodeTrace) -> dict:
    """JSON-ready episode summary."""
    return {
        "schema": TRACE_SCHEMA,
        "seed": trace.seed,
        "policy": trace.policy,
        "horizon": trace.horizon,
        "total_revenue": trace.total_revenue,
        "counts": trace.counts.tolist(),
        "depletion_times": trace.depletion_times.tolist(),
    }
