"""Exact ground truth for small two-tier instances.

Backward induction over the state (t, c1, c2) gives the exact optimal
expected revenue when offer probabilities are restricted to a fine grid, the
same recursion with the max replaced by a fixed policy's decision gives that
policy's exact expected revenue, and summing the pathwise hindsight bound
against the exact multinomial count distribution gives the exact benchmark
expectation.  Everything here is desk-scale by design: states explode well
before T ~ 200, c ~ 50.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .domain import Instance
from .hybrid import pricing_grid, upper_hp_values_vec
from .policy import Decision, DecisionKind, Policy, PolicyState

__all__ = [
    "DpTable",
    "DpTablePolicy",
    "dp_optimal_value",
    "dp_policy_value",
    "enumerate_hindsight_bound",
    "offer_value_lipschitz",
    "dump_table_csv",
]

_STATE_BUDGET = 3_000_000

# Action codes stored in the table (offers store the grid index >= 0).
ACTION_REJECT = -1
ACTION_PLAIN = -2
ACTION_FREE = -3


@dataclass
class DpTable:
    """Optimal values and actions: values[t, c1, c2] = V(t, c1, c2)."""

    values: np.ndarray        # (T+2, C1+1, C2+1); index t = 1..T+1
    action_basic: np.ndarray  # (T+1, C1+1, C2+1) int16, codes above
    action_premium: np.ndarray  # (T+1, C1+1, C2+1) int8, 1 = accept
    grid: np.ndarray
    grid_step: float

    @property
    def optimal_value(self) -> float:
        return float(self.values[1, -1, -1])


def _check_budget(instance: Instance) -> tuple[int, int, int]:
    if instance.n_types != 2:
        raise ValueError("exact recursion supports two-tier instances only")
    T = instance.horizon
    ca, cb = instance.capacities
    if (T + 1) * (ca + 1) * (cb + 1) > _STATE_BUDGET:
        raise ValueError(
            f"state space {(T + 1) * (ca + 1) * (cb + 1)} exceeds the desk-scale budget"
        )
    return T, ca, cb


def dp_optimal_value(instance: Instance, grid_step: float = 0.005) -> DpTable:
    """Exact optimal expected revenue with grid-restricted offer probabilities."""
    T, ca, cb = _check_budget(instance)
    lam1, lam2 = instance.arrivals.rates
    lam0 = instance.arrivals.no_arrival_rate
    r1, r2 = instance.ladder.base_prices
    curve = instance.curves[0]
    grid = pricing_grid(curve, grid_step)
    fee_grid = np.clip(curve._p(grid), 0.0, 1.0) * (r2 - r1)
    rev_grid = grid * fee_grid  # expected fee revenue per offer, in currency

    values = np.zeros((T + 2, ca + 1, cb + 1))
    action_basic = np.full((T + 1, ca + 1, cb + 1), ACTION_REJECT, dtype=np.int16)
    action_premium = np.zeros((T + 1, ca + 1, cb + 1), dtype=np.int8)
    neg_inf = -np.inf

    for t in range(T, 0, -1):
        nxt = values[t + 1]
        # Premium request: accept iff stock remains and accepting is not worse.
        acc2 = np.full_like(nxt, neg_inf)
        acc2[:, 1:] = r2 + nxt[:, :-1]
        best2 = np.maximum(nxt, acc2)
        action_premium[t] = (acc2 >= nxt - 1e-12).astype(np.int8)

        # Basic request: reject / plain accept / offer / free upgrade.
        plain = np.full_like(nxt, neg_inf)
        plain[1:, :] = r1 + nxt[:-1, :]
        free = np.full_like(nxt, neg_inf)
        free[0, 1:] = r1 + nxt[0, :-1]
        offer = np.full_like(nxt, neg_inf)
        offer_idx = np.zeros((ca + 1, cb + 1), dtype=np.int16)
        if ca >= 1 and cb >= 1:
            a = nxt[1:, :-1]   # upgrade accepted: premium unit consumed
            b = nxt[:-1, 1:]   # declined: basic unit consumed
            d = a - b
            cand = rev_grid[None, None, :] + d[:, :, None] * grid[None, None, :]
            k = np.argmax(cand, axis=2)
            offer[1:, 1:] = r1 + b + np.take_along_axis(cand, k[:, :, None], axis=2)[:, :, 0]
            offer_idx[1:, 1:] = k.astype(np.int16)

        stacked = np.stack([offer, plain, free, np.broadcast_to(nxt, offer.shape)])
        choice = np.argmax(stacked, axis=0)
        best1 = np.take_along_axis(stacked, choice[None, :, :], axis=0)[0]
        action_basic[t] = np.select(
            [choice == 0, choice == 1, choice == 2],
            [offer_idx, ACTION_PLAIN, ACTION_FREE],
            default=ACTION_REJECT,
        ).astype(np.int16)

        values[t] = lam0 * nxt + lam2 * best2 + lam1 * best1

    # Monotonicity sanity: more stock or more time never hurts.
    if np.any(np.diff(values[1:], axis=1) < -1e-9) or np.any(np.diff(values[1:], axis=2) < -1e-9):
        raise AssertionError("optimal value table not monotone in stock")
    return DpTable(
        values=values,
        action_basic=action_basic,
        action_premium=action_premium,
        grid=grid,
        grid_step=grid_step,
    )


class DpTablePolicy(Policy):
    """Replays the exact table's actions as an online policy."""

    name = "dp_table"

    def __init__(self, instance: Instance, table: DpTable):
        self.instance = instance
        self.table = table
        self.gap = instance.ladder.gap(0)
        self.curve = instance.curves[0]

    def decide(self, state: PolicyState, arrival: int) -> Decision:
        return self.decision_at(state.t, int(state.remaining[0]), int(state.remaining[1]), arrival)

    def decision_at(self, t: int, c1: int, c2: int, arrival: int) -> Decision:
        if arrival == 0:
            return Decision(DecisionKind.REJECT)
        if arrival == 2:
            if self.table.action_premium[t, c1, c2] and c2 >= 1:
                return Decision(DecisionKind.ACCEPT_NO_OFFER)
            return Decision(DecisionKind.REJECT)
        code = int(self.table.action_basic[t, c1, c2])
        if code == ACTION_REJECT:
            return Decision(DecisionKind.REJECT)
        if code == ACTION_PLAIN:
            return Decision(DecisionKind.ACCEPT_NO_OFFER)
        if code == ACTION_FREE:
            return Decision(DecisionKind.ACCEPT_FREE_UPGRADE)
        v = float(self.table.grid[code])
        price = self.curve.price_for(v) * self.gap
        return Decision(DecisionKind.ACCEPT_WITH_OFFER, price=price, v=v)


def dp_policy_value(instance: Instance, policy) -> float:
    """Exact expected revenue of a policy that is deterministic in
    (t, c1, c2, arrival).  The policy must expose ``decision_at``."""
    T, ca, cb = _check_budget(instance)
    lam1, lam2 = instance.arrivals.rates
    lam0 = instance.arrivals.no_arrival_rate
    r1, r2 = instance.ladder.base_prices
    nxt = np.zeros((ca + 1, cb + 1))
    for t in range(T, 0, -1):
        cur = np.empty_like(nxt)
        for c1 in range(ca + 1):
            for c2 in range(cb + 1):
                v1 = _decision_value(policy.decision_at(t, c1, c2, 1), 1, c1, c2, r1, r2, nxt)
                v2 = _decision_value(policy.decision_at(t, c1, c2, 2), 2, c1, c2, r1, r2, nxt)
                cur[c1, c2] = lam0 * nxt[c1, c2] + lam1 * v1 + lam2 * v2
        nxt = cur
    return float(nxt[ca, cb])


def _decision_value(decision: Decision, arrival: int, c1: int, c2: int, r1, r2, nxt) -> float:
    kind = decision.kind
    if kind is DecisionKind.REJECT:
        return float(nxt[c1, c2])
    if arrival == 2:
        if c2 < 1:
            raise AssertionError("policy accepted a premium request without stock")
        return r2 + float(nxt[c1, c2 - 1])
    if kind is DecisionKind.ACCEPT_NO_OFFER:
        if c1 < 1:
            raise AssertionError("policy plain-accepted without basic stock")
        return r1 + float(nxt[c1 - 1, c2])
    if kind is DecisionKind.ACCEPT_FREE_UPGRADE:
        if c2 < 1:
            raise AssertionError("policy upgraded without premium stock")
        return r1 + float(nxt[c1, c2 - 1])
    if c1 < 1 or c2 < 1:
        raise AssertionError("policy offered an upgrade without stock on both tiers")
    v = decision.v
    return v * (r1 + decision.price + float(nxt[c1, c2 - 1])) + (1.0 - v) * (
        r1 + float(nxt[c1 - 1, c2])
    )


def enumerate_hindsight_bound(instance: Instance) -> float:
    """Exact expectation of the pathwise hindsight bound over arrival counts.

    The per-type totals follow the multinomial law of T periods with cell
    probabilities (lam1, lam2, lam0); the bound value for each count pair is
    the same formula the paired estimator uses pathwise.
    """
    if instance.n_types != 2:
        raise ValueError("exact enumeration supports two-tier instances only")
    T = instance.horizon
    lam1, lam2 = instance.arrivals.rates
    lam0 = instance.arrivals.no_arrival_rate
    r1, r2 = instance.ladder.base_prices
    k1, k2 = np.meshgrid(np.arange(T + 1), np.arange(T + 1), indexing="ij")
    mask = k1 + k2 <= T
    k1 = k1[mask].astype(float)
    k2 = k2[mask].astype(float)
    k0 = T - k1 - k2
    log_pmf = (
        gammaln(T + 1)
        - gammaln(k1 + 1)
        - gammaln(k2 + 1)
        - gammaln(k0 + 1)
        + xlogy(k1, lam1)
        + xlogy(k2, lam2)
        + xlogy(k0, lam0)
    )
    pmf = np.exp(log_pmf)
    vals = upper_hp_values_vec(
        k1, k2, instance.capacities[0], instance.capacities[1], r1, r2, instance.curves[0]
    )
    return float(np.sum(pmf * vals))


def dump_table_csv(table: DpTable, path) -> None:
    """Debug dump: one row per state with its value and chosen actions.

    The basic action column holds 'reject', 'plain', 'free', or the offer
    probability; the premium column is accept/reject.
    """
    from .reporting import fmt9, atomic_write_text

    t_max = table.values.shape[0] - 1
    lines = ["# schema: dynup.dptable.v1", "t,c1,c2,value,basic_action,premium_action"]
    names = {ACTION_REJECT: "reject", ACTION_PLAIN: "plain", ACTION_FREE: "free"}
    for t in range(1, t_max):
        for c1 in range(table.values.shape[1]):
            for c2 in range(table.values.shape[2]):
                code = int(table.action_basic[t, c1, c2])
                basic = names.get(code, None)
                if basic is None:
                    basic = fmt9(float(table.grid[code]))
                premium = "accept" if table.action_premium[t, c1, c2] else "reject"
                lines.append(
                    f"{t},{c1},{c2},{fmt9(float(table.values[t, c1, c2]))},{basic},{premium}"
                )
    atomic_write_text(path, "\n".join(lines) + "\n")


def offer_value_lipschitz(instance: Instance) -> float:
    """Bound on d(offer value)/dv used to size the grid-resolution slack.

    Changing the offer probability by h moves the expected fee revenue by at
    most L_R * (r2 - r1) * h and shifts at most h of transition mass between
    continuation states whose values differ by at most r2.
    """
    curve = instance.curves[0]
    r1, r2 = instance.ladder.base_prices
    grid = np.linspace(curve.floor, 1.0, 2001)
    rev = grid * np.clip(curve._p(grid), 0.0, 1.0)
    lips_r = float(np.max(np.abs(np.diff(rev) / np.diff(grid))))
    return lips_r * (r2 - r1) + r2
