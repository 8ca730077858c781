"""Online decision rules for the upgrade-pricing problem.

Three policies are provided:

* ``DynUp2Policy`` -- the dynamic two-tier rule: while basic stock remains it
  accepts first-come first-served and prices each upgrade offer by re-solving
  the closed-form benchmark on the remaining stock and remaining expected
  demand; once basic stock is gone it grants free upgrades only while the
  expected premium surplus exceeds half the remaining basic demand.
* ``DynUpNPolicy`` -- composes independent two-tier rules on adjacent tier
  pairs.  Each tier's stock is split once, at the start, into a ``base``
  ledger serving its own demand and a ``surplus`` ledger reserved as the
  upgrade target of the tier below.
* ``StaticPolicy`` -- first-come first-served with one fixed upgrade
  proportion for every offer; the usual incumbent baseline.

All prices are quoted in currency on decisions; acceptance probabilities are
carried alongside so samplers never have to re-invert a clamped price.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .domain import AcceptanceCurve, Instance
from .hybrid import closed_form_v, solve_ntype

__all__ = [
    "DecisionKind",
    "Decision",
    "PolicyState",
    "Policy",
    "DynUp2Policy",
    "DynUpNPolicy",
    "StaticPolicy",
    "optimal_upgrade_price",
    "dynup2_decide",
    "dynupn_init",
    "dynupn_decide",
    "static_policy_decide",
    "make_policy",
]


class DecisionKind(enum.Enum):
    REJECT = "reject"
    ACCEPT_NO_OFFER = "accept"
    ACCEPT_WITH_OFFER = "offer"
    ACCEPT_FREE_UPGRADE = "free_upgrade"


@dataclass(frozen=True)
class Decision:
    """One period's verdict.  price is the currency fee of an upgrade offer;
    v is the probability the offer is accepted (f of the price proportion)."""

    kind: DecisionKind
    price: float = 0.0
    v: float = 0.0

    @property
    def consumes_upgrade_on_accept(self) -> bool:
        return self.kind is DecisionKind.ACCEPT_WITH_OFFER


@dataclass
class PolicyState:
    """Mutable per-episode state: current period and remaining stock.

    The n-tier policy additionally carries the base/surplus partition and the
    benchmark probabilities computed at initialization.
    """

    t: int
    remaining: np.ndarray
    base: np.ndarray | None = None
    surplus: np.ndarray | None = None
    v_h: np.ndarray | None = None

    def copy(self) -> "PolicyState":
        return PolicyState(
            t=self.t,
            remaining=self.remaining.copy(),
            base=None if self.base is None else self.base.copy(),
            surplus=None if self.surplus is None else self.surplus.copy(),
            v_h=None if self.v_h is None else self.v_h.copy(),
        )


def optimal_upgrade_price(
    t: int,
    c1: float,
    c2: float,
    lam1: float,
    lam2: float,
    horizon: int,
    curve: AcceptanceCurve,
) -> tuple[float, float]:
    """Per-period offer price, in proportion units, plus the raw benchmark v.

    Re-solves the closed form with s = horizon - t + 1 remaining periods.  The
    returned price is clamped into [0, 1]; the probability actually induced by
    the clamped price is f(price), i.e. the raw v pushed into [f(1), 1].
    """
    s = horizon - t + 1
    v_raw = closed_form_v(c1, c2, lam1 * s, lam2 * s, curve.v_star)
    price = curve.price_for(v_raw)
    return price, v_raw


class Policy:
    """Interface shared by the online policies."""

    name: str = "policy"

    def init_state(self, instance: Instance) -> PolicyState:
        return PolicyState(t=1, remaining=np.asarray(instance.capacities, dtype=np.int64).copy())

    def decide(self, state: PolicyState, arrival: int) -> Decision:
        raise NotImplementedError

    def commit(self, state: PolicyState, arrival: int, decision: Decision, accepted: bool | None) -> None:
        """Debit stock for the period's outcome.  arrival is 1-based, 0 = none."""
        kind = decision.kind
        if arrival == 0 or kind is DecisionKind.REJECT:
            return
        i = arrival - 1
        if kind is DecisionKind.ACCEPT_NO_OFFER:
            state.remaining[i] -= 1
        elif kind is DecisionKind.ACCEPT_FREE_UPGRADE:
            state.remaining[i + 1] -= 1
        elif kind is DecisionKind.ACCEPT_WITH_OFFER:
            state.remaining[i + 1 if accepted else i] -= 1
        if np.any(state.remaining < 0):
            raise RuntimeError(
                f"negative stock after period {state.t}: {state.remaining.tolist()}"
            )


def _dynup2_decision(
    t: int,
    c1: int,
    c2: int,
    arrival: int,
    horizon: int,
    lam1: float,
    lam2: float,
    curve: AcceptanceCurve,
    gap: float,
) -> Decision:
    """Two-tier dynamic rule at state (t, c1, c2) for the given arrival."""
    if arrival == 0:
        return Decision(DecisionKind.REJECT)
    if arrival == 2:
        if c2 >= 1:
            return Decision(DecisionKind.ACCEPT_NO_OFFER)
        return Decision(DecisionKind.REJECT)
    # arrival == 1
    s = horizon - t + 1
    if c1 >= 1:
        if c2 >= 1:
            proportion, _ = optimal_upgrade_price(t, c1, c2, lam1, lam2, horizon, curve)
            v = curve.f_scalar(proportion)
            return Decision(DecisionKind.ACCEPT_WITH_OFFER, price=proportion * gap, v=v)
        return Decision(DecisionKind.ACCEPT_NO_OFFER)
    # Basic stock exhausted: free upgrade only while the expected premium
    # surplus clears half the remaining basic demand.
    if c2 >= 1 and max(c2 - lam2 * s, 0.0) > 0.5 * lam1 * s:
        return Decision(DecisionKind.ACCEPT_FREE_UPGRADE)
    return Decision(DecisionKind.REJECT)


class DynUp2Policy(Policy):
    """Dynamic two-tier upgrade pricing (re-solve every period)."""

    name = "dynup2"

    def __init__(self, instance: Instance):
        if instance.n_types != 2:
            raise ValueError("two-tier policy needs exactly 2 resource types")
        self.instance = instance
        self.horizon = instance.horizon
        self.lam1 = instance.rate(0)
        self.lam2 = instance.rate(1)
        self.curve = instance.curves[0]
        self.gap = instance.ladder.gap(0)

    def decide(self, state: PolicyState, arrival: int) -> Decision:
        return self.decision_at(state.t, int(state.remaining[0]), int(state.remaining[1]), arrival)

    def decision_at(self, t: int, c1: int, c2: int, arrival: int) -> Decision:
        return _dynup2_decision(
            t, c1, c2, arrival, self.horizon, self.lam1, self.lam2, self.curve, self.gap
        )


class StaticPolicy(Policy):
    """First-come first-served with one fixed upgrade proportion everywhere."""

    def __init__(self, instance: Instance, fixed_price: float):
        if not (0.0 <= fixed_price <= 1.0):
            raise ValueError("fixed price must be a proportion in [0, 1]")
        self.instance = instance
        self.fixed_price = float(fixed_price)
        self.name = f"static:{fixed_price:g}"

    def decide(self, state: PolicyState, arrival: int) -> Decision:
        if arrival == 0:
            return Decision(DecisionKind.REJECT)
        i = arrival - 1
        n = self.instance.n_types
        c_own = int(state.remaining[i])
        c_up = int(state.remaining[i + 1]) if i + 1 < n else 0
        if c_own >= 1:
            if i + 1 < n and c_up >= 1:
                curve = self.instance.curves[i]
                v = curve.f_scalar(self.fixed_price)
                return Decision(
                    DecisionKind.ACCEPT_WITH_OFFER,
                    price=self.fixed_price * self.instance.ladder.gap(i),
                    v=v,
                )
            return Decision(DecisionKind.ACCEPT_NO_OFFER)
        if i + 1 < n and c_up >= 1:
            return Decision(DecisionKind.ACCEPT_FREE_UPGRADE)
        return Decision(DecisionKind.REJECT)

    def decision_at(self, t: int, c1: int, c2: int, arrival: int) -> Decision:
        state = PolicyState(t=t, remaining=np.array([c1, c2], dtype=np.int64))
        return self.decide(state, arrival)


class DynUpNPolicy(Policy):
    """Composition of two-tier rules over adjacent tier pairs.

    Initialization solves the chained benchmark at expected counts to get the
    pairwise probabilities, then freezes each tier's protection level
    (c_{i+1} - lam_{i+1} T / (1 - v_{i+1}))^+ as the surplus ledger of the
    pair below.  Pair (i, i+1) thereafter runs the two-tier rule with
    capacities (base_i, surplus_{i+1}) and rates (lam_i, 0); upgrades debit
    the surplus ledger, plain accepts debit the base ledger.
    """

    name = "dynupn"

    def __init__(self, instance: Instance):
        if instance.n_types < 2:
            raise ValueError("need at least two resource types")
        self.instance = instance
        self.horizon = instance.horizon

    def init_state(self, instance: Instance | None = None) -> PolicyState:
        inst = self.instance if instance is None else instance
        T = inst.horizon
        counts = np.asarray(inst.arrivals.rates, dtype=float) * T
        chain = solve_ntype(
            counts, inst.capacities, inst.ladder.base_prices, inst.curves
        )
        n = inst.n_types
        v_h = np.array([sol.v_effective for sol in chain.pair_solutions] + [0.0])
        surplus = np.zeros(n)
        # Protection for tier i+1 = expected leftover when its own demand is
        # served at the pair's benchmark probability (v = 0 for the top tier).
        for j in range(1, n):
            v_j = v_h[j]
            if v_j >= 1.0:
                protected = max(inst.capacities[j] - counts[j], 0.0)
            else:
                protected = max(inst.capacities[j] - counts[j] / (1.0 - v_j), 0.0)
            surplus[j] = min(np.floor(protected), inst.capacities[j])
        base = np.asarray(inst.capacities, dtype=float) - surplus
        return PolicyState(
            t=1,
            remaining=np.asarray(inst.capacities, dtype=np.int64).copy(),
            base=base.astype(np.int64),
            surplus=surplus.astype(np.int64),
            v_h=v_h,
        )

    def decide(self, state: PolicyState, arrival: int) -> Decision:
        if arrival == 0:
            return Decision(DecisionKind.REJECT)
        inst = self.instance
        n = inst.n_types
        i = arrival - 1
        if i == n - 1:
            # Top tier serves only its base ledger; surplus stays reserved for
            # upgrades from below.
            if state.base[i] >= 1:
                return Decision(DecisionKind.ACCEPT_NO_OFFER)
            return Decision(DecisionKind.REJECT)
        c_own = int(state.base[i])
        c_up = int(state.surplus[i + 1])
        lam_i = inst.rate(i)
        s = self.horizon - state.t + 1
        if c_own >= 1:
            if c_up >= 1:
                proportion, _ = optimal_upgrade_price(
                    state.t, c_own, c_up, lam_i, 0.0, self.horizon, inst.curves[i]
                )
                v = inst.curves[i].f_scalar(proportion)
                return Decision(
                    DecisionKind.ACCEPT_WITH_OFFER,
                    price=proportion * inst.ladder.gap(i),
                    v=v,
                )
            return Decision(DecisionKind.ACCEPT_NO_OFFER)
        if c_up >= 1 and c_up > 0.5 * lam_i * s:
            return Decision(DecisionKind.ACCEPT_FREE_UPGRADE)
        return Decision(DecisionKind.REJECT)

    def commit(self, state: PolicyState, arrival: int, decision: Decision, accepted: bool | None) -> None:
        super().commit(state, arrival, decision, accepted)
        if arrival == 0 or decision.kind is DecisionKind.REJECT:
            return
        i = arrival - 1
        kind = decision.kind
        upgraded = kind is DecisionKind.ACCEPT_FREE_UPGRADE or (
            kind is DecisionKind.ACCEPT_WITH_OFFER and accepted
        )
        if upgraded:
            state.surplus[i + 1] -= 1
            if state.surplus[i + 1] < 0:
                raise RuntimeError(f"surplus ledger went negative in period {state.t}")
        else:
            state.base[i] -= 1
            if state.base[i] < 0:
                raise RuntimeError(f"base ledger went negative in period {state.t}")


# --------------------------------------------------------------------------
# Functional wrappers matching the operation-level names.
# --------------------------------------------------------------------------

def dynup2_decide(
    state: PolicyState,
    arrival: int,
    horizon: int,
    lam1: float,
    lam2: float,
    curve: AcceptanceCurve,
    gap: float = 1.0,
) -> Decision:
    """Two-tier decision for the given state and arrival (1, 2, or 0 = none)."""
    return _dynup2_decision(
        state.t,
        int(state.remaining[0]),
        int(state.remaining[1]),
        arrival,
        horizon,
        lam1,
        lam2,
        curve,
        gap,
    )


def dynupn_init(instance: Instance) -> PolicyState:
    return DynUpNPolicy(instance).init_state()


def dynupn_decide(state: PolicyState, arrival: int, instance: Instance) -> Decision:
    return DynUpNPolicy(instance).decide(state, arrival)


def static_policy_decide(
    state: PolicyState, arrival: int, fixed_price: float, instance: Instance
) -> Decision:
    return StaticPolicy(instance, fixed_price).decide(state, arrival)


def make_policy(spec: str, instance: Instance) -> Policy:
    """Build a policy from its CLI name: dynup2, dynupn, or static:<price>."""
    if spec == "dynup2":
        return DynUp2Policy(instance)
    if spec == "dynupn":
        return DynUpNPolicy(instance)
    if spec.startswith("static:"):
        return StaticPolicy(instance, float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown policy spec: {spec!r}")
