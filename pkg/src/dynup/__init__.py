"""Online upgrade pricing for tiered resources.

A library and CLI for the fee-based upgrade mechanism: accept/reject
decisions over a discrete horizon with an optional paid upgrade to the next
tier, closed-form benchmark solvers, dynamic and static online policies, an
exact small-instance recursion, and a Monte Carlo lab that measures regret
against the pathwise hindsight bound.
"""

from .domain import (
    AcceptanceCurve,
    ArrivalModel,
    ExponentialPowerCurve,
    Instance,
    LinearCurve,
    PriceLadder,
    accept_prob,
    instance_from_dict,
    instance_to_dict,
    inverse_price,
    load_instance,
    revenue_curve,
    revenue_maximizer,
    save_instance,
)
from .hybrid import (
    HpCase,
    HPSolution,
    NTypeSolution,
    hp_objective,
    solve_hp_closed_form,
    solve_hp_grid,
    solve_ntype,
    upper_hp_value,
)
from .policy import (
    Decision,
    DecisionKind,
    DynUp2Policy,
    DynUpNPolicy,
    PolicyState,
    StaticPolicy,
    dynup2_decide,
    dynupn_decide,
    dynupn_init,
    make_policy,
    optimal_upgrade_price,
    static_policy_decide,
)
from .sim import EpisodeTrace, RngStream, check_trace, realized_counts, run_episode, sample_arrival
from .batch import BatchResult, run_batch
from .oracle import (
    DpTable,
    DpTablePolicy,
    dp_optimal_value,
    dp_policy_value,
    enumerate_hindsight_bound,
)
from .experiments import (
    CalibrationFit,
    DiagnosticsReport,
    HotelStudyConfig,
    RegretEntry,
    RegretReport,
    ScalingTemplate,
    estimate_regret,
    fit_acceptance_curve,
    hotel_study,
    martingale_diagnostics,
    pricing_loss_diagnostics,
    regret_sweep,
    stopping_time_diagnostics,
)

__version__ = "0.1.0"
