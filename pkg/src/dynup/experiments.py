"""Measurement lab: paired regret estimation, scaling sweeps, process
diagnostics, acceptance-curve calibration, and the synthetic hotel study.

Every estimator here is paired: the benchmark is evaluated on the realized
arrival counts of the same simulated path whose policy revenue it is compared
against, which removes the arrival noise common to both sides.  All outputs
are deterministic functions of (configuration, base_seed).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .batch import CheckpointProcess, PricingLossTracker, run_batch
from .domain import (
    AcceptanceCurve,
    ArrivalModel,
    ExponentialPowerCurve,
    Instance,
    PriceLadder,
)
from .hybrid import closed_form_v, solve_ntype, upper_hp_value, upper_hp_values_vec
from .policy import DynUp2Policy, DynUpNPolicy, Policy, StaticPolicy
from .sim import RngStream, run_episode

__all__ = [
    "RegretEntry",
    "RegretReport",
    "DiagnosticsReport",
    "CalibrationFit",
    "ScalingTemplate",
    "HotelStudyConfig",
    "HotelDayResult",
    "HotelStudyReport",
    "InsufficientDataError",
    "estimate_regret",
    "regret_sweep",
    "martingale_diagnostics",
    "stopping_time_diagnostics",
    "pricing_loss_diagnostics",
    "pricing_loss_sweep",
    "fit_acceptance_curve",
    "synthesize_acceptance_samples",
    "hotel_study",
    "synthetic_day_profiles",
    "abundance_upper_instance",
    "abundance_lower_instance",
    "scarcity_instance",
    "scarcity_drift_free_instance",
]


class InsufficientDataError(ValueError):
    """Raised when calibration data cannot identify the curve parameters."""


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two samples")
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x)))


# ---------------------------------------------------------------------------
# Regret estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegretEntry:
    horizon: int
    mean: float
    se: float
    reps: int


@dataclass
class RegretReport:
    policy: str
    entries: list[RegretEntry]
    fit_intercept: float
    fit_slope: float
    fit_r2: float

    def sublinear(self) -> bool:
        """regret/T smaller at the largest horizon than at the smallest."""
        first, last = self.entries[0], self.entries[-1]
        return last.mean / last.horizon < first.mean / first.horizon

    def to_json_dict(self) -> dict:
        return {
            "schema": "dynup.regret.v1",
            "policy": self.policy,
            "entries": [
                {"T": e.horizon, "mean_regret": e.mean, "se": e.se, "reps": e.reps}
                for e in self.entries
            ],
            "fit": {
                "intercept": self.fit_intercept,
                "slope": self.fit_slope,
                "r2": self.fit_r2,
            },
            "sublinear": self.sublinear(),
        }


def estimate_regret(
    instance: Instance, policy: Policy, reps: int, base_seed: int
) -> RegretEntry:
    """Paired mean and standard error of (pathwise benchmark - policy revenue).

    Two-tier dynamic/static policies run on the vectorized engine; everything
    else falls back to per-episode simulation.  Both paths evaluate the bound
    on the realized counts of the very path being scored.
    """
    if reps < 100:
        raise ValueError("need at least 100 replications for a usable estimate")
    n = instance.n_types
    r = instance.ladder.base_prices
    if n == 2 and isinstance(policy, (DynUp2Policy, StaticPolicy)):
        res = run_batch(instance, policy, reps, base_seed)
        bound = upper_hp_values_vec(
            res.counts[:, 0].astype(float),
            res.counts[:, 1].astype(float),
            instance.capacities[0],
            instance.capacities[1],
            r[0],
            r[1],
            instance.curves[0],
        )
        mean, se = _mean_se(bound - res.revenue)
        return RegretEntry(horizon=instance.horizon, mean=mean, se=se, reps=reps)

    samples = np.empty(reps)
    for k in range(reps):
        trace = run_episode(instance, policy, seed=_child_seed(base_seed, k))
        counts = trace.counts.astype(float)
        if n == 2:
            bound, _ = upper_hp_value(
                counts[0], counts[1], instance.capacities[0], instance.capacities[1],
                r[0], r[1], instance.curves[0],
            )
        else:
            bound = solve_ntype(
                counts, instance.capacities, r, instance.curves
            ).total_value
        samples[k] = bound - trace.total_revenue
    mean, se = _mean_se(samples)
    return RegretEntry(horizon=instance.horizon, mean=mean, se=se, reps=reps)


def _child_seed(base_seed: int, *indices: int) -> int:
    """Deterministic, well-mixed 63-bit child seed."""
    ss = np.random.SeedSequence([base_seed & 0x7FFFFFFFFFFFFFFF, *indices])
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class ScalingTemplate:
    """Instance family where capacities grow proportionally with the horizon."""

    rates: tuple[float, ...]
    capacity_ratios: tuple[float, ...]
    base_prices: tuple[float, ...]
    curves: tuple[AcceptanceCurve, ...]

    def instantiate(self, horizon: int) -> Instance:
        caps = tuple(int(round(rho * horizon)) for rho in self.capacity_ratios)
        return Instance(
            horizon=horizon,
            capacities=caps,
            ladder=PriceLadder(self.base_prices),
            arrivals=ArrivalModel(self.rates),
            curves=self.curves,
        )


def regret_sweep(
    template: ScalingTemplate,
    horizons,
    reps: int,
    base_seed: int,
    policy_spec: str = "dynup2",
) -> RegretReport:
    """Regret at each horizon plus an ordinary least-squares fit on log T."""
    horizons = [int(T) for T in horizons]
    if len(horizons) < 4 or any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("need at least four strictly increasing horizons")
    entries = []
    for i, T in enumerate(horizons):
        inst = template.instantiate(T)
        policy = _policy_for(policy_spec, inst)
        entries.append(estimate_regret(inst, policy, reps, _child_seed(base_seed, i)))
    x = np.log([e.horizon for e in entries])
    y = np.array([e.mean for e in entries])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 0.0
    return RegretReport(
        policy=policy_spec,
        entries=entries,
        fit_intercept=float(intercept),
        fit_slope=float(slope),
        fit_r2=r2,
    )


def _policy_for(spec: str, instance: Instance) -> Policy:
    from .policy import make_policy

    return make_policy(spec, instance)


# ---------------------------------------------------------------------------
# Process diagnostics
# ---------------------------------------------------------------------------

@dataclass
class DiagnosticsReport:
    name: str
    horizon: int
    reps: int
    checkpoints: np.ndarray
    means: np.ndarray
    ses: np.ndarray
    extras: dict = field(default_factory=dict)

    def zero_drift_ok(self, z: float = 3.0) -> bool:
        """|mean| <= z * SE at every checkpoint."""
        return bool(np.all(np.abs(self.means) <= z * np.maximum(self.ses, 1e-300)))

    def to_json_dict(self) -> dict:
        return {
            "schema": "dynup.diagnostics.v1",
            "name": self.name,
            "horizon": self.horizon,
            "reps": self.reps,
            "checkpoints": self.checkpoints.tolist(),
            "means": self.means.tolist(),
            "ses": self.ses.tolist(),
            "extras": {
                k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.extras.items()
            },
        }


def _default_checkpoints(t_lo: int, t_hi: int, count: int = 10) -> list[int]:
    return sorted(set(int(round(t)) for t in np.linspace(t_lo, t_hi, count)))


def martingale_diagnostics(
    instance: Instance,
    process: str,
    reps: int,
    base_seed: int,
    checkpoints=None,
    window_frac: float = 0.3,
) -> DiagnosticsReport:
    """Empirical zero-drift check for one of the pricing deviation processes.

    process: "upper" or "lower" (abundant regime, deviation of the binding
    bound) or "alpha" (scarce regime, compensated process with its distance
    to the actual deviation).  The instance must be configured to sit in the
    matching regime; a warning is raised if more than 5% of paths leave it
    inside the tracked window.
    """
    T = instance.horizon
    if process == "alpha":
        window_end = max(2, int(window_frac * T))
    else:
        # The bound-deviation martingales denominate by the remaining horizon,
        # so late periods leave the binding regime with probability one; track
        # the first half, where the regime persists on almost all paths.
        window_end = max(2, T // 2)
    if checkpoints is None:
        checkpoints = _default_checkpoints(2, window_end)
    obs = CheckpointProcess(process, instance, checkpoints, reps, window_end=window_end)
    run_batch(instance, DynUp2Policy(instance), reps, base_seed, observers=[obs])
    ts, means, ses = obs.checkpoint_stats()
    extras: dict = {
        "process": process,
        "left_case_fraction": obs.left_case_fraction,
        "window_end": window_end,
        "v1": obs.v1,
    }
    if process == "alpha":
        extras["mean_max_gap"] = float(np.mean(obs.max_gap))
        extras["max_max_gap"] = float(np.max(obs.max_gap))
    if obs.left_case_fraction > 0.05:
        warnings.warn(
            f"{obs.left_case_fraction:.1%} of paths left the intended regime for "
            f"process {process!r}; diagnostics may be uninformative",
            stacklevel=2,
        )
    return DiagnosticsReport(
        name=f"martingale_{process}",
        horizon=T,
        reps=reps,
        checkpoints=ts,
        means=means,
        ses=ses,
        extras=extras,
    )


def stopping_time_diagnostics(
    instance: Instance,
    reps: int,
    base_seed: int,
    eta: float = 0.05,
    bins: int = 25,
) -> DiagnosticsReport:
    """Concentration of the basic-tier depletion period around its prediction.

    The predicted depletion ratio is (c1 + c2 - lam2 T) / (lam1 T); paths that
    never deplete carry the sentinel T + 1.  Also reports the mean premium
    slack at depletion, c2(tau) - lam2 (T - tau + 1), whose expectation should
    vanish on scarce instances.
    """
    T = instance.horizon
    lam1, lam2 = instance.arrivals.rates
    c1, c2 = instance.capacities
    if c1 + c2 > (lam1 + lam2) * T:
        warnings.warn("stopping-time diagnostics expect a scarce instance", stacklevel=2)
    res = run_batch(instance, DynUp2Policy(instance), reps, base_seed)
    predicted = (c1 + c2 - lam2 * T) / (lam1 * T)
    ratio = res.tau / T
    violations = np.abs(ratio - predicted) > eta
    hist, edges = np.histogram(ratio, bins=bins, range=(0.0, 1.0 + 2.0 / T))
    depleted = res.depleted
    extras = {
        "predicted_ratio": float(predicted),
        "eta": eta,
        "violation_fraction": float(np.mean(violations)),
        "never_depleted_fraction": float(np.mean(~depleted)),
        "hist_counts": hist,
        "hist_edges": edges,
    }
    if np.any(depleted):
        slack = res.c2_at_tau[depleted] - lam2 * (T - res.tau[depleted] + 1)
        m, se = _mean_se(slack)
        extras["premium_slack_mean"] = m
        extras["premium_slack_se"] = se
    return DiagnosticsReport(
        name="stopping_time",
        horizon=T,
        reps=reps,
        checkpoints=np.array([T]),
        means=np.array([float(np.mean(ratio))]),
        ses=np.array([float(np.std(ratio, ddof=1) / math.sqrt(reps))]),
        extras=extras,
    )


def pricing_loss_diagnostics(
    instance: Instance, reps: int, base_seed: int
) -> DiagnosticsReport:
    """Mean cumulative pricing loss before depletion.

    Per path: (number of periods before depletion) * R(v_bound) minus the sum
    of R(v_t) over those periods, where v_bound is the pathwise benchmark
    probability for the realized counts.  R is in proportion units.
    """
    T = instance.horizon
    curve = instance.curves[0]
    tracker = PricingLossTracker(instance, reps)
    res = run_batch(instance, DynUp2Policy(instance), reps, base_seed, observers=[tracker])
    k1 = res.counts[:, 0].astype(float)
    k2 = res.counts[:, 1].astype(float)
    usable = (k1 > 0) & (k2 < instance.capacities[1])
    v_bound = np.full(reps, curve.v_star)
    if np.any(usable):
        v_bound[usable] = np.clip(
            closed_form_v(
                float(instance.capacities[0]),
                float(instance.capacities[1]),
                k1[usable],
                k2[usable],
                curve.v_star,
            ),
            curve.floor,
            1.0,
        )
    rev_bound = v_bound * np.clip(curve._p(v_bound), 0.0, 1.0)
    loss = np.where(usable, tracker.periods * rev_bound - tracker.sum_rev, 0.0)
    m, se = _mean_se(loss)
    return DiagnosticsReport(
        name="pricing_loss",
        horizon=T,
        reps=reps,
        checkpoints=np.array([T]),
        means=np.array([m]),
        ses=np.array([se]),
        extras={"mean_loss": m, "se": se, "mean_periods": float(np.mean(tracker.periods))},
    )


def pricing_loss_sweep(
    template: ScalingTemplate, horizons, reps: int, base_seed: int
) -> list[DiagnosticsReport]:
    return [
        pricing_loss_diagnostics(template.instantiate(int(T)), reps, _child_seed(base_seed, i))
        for i, T in enumerate(horizons)
    ]


# ---------------------------------------------------------------------------
# Acceptance-curve calibration
# ---------------------------------------------------------------------------

@dataclass
class CalibrationFit:
    a: float
    b: float
    rss: float
    n_samples: int
    bin_mids: np.ndarray | None = None
    bin_freqs: np.ndarray | None = None
    bin_counts: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "schema": "dynup.calibration.v1",
            "a": self.a,
            "b": self.b,
            "rss": self.rss,
            "n_samples": self.n_samples,
        }


def synthesize_acceptance_samples(
    curve: AcceptanceCurve, n: int, seed: int
) -> np.ndarray:
    """Draw (proportion, accepted) pairs: x ~ U(0, 1), accept ~ Bern(f(x))."""
    rng = RngStream(seed=seed, stream=0xCA1).generator()
    x = rng.random(n)
    accepted = rng.random(n) < curve.accept_prob(x)
    return np.stack([x, accepted.astype(float)], axis=1)


def fit_acceptance_curve(samples, bins: int = 20) -> CalibrationFit:
    """Recover (a, b) of f(x) = exp(-a x**b) from offer outcomes.

    Samples are binned by proportion; bin frequencies of exactly 0 or 1 are
    Laplace-smoothed.  A log-log regression of -log(frequency) on x seeds a
    count-weighted nonlinear least-squares refinement.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be an (n, 2) array of (proportion, accepted)")
    n = len(arr)
    if n < 100:
        raise InsufficientDataError(f"need at least 100 samples, got {n}")
    x, acc = arr[:, 0], arr[:, 1]
    if np.any((x < 0) | (x > 1)):
        raise ValueError("proportions must lie in [0, 1]")
    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.clip(np.digitize(x, edges) - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    hits = np.bincount(idx, weights=acc, minlength=bins)
    nonempty = counts > 0
    if int(np.sum(nonempty)) < 5:
        raise InsufficientDataError("need samples spanning at least 5 proportion bins")
    counts = counts[nonempty]
    hits = hits[nonempty]
    mids = (0.5 * (edges[:-1] + edges[1:]))[nonempty]
    if np.all(hits == counts) or np.all(hits == 0):
        raise InsufficientDataError("degenerate outcomes: acceptance rate is flat 0 or 1")
    freq = hits / counts
    freq = np.where(hits == 0, 1.0 / (counts + 2.0), freq)
    freq = np.where(hits == counts, (counts + 1.0) / (counts + 2.0), freq)

    # Seed: log(-log f) = log a + b log x on bins with usable transforms.
    ok = (freq > 0.0) & (freq < 1.0) & (mids > 0.0)
    ly = np.log(-np.log(freq[ok]))
    lx = np.log(mids[ok])
    b0, loga0 = np.polyfit(lx, ly, 1)
    a0 = math.exp(loga0)
    p0 = (max(a0, 1e-3), min(max(b0, 1e-2), 10.0))

    def model(xv, a, b):
        return np.exp(-a * np.power(xv, b))

    popt, _ = optimize.curve_fit(
        model,
        mids,
        freq,
        p0=p0,
        sigma=1.0 / np.sqrt(counts),
        bounds=([1e-8, 1e-8], [np.inf, np.inf]),
        maxfev=20000,
    )
    a_hat, b_hat = float(popt[0]), float(popt[1])
    rss = float(np.sum((freq - model(mids, a_hat, b_hat)) ** 2))
    return CalibrationFit(
        a=a_hat,
        b=b_hat,
        rss=rss,
        n_samples=n,
        bin_mids=mids,
        bin_freqs=freq,
        bin_counts=counts,
    )


# ---------------------------------------------------------------------------
# Synthetic hotel study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HotelStudyConfig:
    day_profiles: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...] = (60, 30, 2)
    base_prices: tuple[float, ...] = (100.0, 160.0, 250.0)
    curve_params: tuple[tuple[float, float], ...] = ((4.4853, 0.9889), (2.33, 1.0))
    permutations: int = 100
    horizon_multiplier: float = 2.0
    static_price: float = 0.6
    base_seed: int = 1729

    def curves(self) -> tuple[AcceptanceCurve, ...]:
        return tuple(ExponentialPowerCurve(a=a, b=b) for a, b in self.curve_params)


@dataclass
class HotelDayResult:
    day: int
    requests: tuple[int, ...]
    static_mean: float
    dynamic_mean: float
    improvement_pct: float | None
    p_value: float | None


@dataclass
class HotelStudyReport:
    config: HotelStudyConfig
    days: list[HotelDayResult]
    aggregate_static: float
    aggregate_dynamic: float
    aggregate_improvement_pct: float | None
    pooled_p_value: float | None

    def to_json_dict(self) -> dict:
        return {
            "schema": "dynup.hotel.v1",
            "capacities": list(self.config.capacities),
            "permutations": self.config.permutations,
            "static_price": self.config.static_price,
            "days": [
                {
                    "day": d.day,
                    "requests": list(d.requests),
                    "static_mean": d.static_mean,
                    "dynamic_mean": d.dynamic_mean,
                    "improvement_pct": d.improvement_pct,
                    "p_value": d.p_value,
                }
                for d in self.days
            ],
            "aggregate": {
                "static": self.aggregate_static,
                "dynamic": self.aggregate_dynamic,
                "improvement_pct": self.aggregate_improvement_pct,
                "pooled_p_value": self.pooled_p_value,
            },
        }


def synthetic_day_profiles(
    n_days: int, mean_counts, seed: int
) -> tuple[tuple[int, ...], ...]:
    """Poisson day profiles around the given mean request counts per type."""
    rng = RngStream(seed=seed, stream=0xDA7).generator()
    means = np.asarray(mean_counts, dtype=float)
    return tuple(tuple(int(k) for k in rng.poisson(means)) for _ in range(n_days))


def _noisy_rates(requests, horizon: int, rng: np.random.Generator) -> list[float]:
    """Per-type rate beliefs: Unif(N - sqrt(N), N + sqrt(N)) / T, clipped."""
    lam = []
    for nreq in requests:
        if nreq <= 0:
            lam.append(0.0)
            continue
        width = math.sqrt(nreq)
        lam.append(max(rng.uniform(nreq - width, nreq + width), 0.0) / horizon)
    total = sum(lam)
    if total > 1.0:
        lam = [x * (1.0 - 1e-9) / total for x in lam]
    return lam


def _permuted_sequence(requests, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly shuffled arrival order with no-arrival slots filling the horizon."""
    seq = np.concatenate(
        [np.full(nreq, i + 1, dtype=np.int64) for i, nreq in enumerate(requests)]
        + [np.zeros(horizon - sum(requests), dtype=np.int64)]
    )
    rng.shuffle(seq)
    return seq


def hotel_study(config: HotelStudyConfig) -> HotelStudyReport:
    """Paired static-versus-dynamic comparison over permuted day instances.

    For each day and permutation, the same shuffled arrival order and the same
    acceptance uniforms drive both the static first-come first-served baseline
    and the n-tier dynamic policy; rate beliefs get the square-root uniform
    noise before the dynamic policy is initialized.
    """
    curves = config.curves()
    days: list[HotelDayResult] = []
    diffs_all: list[np.ndarray] = []
    static_total = 0.0
    dynamic_total = 0.0
    for day_idx, requests in enumerate(config.day_profiles):
        total_requests = int(sum(requests))
        horizon = max(int(math.ceil(config.horizon_multiplier * total_requests)), 1)
        static_rev = np.empty(config.permutations)
        dynamic_rev = np.empty(config.permutations)
        for j in range(config.permutations):
            seed = _child_seed(config.base_seed, day_idx, j)
            setup_rng = RngStream(seed=seed, stream=1).generator()
            rates = _noisy_rates(requests, horizon, setup_rng)
            sequence = _permuted_sequence(requests, horizon, setup_rng)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                inst = Instance(
                    horizon=horizon,
                    capacities=config.capacities,
                    ladder=PriceLadder(config.base_prices),
                    arrivals=ArrivalModel(rates),
                    curves=curves,
                )
            static_rev[j] = run_episode(
                inst, StaticPolicy(inst, config.static_price), seed, arrival_sequence=sequence
            ).total_revenue
            dynamic_rev[j] = run_episode(
                inst, DynUpNPolicy(inst), seed, arrival_sequence=sequence
            ).total_revenue
        static_mean = float(np.mean(static_rev))
        dynamic_mean = float(np.mean(dynamic_rev))
        static_total += static_mean
        dynamic_total += dynamic_mean
        if static_mean > 0.0:
            improvement = 100.0 * (dynamic_mean - static_mean) / static_mean
            diffs = dynamic_rev - static_rev
            diffs_all.append(diffs)
            if np.std(diffs, ddof=1) > 0:
                p_val = float(
                    stats.ttest_rel(dynamic_rev, static_rev, alternative="greater").pvalue
                )
            else:
                p_val = 0.0 if diffs.mean() > 0 else 1.0
        else:
            improvement = None
            p_val = None
        days.append(
            HotelDayResult(
                day=day_idx,
                requests=tuple(requests),
                static_mean=static_mean,
                dynamic_mean=dynamic_mean,
                improvement_pct=improvement,
                p_value=p_val,
            )
        )
    if diffs_all:
        pooled = np.concatenate(diffs_all)
        pooled_p = float(stats.ttest_1samp(pooled, 0.0, alternative="greater").pvalue)
    else:
        pooled_p = None
    agg_impr = (
        100.0 * (dynamic_total - static_total) / static_total if static_total > 0 else None
    )
    return HotelStudyReport(
        config=config,
        days=days,
        aggregate_static=static_total,
        aggregate_dynamic=dynamic_total,
        aggregate_improvement_pct=agg_impr,
        pooled_p_value=pooled_p,
    )


# ---------------------------------------------------------------------------
# Reference instances for the diagnostics (two tiers, prices 1 and 2).
# ---------------------------------------------------------------------------

_DIAG_CURVE_A = 2.33


def _two_tier(T: int, c1: int, c2: int, lam1: float, lam2: float) -> Instance:
    return Instance(
        horizon=T,
        capacities=(c1, c2),
        ladder=PriceLadder([1.0, 2.0]),
        arrivals=ArrivalModel([lam1, lam2]),
        curves=(ExponentialPowerCurve(a=_DIAG_CURVE_A),),
    )


def abundance_upper_instance(T: int) -> Instance:
    """Abundant stock with the premium-driven bound binding below v*."""
    return _two_tier(T, int(round(0.45 * T)), int(round(0.30 * T)), 0.5, 0.2)


def abundance_lower_instance(T: int) -> Instance:
    """Abundant stock with the basic-driven bound binding above v*."""
    return _two_tier(T, int(round(0.20 * T)), int(round(0.65 * T)), 0.5, 0.2)


def scarcity_instance(T: int) -> Instance:
    """Scarce stock: both constraints bind at the interior fixed point."""
    return _two_tier(T, int(round(0.15 * T)), int(round(0.25 * T)), 0.5, 0.2)


def scarcity_drift_free_instance(T: int) -> Instance:
    """Scarce stock with no direct premium demand.

    With a zero premium rate the truncation errors of the compensated
    process's three branches cancel to first order, so its distance to the
    actual pricing deviation shows the clean inverse-square horizon scaling;
    the pathwise benchmark probability is also count-independent here, which
    makes pricing-loss sweeps low-variance.
    """
    return _two_tier(T, int(round(0.15 * T)), int(round(0.25 * T)), 0.7, 0.0)
