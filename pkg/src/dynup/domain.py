"""Core model objects: price ladders, arrival rates, acceptance curves, instances.

All upgrade-fee arithmetic happens in *proportion space*: a fee u charged for
moving from tier i to tier i+1 is represented by x = u / (r_{i+1} - r_i),
x in [0, 1].  An acceptance curve f maps a proportion to the probability that
the requester takes the offer, with f(0) = 1 (nobody declines a free upgrade)
and f strictly decreasing.  Its inverse p = f^-1 maps a target acceptance
probability back to the proportion that induces it, and R(v) = v * p(v) is the
expected fee revenue (in proportion units) when pricing to hit probability v.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "AcceptanceCurve",
    "ExponentialPowerCurve",
    "LinearCurve",
    "PriceLadder",
    "ArrivalModel",
    "Instance",
    "CurveValidationError",
    "accept_prob",
    "inverse_price",
    "revenue_curve",
    "revenue_maximizer",
    "instance_from_dict",
    "instance_to_dict",
    "load_instance",
    "save_instance",
]

_GRID_POINTS = 1001
_GOLDEN_TOL = 1e-9
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class CurveValidationError(ValueError):
    """Raised when an acceptance curve violates its structural requirements."""


def _golden_section_max(fn, lo: float, hi: float, tol: float = _GOLDEN_TOL) -> float:
    """Locate the maximizer of a unimodal fn on [lo, hi] to interval width tol."""
    a, b = lo, hi
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    c = b - _INV_PHI * h
    d = a + _INV_PHI * h
    yc, yd = fn(c), fn(d)
    while h > tol:
        if yc > yd:
            b, d, yd = d, c, yc
            h = b - a
            c = b - _INV_PHI * h
            yc = fn(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + _INV_PHI * h
            yd = fn(d)
    return 0.5 * (a + b)


class AcceptanceCurve:
    """Base class for acceptance curves over the upgrade proportion x in [0, 1].

    Subclasses implement ``_f`` and ``_p`` (both vectorized over numpy arrays).
    Construction validates the structural assumptions on a fixed grid and
    caches the revenue maximizer ``v_star``.
    """

    def __post_init__(self) -> None:
        self._validate()
        object.__setattr__(self, "_v_star", self._locate_maximizer())

    # -- primitive maps (subclass responsibility) ---------------------------
    def _f(self, x):
        raise NotImplementedError

    def _p(self, v):
        raise NotImplementedError

    # -- public surface ------------------------------------------------------
    @property
    def floor(self) -> float:
        """f(1): the lowest acceptance probability the curve can induce."""
        return float(self._f(1.0))

    @property
    def v_star(self) -> float:
        """Maximizer of R(v) = v * p(v) over [f(1), 1]."""
        return self._v_star

    def accept_prob(self, x):
        """Probability the requester accepts an upgrade at proportion x."""
        xa = np.asarray(x, dtype=float)
        if np.any(xa < 0.0) or np.any(xa > 1.0):
            raise ValueError(f"proportion outside [0, 1]: {x!r}")
        out = self._f(xa)
        return float(out) if np.isscalar(x) or xa.ndim == 0 else out

    def inverse_price(self, v):
        """Proportion that induces acceptance probability v; domain [f(1), 1]."""
        va = np.asarray(v, dtype=float)
        lo = self.floor
        if np.any(va < lo - 1e-12) or np.any(va > 1.0 + 1e-12):
            raise ValueError(f"probability outside [f(1), 1] = [{lo:.9g}, 1]: {v!r}")
        out = np.clip(self._p(np.clip(va, lo, 1.0)), 0.0, 1.0)
        return float(out) if np.isscalar(v) or va.ndim == 0 else out

    def revenue(self, v):
        """Expected fee revenue R(v) = v * p(v), in proportion units."""
        va = np.asarray(v, dtype=float)
        out = va * self.inverse_price(va)
        return float(out) if np.isscalar(v) or va.ndim == 0 else out

    def price_for(self, v) -> float:
        """Proportion to charge for a target probability, clamping v to [f(1), 1]."""
        vc = min(max(float(v), self.floor), 1.0)
        return min(max(self.p_scalar(vc), 0.0), 1.0)

    # Scalar fast paths for per-period policy loops; subclasses override.
    def f_scalar(self, x: float) -> float:
        return float(self._f(x))

    def p_scalar(self, v: float) -> float:
        return float(self._p(v))

    # -- construction-time validation ----------------------------------------
    def _locate_maximizer(self) -> float:
        lo = self.floor
        grid = np.linspace(lo, 1.0, _GRID_POINTS)
        rev = grid * np.clip(self._p(grid), 0.0, 1.0)
        k = int(np.argmax(rev))
        a = grid[max(k - 1, 0)]
        b = grid[min(k + 1, _GRID_POINTS - 1)]
        return _golden_section_max(lambda v: v * self._p(v), a, b)

    def _validate(self) -> None:
        f0 = float(self._f(0.0))
        if abs(f0 - 1.0) > 1e-12:
            raise CurveValidationError(f"f(0) must equal 1, got {f0!r}")
        xs = np.linspace(0.0, 1.0, _GRID_POINTS)
        fx = self._f(xs)
        if np.any(fx < -1e-12) or np.any(fx > 1.0 + 1e-12):
            raise CurveValidationError("f must map [0, 1] into [0, 1]")
        if np.any(np.diff(fx) >= 0.0):
            raise CurveValidationError("f must be strictly decreasing on [0, 1]")
        # Inverse round-trip on the grid.
        back = self._p(np.clip(fx, float(fx[-1]), 1.0))
        if np.max(np.abs(back - xs)) > 1e-9:
            raise CurveValidationError("p(f(x)) does not round-trip to x")
        # Quasi-concavity of R on a 1000-point grid over [f(1), 1]: no strict
        # interior local minimum.
        vs = np.linspace(float(fx[-1]), 1.0, _GRID_POINTS)
        rev = vs * np.clip(self._p(vs), 0.0, 1.0)
        interior_min = (rev[1:-1] < rev[:-2] - 1e-12) & (rev[1:-1] < rev[2:] - 1e-12)
        if np.any(interior_min):
            raise CurveValidationError("R(v) = v p(v) has an interior local minimum")


@dataclass(frozen=True)
class ExponentialPowerCurve(AcceptanceCurve):
    """f(x) = exp(-a * x**b) with a > 0, b > 0."""

    a: float
    b: float = 1.0

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and self.b > 0.0):
            raise CurveValidationError("exponential-power curve needs a > 0 and b > 0")
        super().__post_init__()

    def _f(self, x):
        return np.exp(-self.a * np.power(x, self.b))

    def _p(self, v):
        with np.errstate(divide="ignore"):
            t = -np.log(v) / self.a
        return np.power(t, 1.0 / self.b)

    def f_scalar(self, x: float) -> float:
        return math.exp(-self.a * x**self.b)

    def p_scalar(self, v: float) -> float:
        if v <= 0.0:
            return math.inf
        return (-math.log(v) / self.a) ** (1.0 / self.b)


@dataclass(frozen=True)
class LinearCurve(AcceptanceCurve):
    """f(x) = 1 - slope * x with 0 < slope <= 1 so f stays a probability."""

    slope: float

    def __post_init__(self) -> None:
        if not (0.0 < self.slope <= 1.0):
            raise CurveValidationError("linear curve needs slope in (0, 1]")
        super().__post_init__()

    def _f(self, x):
        return 1.0 - self.slope * np.asarray(x, dtype=float)

    def _p(self, v):
        return (1.0 - np.asarray(v, dtype=float)) / self.slope

    def f_scalar(self, x: float) -> float:
        return 1.0 - self.slope * x

    def p_scalar(self, v: float) -> float:
        return (1.0 - v) / self.slope


# Functional aliases matching the operation names used throughout the package.
def accept_prob(curve: AcceptanceCurve, x):
    return curve.accept_prob(x)


def inverse_price(curve: AcceptanceCurve, v):
    return curve.inverse_price(v)


def revenue_curve(curve: AcceptanceCurve, v):
    return curve.revenue(v)


def revenue_maximizer(curve: AcceptanceCurve) -> float:
    return curve.v_star


@dataclass(frozen=True)
class PriceLadder:
    """Strictly increasing, strictly positive base prices r_1 < ... < r_n."""

    base_prices: tuple[float, ...]

    def __init__(self, base_prices: Sequence[float]):
        prices = tuple(float(r) for r in base_prices)
        if not prices:
            raise ValueError("price ladder must not be empty")
        if any(r <= 0.0 for r in prices):
            raise ValueError("base prices must be strictly positive")
        if any(b <= a for a, b in zip(prices, prices[1:])):
            raise ValueError("base prices must be strictly increasing")
        object.__setattr__(self, "base_prices", prices)

    def __len__(self) -> int:
        return len(self.base_prices)

    def __getitem__(self, i: int) -> float:
        return self.base_prices[i]

    def gap(self, i: int) -> float:
        """Price gap r_{i+2} - r_{i+1} for the upgrade edge i (0-indexed)."""
        return self.base_prices[i + 1] - self.base_prices[i]


@dataclass(frozen=True)
class ArrivalModel:
    """Per-period arrival probabilities, one entry per resource type.

    The no-arrival probability is always derived as 1 - sum(rates), never
    stored, so the total mass is exactly one.
    """

    rates: tuple[float, ...]

    def __init__(self, rates: Sequence[float]):
        rr = tuple(float(x) for x in rates)
        if any(r < 0.0 for r in rr):
            raise ValueError("arrival rates must be non-negative")
        if sum(rr) > 1.0 + 1e-12:
            raise ValueError(f"arrival rates sum to {sum(rr)!r} > 1")
        object.__setattr__(self, "rates", rr)

    @property
    def no_arrival_rate(self) -> float:
        return 1.0 - sum(self.rates)

    def __len__(self) -> int:
        return len(self.rates)

    def __getitem__(self, i: int) -> float:
        return self.rates[i]


@dataclass(frozen=True)
class Instance:
    """A complete problem instance: horizon, capacities, prices, rates, curves."""

    horizon: int
    capacities: tuple[int, ...]
    ladder: PriceLadder
    arrivals: ArrivalModel
    curves: tuple[AcceptanceCurve, ...]
    premium_headroom: tuple[bool, ...] = field(init=False)

    def __post_init__(self) -> None:
        n = len(self.ladder)
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if len(self.capacities) != n:
            raise ValueError("capacities and base prices must have equal length")
        if len(self.arrivals) != n:
            raise ValueError("arrival rates and base prices must have equal length")
        if len(self.curves) != n - 1:
            raise ValueError("need exactly n - 1 acceptance curves")
        if any(c < 0 for c in self.capacities):
            raise ValueError("capacities must be non-negative")
        # For each upgrade edge, record whether the upgrade target's stock
        # exceeds its own expected demand.  A violation makes the upgrade
        # channel degenerate but is a modelling warning, not an error.
        headroom = tuple(
            self.capacities[i + 1] > self.arrivals[i + 1] * self.horizon
            for i in range(n - 1)
        )
        object.__setattr__(self, "premium_headroom", headroom)
        if not all(headroom):
            bad = [i + 2 for i, ok in enumerate(headroom) if not ok]
            warnings.warn(
                f"expected demand meets or exceeds stock for tier(s) {bad}; "
                "the upgrade channel into those tiers is degenerate",
                stacklevel=2,
            )

    @property
    def n_types(self) -> int:
        return len(self.ladder)

    def price(self, i: int) -> float:
        return self.ladder[i]

    def rate(self, i: int) -> float:
        return self.arrivals[i]


# ---------------------------------------------------------------------------
# Config serialization.  Schema (JSON object):
#   horizon        int
#   capacities     [int, ...]                length n
#   base_prices    [float, ...]              length n, increasing
#   arrival_rates  [float, ...]              length n, sum <= 1
#   curves         [{"family": "exp_power", "a": float, "b": float} |
#                   {"family": "linear", "slope": float}, ...]   length n - 1
# ---------------------------------------------------------------------------

def _curve_from_dict(d: dict) -> AcceptanceCurve:
    fam = d.get("family")
    if fam == "exp_power":
        return ExponentialPowerCurve(a=float(d["a"]), b=float(d.get("b", 1.0)))
    if fam == "linear":
        return LinearCurve(slope=float(d["slope"]))
    raise ValueError(f"unknown curve family: {fam!r}")


def _curve_to_dict(curve: AcceptanceCurve) -> dict:
    if isinstance(curve, ExponentialPowerCurve):
        return {"family": "exp_power", "a": curve.a, "b": curve.b}
    if isinstance(curve, LinearCurve):
        return {"family": "linear", "slope": curve.slope}
    raise TypeError(f"cannot serialize curve of type {type(curve).__name__}")


def instance_from_dict(d: dict) -> Instance:
    try:
        return Instance(
            horizon=int(d["horizon"]),
            capacities=tuple(int(c) for c in d["capacities"]),
            ladder=PriceLadder(d["base_prices"]),
            arrivals=ArrivalModel(d["arrival_rates"]),
            curves=tuple(_curve_from_dict(c) for c in d["curves"]),
        )
    except KeyError as exc:
        raise ValueError(f"instance config missing key: {exc}") from exc


def instance_to_dict(inst: Instance) -> dict:
    return {
        "horizon": inst.horizon,
        "capacities": list(inst.capacities),
        "base_prices": list(inst.ladder.base_prices),
        "arrival_rates": list(inst.arrivals.rates),
        "curves": [_curve_to_dict(c) for c in inst.curves],
    }


def load_instance(path: str | os.PathLike) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def save_instance(inst: Instance, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2, sort_keys=True)
        fh.write("\n")
