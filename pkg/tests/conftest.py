import pytest

from dynup.domain import (
    ArrivalModel,
    ExponentialPowerCurve,
    Instance,
    LinearCurve,
    PriceLadder,
)


@pytest.fixture
def exp11():
    return ExponentialPowerCurve(a=1.0, b=1.0)


@pytest.fixture
def exp233():
    return ExponentialPowerCurve(a=2.33, b=1.0)


@pytest.fixture
def hotel_curve():
    return ExponentialPowerCurve(a=4.4853, b=0.9889)


@pytest.fixture
def linear1():
    return LinearCurve(slope=1.0)


def make_instance(T, caps, rates, curve_a=2.33, prices=(1.0, 2.0), curve_b=1.0):
    n = len(caps)
    curves = tuple(ExponentialPowerCurve(a=curve_a, b=curve_b) for _ in range(n - 1))
    return Instance(
        horizon=T,
        capacities=tuple(caps),
        ladder=PriceLadder(list(prices)),
        arrivals=ArrivalModel(list(rates)),
        curves=curves,
    )


@pytest.fixture
def small_instance():
    return make_instance(24, (8, 7), (0.5, 0.2))
