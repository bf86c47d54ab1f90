import math

import pytest
from hypothesis import given, strategies as st

from mmpert.core import (ControlSet, DomainError, Horizon, MarketEnv, MarketState,
                         check_time, validate_env)

finite = st.floats(-1e4, 1e4, allow_nan=False)


def test_reference_block_is_valid():
    assert validate_env(MarketEnv(A=1000, k=1, z=0.5, sigma=0.5, alpha=0.05,
                                  epsilon=0.001, eta=1, nu=1)) == []


def test_zero_k_reported():
    assert "k must be > 0" in validate_env(MarketEnv(k=0.0))


def test_rebate_allowed():
    assert validate_env(MarketEnv(alpha=-0.1)) == []


@pytest.mark.parametrize("field,value,message", [
    ("A", 0.0, "A must be > 0"),
    ("sigma", -1.0, "sigma must be > 0"),
    ("z", -0.1, "z must be >= 0"),
    ("epsilon", -1e-3, "epsilon must be >= 0"),
    ("eta", -1.0, "eta must be >= 0"),
    ("nu", float("nan"), "nu must be >= 0"),
    ("alpha", float("inf"), "alpha must be finite"),
])
def test_each_constraint(field, value, message):
    report = validate_env(MarketEnv(**{field: value}))
    assert report == [message]


def test_state_and_horizon_checks():
    with pytest.raises(DomainError):
        MarketState(0.0, 3000.0, q=1.5)
    with pytest.raises(DomainError):
        MarketState(-0.1, 3000.0)
    with pytest.raises(DomainError):
        Horizon(0.0)
    with pytest.raises(DomainError):
        check_time(1.1, 1.0)
    check_time(1.0, 1.0)


@given(finite, finite, finite)
def test_control_set_round_trip(dp, dm, s):
    c = ControlSet.from_deltas(dp, dm, s)
    assert c.psi == dp + dm
    assert c.r - s == pytest.approx((dp - dm) / 2, abs=1e-9 * max(1.0, abs(s)))
    back = ControlSet.from_spread(c.psi, c.r, s)
    scale = 1e-12 * max(1.0, abs(s), abs(dp), abs(dm))
    assert math.isclose(back.delta_plus, dp, abs_tol=4 * scale)
    assert math.isclose(back.delta_minus, dm, abs_tol=4 * scale)


@given(finite, finite)
def test_symmetric_quotes_centre_on_mid(d, s):
    c = ControlSet.from_deltas(d, d, s)
    assert c.r == s
    assert c.ask == s + d and c.bid == s - d
