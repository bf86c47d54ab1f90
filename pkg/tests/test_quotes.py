import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmpert.core import MarketEnv, MarketState
from mmpert.price_models import PriceModel
from mmpert.quotes import (Mode, bias_integral, intensity, penalty_terms, quotes_first_order,
                           quotes_with_costs, quotes_zero_order, theta_first_order,
                           unitary_penalty, value_function_zero)

from refdata import DELTA_REF

prices = st.floats(2950.0, 3050.0)
times = st.floats(0.0, 1.0)
inventories = st.integers(-200, 200)


def test_intensity(env):
    assert intensity(env, 1.0) == pytest.approx(1000 * math.exp(-1.5), rel=1e-15)
    assert intensity(env, 1.0) == pytest.approx(223.13, abs=5e-3)
    assert intensity(env, -env.z) == env.A
    d = 0.7
    ratio = intensity(env, d) / env.A
    assert intensity(env, 2 * (d + env.z) - env.z) / env.A == pytest.approx(ratio**2, rel=1e-13)


def test_zero_order_martingale(env, bm):
    c = quotes_zero_order(env, bm, 0.3, 3000.0, 1.0)
    assert (c.delta_plus, c.delta_minus, c.psi, c.r) == (1.0, 1.0, 2.0, 3000.0)


def test_zero_order_ou(env, ou):
    c = quotes_zero_order(env, ou, 0.0, 3000.0, 1.0)
    assert c.delta_plus == pytest.approx(1 + DELTA_REF, abs=1e-12)
    assert c.delta_minus == pytest.approx(1 - DELTA_REF, abs=1e-12)
    assert c.r == pytest.approx(3000.8565, abs=1e-4)


def test_zero_order_at_horizon(env, ou):
    c = quotes_zero_order(env, ou, 1.0, 3004.0, 1.0)
    assert (c.delta_plus, c.delta_minus, c.r) == (1.0, 1.0, 3004.0)


def test_unitary_penalty(env):
    assert unitary_penalty(env, 0.0, 1.0) == pytest.approx(0.75, abs=1e-15)
    assert unitary_penalty(replace(env, eta=0.0, nu=0.0), 0.2, 1.0) == 0.0
    assert unitary_penalty(env, 1.0, 1.0) == env.eta * env.z
    assert unitary_penalty(env, 0.0, 1.0, Mode.SIMPLIFIED) == env.eta * env.z


def test_bias_integral_martingale_exact(env, bm):
    assert bias_integral(env, bm, 0.0, 2990.0, 1.0) == 0.0


def test_bias_integral_vanishes_for_fast_reversion_at_mean(env):
    fast = PriceModel.ou(0.5, 500.0, 3009.0)
    assert abs(bias_integral(env, fast, 0.0, 3009.0, 1.0)) < 1e-9


def test_bias_integral_odd_in_distance_to_mean(env, ou):
    up = bias_integral(env, ou, 0.0, 3009.0 + 4.0, 1.0)
    dn = bias_integral(env, ou, 0.0, 3009.0 - 4.0, 1.0)
    assert up == pytest.approx(-dn, rel=1e-12)
    assert bias_integral(env, ou, 0.0, 3009.0, 1.0) == 0.0


def test_first_order_eps_zero_matches_zero_order(env, ou, bm):
    e0 = replace(env, epsilon=0.0)
    for model in (ou, bm):
        for mode in Mode:
            state = MarketState(0.25, 2997.0, q=17)
            assert quotes_first_order(e0, model, state, 1.0, mode) == \
                quotes_zero_order(e0, model, 0.25, 2997.0, 1.0)


def test_first_order_martingale_spread(env, bm):
    c = quotes_first_order(env, bm, MarketState(0.0, 3000.0, 0), 1.0)
    assert abs(c.psi - 2.0015) <= 1e-12
    assert c.r == 3000.0


def test_centre_moves_against_inventory(env, bm):
    c0 = quotes_first_order(env, bm, MarketState(0.0, 3000.0, 0), 1.0)
    c10 = quotes_first_order(env, bm, MarketState(0.0, 3000.0, 10), 1.0)
    assert c10.r - c0.r == pytest.approx(-0.015, abs=1e-9)


def test_costs_examples(env, ou):
    state = MarketState(0.1, 3003.0, q=-4)
    assert quotes_with_costs(replace(env, alpha=0.0), ou, state, 1.0) == \
        quotes_first_order(env, ou, state, 1.0)
    c = quotes_with_costs(replace(env, epsilon=0.0, alpha=0.05), ou, state, 1.0)
    assert c.psi == pytest.approx(2.1, abs=1e-12)
    pi = unitary_penalty(env, 0.0, 1.0)
    rebate = replace(env, alpha=-1.0 / env.k - env.epsilon * pi)
    c = quotes_with_costs(rebate, ou, MarketState(0.0, 3001.0, 3), 1.0)
    assert abs(c.psi) <= 1e-12


def test_simplified_mode_drops_integrals(env, ou):
    state = MarketState(0.0, 3000.0, q=5)
    c = quotes_first_order(env, ou, state, 1.0, Mode.SIMPLIFIED)
    pi = env.eta * env.z
    assert c.psi == pytest.approx(2 / env.k + 2 * env.epsilon * pi, abs=1e-12)
    assert c.r - 3000.0 == pytest.approx(DELTA_REF - 2 * env.epsilon * pi * 5, abs=1e-10)


def test_value_function_zero(env, ou, bm):
    v = value_function_zero(env, bm, 0.0, 3000.0, 0, 0.0, 1.0)
    assert v.u_hold == 0.0
    assert v.u_mm == pytest.approx((2 / math.e) * 1000 * math.exp(-0.5), rel=1e-15)
    v = value_function_zero(env, ou, 1.0, 3000.0, 7, 12.5, 1.0)
    assert v.u_mm == 0.0 and v.u_hold == 12.5 + 7 * 3000.0
    assert v.total == v.u_hold
    assert value_function_zero(env, ou, 0.0, 3000.0, 0, 0.0, 1.0).u_mm >= \
        value_function_zero(env, bm, 0.0, 3000.0, 0, 0.0, 1.0).u_mm


def test_theta_first_order(env, ou, bm):
    th2, th1 = theta_first_order(env, bm, 0.0, 3000.0, 1.0)
    assert th2 == pytest.approx(-0.75, abs=1e-15) and th1 == 0.0
    assert theta_first_order(replace(env, eta=0.0, nu=0.0), ou, 0.0, 3000.0, 1.0) == (0.0, 0.0)
    terms = penalty_terms(env, ou, 0.0, 3000.0, 1.0)
    assert theta_first_order(env, ou, 0.0, 3000.0, 1.0) == (-terms.pi_tilde, -terms.bias_integral)


def test_quadrature_converged(env, ou):
    for s in (2990.0, 3000.0, 3020.0):
        b32 = bias_integral(env, ou, 0.0, s, 1.0, 32)
        b64 = bias_integral(env, ou, 0.0, s, 1.0, 64)
        assert abs(b64 - b32) <= 1e-10 * abs(b64)
        u32 = value_function_zero(env, ou, 0.0, s, 0, 0.0, 1.0, 32).u_mm
        u64 = value_function_zero(env, ou, 0.0, s, 0, 0.0, 1.0, 64).u_mm
        assert abs(u64 - u32) <= 1e-10 * u64


# ------------------------------------------------------------ properties

@given(prices, times, inventories, inventories)
def test_spread_independent_of_inventory_and_bet(s, t, q1, q2):
    env = MarketEnv()
    ou = PriceModel.ou(0.5, 0.1, 3009.0)
    c1 = quotes_first_order(env, ou, MarketState(t, s, q1), 1.0)
    c2 = quotes_first_order(env, ou, MarketState(t, 3009.0, q2), 1.0)
    ref = 2 / env.k + 2 * env.epsilon * unitary_penalty(env, t, 1.0)
    assert c1.psi == pytest.approx(ref, abs=1e-11)
    assert c2.psi == pytest.approx(ref, abs=1e-11)


@given(prices, times, inventories)
def test_centre_slope_in_inventory(s, t, q):
    env = MarketEnv()
    ou = PriceModel.ou(0.5, 0.1, 3009.0)
    c0 = quotes_first_order(env, ou, MarketState(t, s, q), 1.0)
    c1 = quotes_first_order(env, ou, MarketState(t, s, q + 1), 1.0)
    slope = -2 * env.epsilon * unitary_penalty(env, t, 1.0)
    assert c1.r - c0.r == pytest.approx(slope, abs=1e-9)
    assert c1.r < c0.r


@given(st.floats(0, 2), st.floats(0, 2), st.floats(0, 0.01), st.floats(1e-3, 0.5), times)
def test_spread_nondecreasing_in_penalties(eta, nu, eps, bump, t):
    bm = PriceModel.martingale(0.5)
    state = MarketState(t, 3000.0, 3)
    base = MarketEnv(eta=eta, nu=nu, epsilon=eps)
    psi = quotes_first_order(base, bm, state, 1.0).psi
    for field in ("eta", "nu", "epsilon"):
        up = replace(base, **{field: getattr(base, field) + bump})
        assert quotes_first_order(up, bm, state, 1.0).psi >= psi - 1e-15


@given(st.floats(-0.5, 0.5), prices, times, inventories, st.sampled_from(list(Mode)))
def test_cost_widens_spread_by_two_alpha(alpha, s, t, q, mode):
    env = MarketEnv(alpha=alpha)
    ou = PriceModel.ou(0.5, 0.1, 3009.0)
    state = MarketState(t, s, q)
    diff = quotes_with_costs(env, ou, state, 1.0, mode).psi - quotes_first_order(env, ou, state, 1.0, mode).psi
    assert diff == pytest.approx(2 * alpha, abs=1e-12)


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), prices, times)
def test_z_absent_from_zero_order_and_lowers_u_mm(z1, z2, s, t):
    ou = PriceModel.ou(0.5, 0.1, 3009.0)
    lo, hi = sorted((z1, z2))
    assert quotes_zero_order(MarketEnv(z=lo), ou, t, s, 1.0) == \
        quotes_zero_order(MarketEnv(z=hi), ou, t, s, 1.0)
    if hi > lo + 1e-6 and t < 1.0:
        u_lo = value_function_zero(MarketEnv(z=lo), ou, t, s, 0, 0.0, 1.0).u_mm
        u_hi = value_function_zero(MarketEnv(z=hi), ou, t, s, 0, 0.0, 1.0).u_mm
        assert u_hi < u_lo


@given(st.floats(2000, 4000), st.floats(0.01, 1.0), times)
def test_u_mm_minimal_at_zero_bet(s, a, t):
    env = MarketEnv()
    model = PriceModel.ou(0.5, a, 3009.0)
    u_at_mu = value_function_zero(env, model, t, 3009.0, 0, 0.0, 1.0).u_mm
    u = value_function_zero(env, model, t, s, 0, 0.0, 1.0).u_mm
    assert u >= u_at_mu * (1 - 1e-14) >= 0.0


@given(prices, times)
def test_penalty_nonnegative(s, t):
    env = MarketEnv()
    ou = PriceModel.ou(0.5, 0.1, 3009.0)
    assert penalty_terms(env, ou, t, s, 1.0).pi_tilde >= 0.0
    assert bias_integral(env, PriceModel.martingale(0.5), t, s, 1.0) == 0.0


def test_quotes_vectorise_over_states(env, ou):
    # the per-step tables used by the simulator reproduce the scalar quotes
    from mmpert.multi import MultiEnv
    from mmpert.simulation import Policy, SimConfig, build_tables

    cfg = SimConfig(n_steps=10, n_paths=1, policy=Policy.FIRST_ORDER_FULL)
    tb = build_tables(MultiEnv.from_single(env), [ou], [ou], cfg, ou.sigma)
    for n, t in enumerate(tb.times):
        for s, q in ((2995.0, 3), (3012.0, -7)):
            c = quotes_first_order(env, ou, MarketState(t, s, q), 1.0)
            xm = tb.pmu[0] - s
            bias = float(np.sum(tb.bias_w[n, 0] * np.sinh(tb.bias_b[n, 0] * xm)))
            dp = tb.inv_k[0] + tb.dcoef[n, 0] * xm + tb.eps * (-bias - 2 * tb.pen[n, 0, 0] * q + tb.pen[n, 0, 0])
            assert dp == pytest.approx(c.delta_plus, abs=1e-12)
