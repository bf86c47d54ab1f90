import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmpert.core import DomainError, MarketEnv
from mmpert.oracle import (InconclusiveError, NumericError, Target, argmax_grid, closed_form,
                           expansion, expansion_order_check, feynman_kac_mc,
                           solve_verification_ode, verification_suite, write_report)
from mmpert.price_models import PriceModel, expected_terminal
from mmpert.stats import read_csv

from refdata import DELTA_REF


def test_argmax_examples():
    env = MarketEnv(k=1.0)
    d = argmax_grid(env, 3000.0, 3000.0, -1.0, 3.0, 1e-3)
    assert abs(d - 1.0) <= 1e-3
    env = MarketEnv(k=2.0)
    d = argmax_grid(env, 10.3, 10.0, -1.0, 3.0, 1e-3)
    assert abs(d - 0.2) <= 1e-3


def test_argmax_bid_side():
    env = MarketEnv(k=1.0)
    d = argmax_grid(env, 100.0, 100.4, -2.0, 4.0, 1e-4, side="bid")
    assert abs(d - (1.0 + 100.0 - 100.4)) <= 1e-4


def test_argmax_on_edge_is_inconclusive():
    with pytest.raises(InconclusiveError):
        argmax_grid(MarketEnv(), 3000.0, 3000.0, 2.0, 4.0, 1e-3)
    with pytest.raises(DomainError):
        argmax_grid(MarketEnv(), 3000.0, 3000.0, 2.0, 1.0, 1e-3)


@given(st.floats(0.2, 5.0), st.floats(-50, 50), st.floats(-1.0, 1.0))
def test_argmax_property(k, s, gap):
    env = MarketEnv(k=k)
    closed = 1 / k - gap
    d = argmax_grid(env, s, s - gap, closed - 1.0, closed + 1.0, 1e-4)
    assert abs(d - closed) <= 1e-4 + 1e-9


def test_fk_terminal_expectation(env, ou, bm):
    est = feynman_kac_mc(env, bm, Target.THETA1_ZERO, 0.0, 3000.0, 1.0, 20_000, 1)
    assert est.agrees(3000.0)
    est = feynman_kac_mc(env, ou, "Theta1Zero", 0.0, 3000.0, 1.0, 20_000, 2)
    assert est.agrees(3000.0 + DELTA_REF)
    assert abs(expected_terminal(ou, 0.0, 3000.0, 1.0) - (3000 + DELTA_REF)) < 1e-9


def test_fk_sinh_vanishes_for_martingale(env, bm):
    est = feynman_kac_mc(env, bm, Target.THETA1_1, 0.0, 3000.0, 1.0, 500, 3)
    assert est.estimate == 0.0 and est.agrees(0.0)


def test_fk_value_terms_agree_with_quadrature(env, ou):
    for i, target in enumerate((Target.U_MM, Target.THETA1_1)):
        est = feynman_kac_mc(env, ou, target, 0.2, 3004.0, 1.0, 20_000, 40 + i)
        assert est.agrees(closed_form(env, ou, target, 0.2, 3004.0, 1.0))


def test_fk_requires_paths(env, ou):
    with pytest.raises(DomainError):
        feynman_kac_mc(env, ou, Target.U_MM, 0.0, 3000.0, 1.0, 50, 0)


def test_ode_eps_zero_is_pure_carry():
    env = MarketEnv(epsilon=0.0)
    grid = solve_verification_ode(env, 3000.0, 30, 2000, 1.0)
    c0 = (2 * env.A / (math.e * env.k)) * math.exp(-env.k * env.z)
    inner = slice(20, 41)
    gain = grid.values[inner, 0] - grid.values[inner, -1]
    assert np.all(np.abs(gain - c0) <= 1e-6)
    mid = grid.values[inner, 1000] - grid.values[inner, -1]
    assert np.all(np.abs(mid - c0 * 0.5) <= 1e-6)


def test_ode_terminal_layer(env):
    grid = solve_verification_ode(env, 3000.0, 10, 400, 1.0)
    q = grid.q
    np.testing.assert_array_equal(grid.values[:, -1], 3000.0 * q - env.epsilon * env.eta * env.z * q * q)
    flat = solve_verification_ode(env, 3000.0, 10, 5, 0.0)
    np.testing.assert_array_equal(flat.values[:, 0], flat.values[:, -1])


def test_ode_refinement_converged(env):
    coarse = solve_verification_ode(env, 3000.0, 30, 2000, 1.0)
    fine = solve_verification_ode(env, 3000.0, 30, 4000, 1.0)
    inner = slice(20, 41)
    rel = np.abs(coarse.values[inner, 0] - fine.values[inner, 0]) / np.abs(fine.values[inner, 0])
    assert rel.max() < 1e-8


def test_ode_blowup_raises():
    with pytest.raises(NumericError, match="non-finite"):
        solve_verification_ode(MarketEnv(epsilon=1.0), 3000.0, 30, 2, 1.0)


def test_ode_argument_checks(env):
    with pytest.raises(DomainError):
        solve_verification_ode(env, 3000.0, 2, 10, 1.0)
    with pytest.raises(DomainError):
        solve_verification_ode(env, 3000.0, 5, 10, 1.0, boundary="periodic")
    solve_verification_ode(env, 3000.0, 1, 400, 1.0, boundary="reflect")


def test_expansion_error_shrinks_quadratically(env):
    (e2, err2), (e1, err1) = expansion_order_check(env, 3000.0, [0.002, 0.001], 30, 2000, 1.0)
    assert (e2, e1) == (0.002, 0.001)
    assert 3.0 <= err2 / err1 <= 5.5
    # |error| <= C eps^2 with C calibrated from this run (about 7.5e4)
    assert err1 <= 1e5 * e1**2


def test_expansion_check_preconditions(env):
    with pytest.raises(DomainError):
        expansion_order_check(env, 3000.0, [0.001], 30, 100, 1.0)
    with pytest.raises(DomainError):
        expansion_order_check(env, 3000.0, [0.001, 0.002], 30, 100, 1.0)


def test_expansion_terminal_value(env):
    q = np.arange(-5, 6)
    np.testing.assert_allclose(expansion(env, 3000.0, q, 1.0, 1.0),
                               3000.0 * q - env.epsilon * env.eta * env.z * q * q, atol=1e-9)


def test_suite_and_report(tmp_path, env, ou):
    results = verification_suite(env, ou, n_mc=2000, seed=5)
    assert all(r.passed for r in results), [r.check for r in results if not r.passed]
    write_report(results, tmp_path / "verify.csv")
    rows = read_csv(tmp_path / "verify.csv")
    assert [r["check"] for r in rows] == [r.check for r in results]
    assert set(rows[0]) == {"check", "computed", "reference", "tolerance", "passed"}
    tight = verification_suite(env, ou, n_mc=2000, seed=5, tol_scale=1e-3)
    assert not all(r.passed for r in tight)
