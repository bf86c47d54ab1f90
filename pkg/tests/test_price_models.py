import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmpert.core import DomainError
from mmpert.price_models import (PriceModel, directional_bet, expected_terminal, simulate_terminal,
                                 step, transition_law)

from refdata import DELTA_REF


def test_expected_terminal_ou(ou):
    ref = 3000 * math.exp(-0.1) + 3009 * (1 - math.exp(-0.1))
    assert expected_terminal(ou, 0.0, 3000.0, 1.0) == pytest.approx(ref, abs=1e-9)
    assert expected_terminal(ou, 0.0, 3000.0, 1.0) == pytest.approx(3000.8565, abs=1e-4)


def test_expected_terminal_trivial(ou, bm):
    assert expected_terminal(bm, 0.3, 2999.5, 1.0) == 2999.5
    assert expected_terminal(ou, 1.0, 2999.5, 1.0) == 2999.5


def test_directional_bet(ou, bm):
    assert directional_bet(ou, 0.0, 3000.0, 1.0) == pytest.approx(9 * (1 - math.exp(-0.1)), abs=1e-12)
    assert directional_bet(ou, 0.0, 3000.0, 1.0) == pytest.approx(DELTA_REF, abs=1e-15)
    assert directional_bet(bm, 0.0, 3000.0, 1.0) == 0.0
    assert directional_bet(ou, 0.2, 3009.0, 1.0) == 0.0
    with pytest.raises(DomainError):
        directional_bet(ou, 0.5, 3000.0, 0.4)


def test_transition_law(ou, bm):
    law = transition_law(bm, 0.0, 3000.0, 1.0)
    assert (law.mean, law.var) == (3000.0, 0.25)
    law = transition_law(ou, 0.4, 3001.0, 0.4)
    assert (law.mean, law.var) == (3001.0, 0.0)
    law = transition_law(ou, 0.0, 3000.0, 1.0)
    assert law.var == pytest.approx(0.25 * (1 - math.exp(-0.2)) / 0.2, rel=1e-14)


def test_ou_variance_by_monte_carlo(ou):
    rng = np.random.default_rng(7)
    x = simulate_terminal(ou, 3000.0, 1.0, 200, rng, 100_000)
    law = transition_law(ou, 0.0, 3000.0, 1.0)
    n = x.size
    var = x.var(ddof=1)
    # standard error of the sample variance of a Gaussian
    se_var = law.var * math.sqrt(2 / (n - 1))
    assert abs(var - law.var) <= 3 * se_var + 2e-4  # Euler bias at dt=5e-3 is ~1e-4
    assert abs(x.mean() - law.mean) <= 3 * math.sqrt(law.var / n)


def test_step_examples(ou, bm):
    assert step(bm, 3000.0, 0.001, 0.0) == 3000.0
    assert step(ou, 3009.0, 0.001, 0.0) == 3009.0
    assert step(ou, 3000.0, 0.001, 0.0) == pytest.approx(3000.0009, abs=1e-10)
    with pytest.raises(DomainError):
        step(ou, 3000.0, 0.0, 0.0)


def test_step_mean_matches_law(ou):
    rng = np.random.default_rng(11)
    x = simulate_terminal(ou, 3000.0, 0.5, 500, rng, 100_000)
    law = transition_law(ou, 0.0, 3000.0, 0.5)
    assert abs(x.mean() - law.mean) <= 3 * math.sqrt(law.var / x.size)


def test_model_validation():
    with pytest.raises(DomainError):
        PriceModel.martingale(0.0)
    with pytest.raises(DomainError):
        PriceModel.ou(0.5, 0.0, 3000.0)


@given(st.floats(0.01, 5.0), st.floats(2900, 3100), st.floats(0.0, 1.0))
def test_bet_vanishes_at_horizon(a, s, t):
    model = PriceModel.ou(0.5, a, 3009.0)
    assert directional_bet(model, t, s, t) == 0.0


@given(st.floats(0.01, 2.0), st.floats(2900, 3100), st.floats(0.0, 0.9), st.floats(0.01, 0.1))
def test_bet_sign_and_monotone_in_horizon(a, s, t, extra):
    model = PriceModel.ou(0.5, a, 3009.0)
    near = directional_bet(model, t, s, 1.0)
    far = directional_bet(model, t - extra, s, 1.0) if t >= extra else directional_bet(model, t, s, 1.0 + extra)
    assert math.copysign(1, near) == math.copysign(1, 3009.0 - s) or near == 0
    assert abs(far) >= abs(near)
