import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advstress.distributions import LifetimeModel, SupportGrid, discretize
from advstress.errors import DegenerateBetError, DomainError, ParameterError
from advstress.payoff import evaluate, just_payoff, quote_bet, rotate, step_payoff


def test_quote_exponential():
    model = discretize("exponential", SupportGrid.uniform(0, 100, 1), rate=0.1)
    quote = quote_bet(model, 10)
    assert quote.p == pytest.approx(math.exp(-1), abs=1e-12)
    assert quote.stake_against == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert quote.stake_for + quote.stake_against == 1.0


def test_quote_lookup_and_degenerate(three_point):
    assert quote_bet(three_point, 2).p == 0.8
    with pytest.raises(DegenerateBetError):
        quote_bet(three_point, 1)


def test_quote_outside_grid(three_point):
    with pytest.raises(DomainError):
        quote_bet(three_point, 4)


@pytest.mark.parametrize("y, expected", [(5, 0.8), (9.999, 0.8), (10, -1.0), (50, -1.0)])
def test_step_values(y, expected):
    assert step_payoff(0.8, 10)(y) == expected


def test_step_two_point():
    np.testing.assert_array_equal(step_payoff(0.5, 2)(np.array([1.0, 2.0])), [0.5, -1.0])


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_step_rejects_p(p):
    with pytest.raises(ParameterError):
        step_payoff(p, 10)


@pytest.mark.parametrize("c, r", [(1.0, 0.1), (-0.1, 0.1), (0.5, 0.0)])
def test_just_rejects_parameters(c, r):
    with pytest.raises(ParameterError):
        just_payoff(0.5, 10, c, r)


def test_just_values():
    s = just_payoff(0.5, 10, 0.5, 0.1)
    assert s(10) == -0.5
    assert s(5) == 0.5
    assert s(20) == pytest.approx(-(1 - 0.5 * math.exp(-1)), abs=1e-12)
    assert s(1e4) == pytest.approx(-1.0, abs=1e-12)
    assert s(200) > -1.0


def test_rotation_examples():
    assert rotate(step_payoff(0.8, 10))(5) == -0.8
    assert rotate(just_payoff(0.5, 10, 0.5, 0.1))(10) == 0.5


def test_negative_lifetime():
    with pytest.raises(DomainError):
        evaluate(step_payoff(0.5, 1), -1)


levels = st.floats(0.01, 0.99)
ys = st.lists(st.floats(0, 100), min_size=1, max_size=30)


@given(levels, st.floats(0.0, 0.99), st.floats(0.01, 2.0), ys)
def test_rotation_is_involution_and_zero_sum(p, c, r, y):
    for s in (step_payoff(p, 10), just_payoff(p, 10, c, r)):
        y_arr = np.array(y)
        assert rotate(rotate(s)) == s
        np.testing.assert_array_equal(rotate(rotate(s))(y_arr), s(y_arr))
        np.testing.assert_array_equal(s(y_arr) + rotate(s)(y_arr), 0.0)


@given(levels, st.floats(0.0, 0.99), st.floats(0.01, 2.0))
def test_just_is_concave_and_bounded(p, c, r):
    s = just_payoff(p, 10, c, r)
    y = np.linspace(10, 60, 201)
    values = s(y)
    assert np.all(np.diff(-values, 2) <= 1e-12)
    assert np.all(np.diff(-values) >= -1e-15)
    below = s(np.linspace(0, 9.9, 50))
    assert np.all(below == p)
    # h < 1 holds wherever the gap 1 - h is representable next to 1
    gap = (1 - c) * np.exp(-r * (y - 10))
    assert np.all(values[gap > 1e-15] > -1)
    assert np.all(values >= -1) and np.all(values <= p)


def test_step_values_set():
    y = np.linspace(0, 30, 61)
    assert set(step_payoff(0.3, 10)(y).tolist()) == {0.3, -1.0}


def test_fair_quote_expectation(three_point):
    # stake p for +1 read off the figures: +p below y*, -1 at or above
    quote = quote_bet(three_point, 3)
    s = step_payoff(quote.p, quote.mission_time)
    expectation = math.fsum(three_point.pmf * s(three_point.grid.points))
    assert expectation == pytest.approx(-quote.p**2, abs=1e-12)


def test_model_on_grid_for_payoffs():
    model = LifetimeModel(SupportGrid([0.0, 1.0]), [0.25, 0.75])
    assert quote_bet(model, 1).p == 0.75
