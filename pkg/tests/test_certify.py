import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advstress.certify import (
    CertificationContext,
    PaybackCap,
    QuantileMatch,
    RepeatedTrials,
    certify,
    certitude,
    design_trials,
    threshold_from_cap,
    threshold_from_quantile,
)
from advstress.distributions import LifetimeModel, SupportGrid, discretize
from advstress.errors import (
    ArityError,
    DomainError,
    ParameterError,
    PreconditionError,
    ShapeError,
    UnachievableError,
)
from advstress.payoff import just_payoff
from advstress.stress import adversarial_payoff, risk_adjusted_payoff, step_stress


def enumerate_certitude(n, k, p):
    """Sum the probability of every outcome sequence with at least k passes."""
    q = Fraction(repr(p))
    total = Fraction(0)
    for outcome in itertools.product((0, 1), repeat=n):
        passes = sum(outcome)
        if passes >= k:
            total += q**passes * (1 - q) ** (n - passes)
    return float(total)


def test_certitude_reference():
    assert certitude(3, 2, 0.9) == 0.972
    assert certitude(3, 2, 0.9) == 3 * 0.81 * 0.1 + 0.729
    assert certitude(1, 1, 0.37) == 0.37
    assert certitude(7, 3, 1.0) == 1.0


@pytest.mark.parametrize("n", range(1, 13))
def test_certitude_matches_enumeration(n):
    for k in range(1, n + 1):
        for p in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
            assert certitude(n, k, p) == enumerate_certitude(n, k, p)


@pytest.mark.parametrize("n, k, p", [(2, 3, 0.5), (0, 0, 0.5), (65, 1, 0.5), (3, 1, 1.5)])
def test_certitude_rejects(n, k, p):
    with pytest.raises(ParameterError):
        certitude(n, k, p)


def test_certitude_monotone_lattice():
    ps = [i / 20 for i in range(21)]
    for n in range(1, 16):
        for k in range(1, n + 1):
            row = [certitude(n, k, p) for p in ps]
            assert all(b >= a for a, b in zip(row, row[1:]))
            if k < n:
                for p in ps:
                    assert certitude(n, k + 1, p) <= certitude(n, k, p)
            for p in ps:
                assert certitude(n + 1, k, p) >= certitude(n, k, p)


def test_design_trials():
    assert design_trials(0.9, 0.9, 1) == 1
    # incrementing n with the enumeration oracle: n=2 gives 0.81, n=3 gives 0.972
    n = 2
    while enumerate_certitude(n, 2, 0.9) < 0.95:
        n += 1
    assert design_trials(0.9, 0.95, 2) == n == 3
    assert design_trials(0.8, 0.5, 1) == 1
    with pytest.raises(UnachievableError):
        design_trials(0.0, 0.9, 1)
    with pytest.raises(UnachievableError):
        design_trials(0.01, 0.999999, 30)


def worked_cap_instance(step=0.01):
    grid = SupportGrid.uniform(0, 30, step)
    y_star = 10.0
    payoff = just_payoff(0.5, y_star, 0.5, 0.1)
    stress = step_stress(grid, y_star, 2.0, 0.5, 2.0)
    # price taken as 1 so adjusted = -0.5 h - 1 from y* on
    adjusted = risk_adjusted_payoff(adversarial_payoff(stress, payoff), 1.0, "shielded", grid=grid, y_star=y_star)
    return grid, y_star, adjusted


def test_cap_worked_instance():
    grid, y_star, adjusted = worked_cap_instance()
    y_tilde, unreachable = threshold_from_cap(adjusted, grid, -1.3, y_star)
    exact = y_star + 10 * math.log(1 / 0.8)
    assert not unreachable
    assert exact - 0.01 <= y_tilde <= exact + 1e-12
    assert y_tilde - y_star == pytest.approx(2.2314, abs=0.01)


def test_cap_boundaries():
    grid, y_star, adjusted = worked_cap_instance(step=0.5)
    at_start = adjusted[grid.index_of(y_star)]
    assert threshold_from_cap(adjusted, grid, at_start, y_star).y_tilde == y_star
    assert threshold_from_cap(adjusted, grid, -0.2, y_star) == (y_star, True)
    flat = np.where(grid.points < y_star, 0.3, -0.5)
    assert threshold_from_cap(flat, grid, -0.9, y_star).y_tilde == grid.points[-1]


def test_cap_errors():
    grid, y_star, adjusted = worked_cap_instance(step=0.5)
    with pytest.raises(ParameterError):
        threshold_from_cap(adjusted, grid, math.nan, y_star)
    rising = np.linspace(-1, 0, len(grid))
    with pytest.raises(ShapeError):
        threshold_from_cap(rising, grid, -0.5, y_star)
    with pytest.raises(DomainError):
        threshold_from_cap(adjusted, grid, -0.5, 31.0)


def exponential_pair(step=0.01):
    grid = SupportGrid.uniform(0, 60, step)
    return discretize("exponential", grid, rate=0.1), discretize("exponential", grid, rate=0.2)


def test_quantile_exponential_instance():
    declared, belief = exponential_pair()
    # closed forms: exp(-0.2 y) = exp(-1) and exp(-0.1 y) = exp(-2)
    assert threshold_from_quantile(declared, belief, 10, "as_written") == pytest.approx(5, abs=0.01)
    assert threshold_from_quantile(declared, belief, 10, "strict") == pytest.approx(20, abs=0.01)


def test_quantile_coincident_models():
    declared, _ = exponential_pair(step=0.5)
    for convention in ("as_written", "strict"):
        assert threshold_from_quantile(declared, declared, 10, convention) == 10


def test_quantile_dominance_required():
    declared, belief = exponential_pair(step=0.5)
    with pytest.raises(PreconditionError):
        threshold_from_quantile(belief, declared, 10)
    with pytest.raises(ParameterError):
        threshold_from_quantile(declared, belief, 10, "loose")


def test_quantile_never_certifiable():
    grid = SupportGrid([0.0, 1.0, 2.0])
    declared = LifetimeModel(grid, [0.0, 0.0, 1.0])
    belief = LifetimeModel(grid, [1.0, 0.0, 0.0])
    assert threshold_from_quantile(declared, belief, 1.0, "strict") == math.inf


def _model_from_survival(grid, surv):
    return LifetimeModel(grid, surv - np.append(surv[1:], 0.0))


@given(st.integers(0, 2**32 - 1), st.integers(3, 15))
def test_strict_threshold_never_below_mission_time(seed, m):
    rng = np.random.default_rng(seed)
    grid = SupportGrid(np.arange(float(m)))
    a, b = (np.cumsum(rng.dirichlet(np.ones(m))[::-1])[::-1] for _ in range(2))
    declared = _model_from_survival(grid, np.maximum(a, b))
    belief = _model_from_survival(grid, np.minimum(a, b))
    y_star = float(rng.integers(0, m))
    assert threshold_from_quantile(declared, belief, y_star, "strict") >= y_star
    assert threshold_from_quantile(declared, belief, y_star, "as_written") <= y_star


def test_certify_payback_cap():
    grid, y_star, adjusted = worked_cap_instance(step=0.5)
    context = CertificationContext(adjusted=adjusted, grid=grid, y_star=y_star)
    policy = PaybackCap(-0.2)
    assert not certify(policy, [y_star - 1], context).certified
    assert certify(policy, [y_star], context).certified
    with pytest.raises(ArityError):
        certify(policy, [11.0, 12.0], context)
    with pytest.raises(ArityError):
        certify(policy, [], context)
    with pytest.raises(ParameterError):
        PaybackCap(-math.inf)


def test_certify_repeated_trials(three_point):
    policy = RepeatedTrials(3, 2, three_point, 2.0)
    decision = certify(policy, [2.0, 3.0, 1.0], CertificationContext())
    assert decision.certified
    assert decision.certitude == certitude(3, 2, 0.8)
    assert not certify(policy, [1.0, 3.0, 1.0], CertificationContext()).certified
    with pytest.raises(ArityError):
        certify(policy, [2.0, 3.0], CertificationContext())
    with pytest.raises(ParameterError):
        RepeatedTrials(2, 3, three_point, 2.0)


def test_certify_quantile_match():
    declared, belief = exponential_pair(step=0.5)
    context = CertificationContext(declared=declared, y_star=10.0)
    decision = certify(QuantileMatch(belief), [21.0], context)
    assert decision.certified and decision.y_tilde == pytest.approx(20.0)
    assert not certify(QuantileMatch(belief), [19.0], context).certified


@given(st.lists(st.floats(0, 30), min_size=3, max_size=3), st.integers(0, 2), st.floats(0, 5))
def test_certify_monotone_in_observations(obs, which, bump):
    model = LifetimeModel(SupportGrid([0.0, 10.0, 20.0]), [0.2, 0.3, 0.5])
    policy = RepeatedTrials(3, 2, model, 10.0)
    before = certify(policy, obs, CertificationContext()).certified
    raised = list(obs)
    raised[which] += bump
    after = certify(policy, raised, CertificationContext()).certified
    assert after or not before
