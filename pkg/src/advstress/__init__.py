"""Adversarial stress testing of declared lifetime distributions.

A manufacturer declares a survival function; a consumer challenges it with a
two-sided bet whose payoff is reshaped by an adversarial stress function.
The package quotes the bet, designs the stress function that maximizes
Kullback-Leibler discrimination, simulates the game and applies
certification rules.
"""

from .certify import (
    Decision,
    PaybackCap,
    QuantileMatch,
    RepeatedTrials,
    certify,
    certitude,
    design_trials,
    threshold_from_cap,
    threshold_from_quantile,
)
from .design import DesignProblem, DesignSolution, oracle, solve_parametric, solve_vertex
from .distributions import LifetimeModel, SupportGrid, discretize, dominates, sample, survival_at
from .errors import StressTestError
from .game import GameOutcome, Scenario, SimulationReport, evidence_summary, play_once, simulate
from .payoff import BetQuote, PayoffFunction, evaluate, just_payoff, quote_bet, rotate, step_payoff
from .stress import (
    StressFunction,
    TiltedModel,
    adversarial_payoff,
    betting_score,
    expected_log_utility,
    game_price,
    kl_discrimination,
    logistic_stress,
    normalize,
    risk_adjusted_payoff,
    step_stress,
    tabulated_stress,
    tilt,
)

__version__ = "0.1.0"

__all__ = [
    "BetQuote",
    "Decision",
    "DesignProblem",
    "DesignSolution",
    "GameOutcome",
    "LifetimeModel",
    "PaybackCap",
    "PayoffFunction",
    "QuantileMatch",
    "RepeatedTrials",
    "Scenario",
    "SimulationReport",
    "StressFunction",
    "StressTestError",
    "SupportGrid",
    "TiltedModel",
    "adversarial_payoff",
    "betting_score",
    "certify",
    "certitude",
    "design_trials",
    "discretize",
    "dominates",
    "evaluate",
    "evidence_summary",
    "expected_log_utility",
    "game_price",
    "just_payoff",
    "kl_discrimination",
    "logistic_stress",
    "normalize",
    "oracle",
    "play_once",
    "quote_bet",
    "risk_adjusted_payoff",
    "rotate",
    "sample",
    "simulate",
    "solve_parametric",
    "solve_vertex",
    "step_payoff",
    "step_stress",
    "survival_at",
    "tabulated_stress",
    "threshold_from_cap",
    "threshold_from_quantile",
    "tilt",
]
