"""Adversarial stress functions and the quantities derived from them.

A stress function ``A`` is tabulated on the same grid as the declared model
``f``.  Its game price is ``E_f[A]``; dividing by the price gives the betting
score, which for a normalized ``A`` equals the likelihood ratio ``q / f`` of
the tilted pmf ``q = A * f``.  Logarithms are base 2 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import expit

from .distributions import NORMALIZATION_TOL, LifetimeModel, SupportGrid
from .errors import (
    DegeneracyError,
    IncompatibleError,
    ParameterError,
    PreconditionError,
    SupportError,
)
from .payoff import PayoffFunction

__all__ = [
    "EPSILON",
    "StressFunction",
    "TiltedModel",
    "step_stress",
    "logistic_stress",
    "tabulated_stress",
    "game_price",
    "normalize",
    "betting_score",
    "betting_scores",
    "tilt",
    "adversarial_payoff",
    "risk_adjusted_payoff",
    "kl_discrimination",
    "expected_log_utility",
]

# Positivity floor for stress values; log2(0) would make expected utility -inf.
EPSILON = 1e-9
_BOUND_RTOL = 1e-12
UNIFORM = "uniform"
SHIELDED = "shielded"


@dataclass(frozen=True, eq=False)
class StressFunction:
    """Stress values on ``grid`` with upper bound ``bound``.

    ``form`` records how the values were built (``kind`` plus parameters) and is
    carried along for reporting only.
    """

    grid: SupportGrid
    values: np.ndarray
    bound: float
    mission_time: Optional[float] = None
    form: dict = field(default_factory=lambda: {"kind": "tabulated"})

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (len(self.grid),):
            raise ParameterError(f"{vals.size} stress values for a grid of {len(self.grid)} points")
        if not self.bound >= 1.0:
            raise ParameterError(f"bound must be at least 1, got {self.bound}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("stress values must be finite")
        if np.any(vals < EPSILON * (1 - _BOUND_RTOL)):
            raise ParameterError(f"stress values must be at least {EPSILON}")
        if np.any(vals > self.bound * (1 + _BOUND_RTOL)):
            raise ParameterError(f"stress values exceed the bound {self.bound}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "bound", float(self.bound))

    @property
    def adversarial_shape(self) -> bool:
        """Whether ``A > 1`` strictly below the mission time and ``A <= 1`` from it on."""
        if self.mission_time is None:
            return False
        below = self.grid.points < self.mission_time
        return bool(np.all(self.values[below] > 1.0) and np.all(self.values[~below] <= 1.0))

    def __call__(self, y: float) -> float:
        return float(self.values[self.grid.index_of(y)])

    def __eq__(self, other) -> bool:
        # ``form`` is descriptive only and does not take part in equality
        if not isinstance(other, StressFunction):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.values, other.values)
            and self.bound == other.bound
            and self.mission_time == other.mission_time
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "kind": "tabulated",
            "values": [float(v) for v in self.values],
            "B": self.bound,
            "y_star": self.mission_time,
        }


def _step_values(points: np.ndarray, y_star: float, a_hi: float, a_lo: float) -> np.ndarray:
    return np.where(points < y_star, a_hi, a_lo).astype(float)


def _logistic_values(points: np.ndarray, y_star: float, a_hi: float, a_lo: float, kappa: float) -> np.ndarray:
    return a_lo + (a_hi - a_lo) * expit(-kappa * (points - y_star))


def _check_shape(stress: StressFunction, require_adversarial: bool) -> StressFunction:
    if require_adversarial and not stress.adversarial_shape:
        raise ParameterError("stress function is not adversarial (A > 1 below y*, A <= 1 above)")
    return stress


def step_stress(
    grid: SupportGrid, y_star: float, a_hi: float, a_lo: float, bound: float, require_adversarial: bool = False
) -> StressFunction:
    """``a_hi`` below ``y_star``, ``a_lo`` from ``y_star`` on."""
    stress = StressFunction(
        grid,
        _step_values(grid.points, y_star, a_hi, a_lo),
        bound,
        float(y_star),
        {"kind": "step", "a_hi": float(a_hi), "a_lo": float(a_lo)},
    )
    return _check_shape(stress, require_adversarial)


def logistic_stress(
    grid: SupportGrid,
    y_star: float,
    a_hi: float,
    a_lo: float,
    kappa: float,
    bound: float,
    require_adversarial: bool = False,
) -> StressFunction:
    """Smooth switch ``a_lo + (a_hi - a_lo) / (1 + exp(kappa * (y - y_star)))``."""
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    stress = StressFunction(
        grid,
        _logistic_values(grid.points, y_star, a_hi, a_lo, kappa),
        bound,
        float(y_star),
        {"kind": "logistic", "a_hi": float(a_hi), "a_lo": float(a_lo), "kappa": float(kappa)},
    )
    return _check_shape(stress, require_adversarial)


def tabulated_stress(
    grid: SupportGrid, values, bound: float, y_star: Optional[float] = None, require_adversarial: bool = False
) -> StressFunction:
    stress = StressFunction(grid, values, bound, None if y_star is None else float(y_star))
    return _check_shape(stress, require_adversarial)


def _require_same_grid(stress: StressFunction, model: LifetimeModel) -> None:
    if stress.grid != model.grid:
        raise IncompatibleError("stress function and model are defined on different grids")


def game_price(stress: StressFunction, model: LifetimeModel) -> float:
    """Price of the game, ``E_f[A(Y)]``."""
    _require_same_grid(stress, model)
    return math.fsum(stress.values * model.pmf)


def normalize(stress: StressFunction, model: LifetimeModel) -> StressFunction:
    """Rescale so the game price is 1; the bound is rescaled by the same factor."""
    price = game_price(stress, model)
    if not price > 0:
        raise DegeneracyError("game price must be positive to normalize")
    values = stress.values / price
    if np.any(values < EPSILON * (1 - _BOUND_RTOL)):
        raise DegeneracyError(f"normalizing by {price} pushes stress values below {EPSILON}")
    form = dict(stress.form)
    for key in ("a_hi", "a_lo"):
        if key in form:
            form[key] = form[key] / price
    # price <= bound exactly, but rounding can push bound / price a hair below 1
    bound = max(stress.bound / price, 1.0)
    return StressFunction(stress.grid, values, bound, stress.mission_time, form)


def betting_score(stress: StressFunction, model: LifetimeModel, y: float) -> float:
    """Factor ``A(y) / E_f[A]`` by which the consumer's stake is multiplied."""
    i = stress.grid.index_of(y)
    return float(stress.values[i] / game_price(stress, model))


def betting_scores(stress: StressFunction, model: LifetimeModel) -> np.ndarray:
    """Betting score at every grid point."""
    return stress.values / game_price(stress, model)


@dataclass(frozen=True, eq=False)
class TiltedModel:
    """The tilted pmf ``q = A * f`` of a normalized stress function."""

    base: LifetimeModel
    stress: StressFunction
    q: np.ndarray

    def as_model(self) -> LifetimeModel:
        return LifetimeModel(self.base.grid, self.q)


def tilt(stress: StressFunction, model: LifetimeModel) -> TiltedModel:
    price = game_price(stress, model)
    if abs(price - 1.0) > NORMALIZATION_TOL:
        raise PreconditionError(f"stress function has price {price}; normalize it first")
    q = stress.values * model.pmf
    q.setflags(write=False)
    return TiltedModel(model, stress, q)


def adversarial_payoff(stress: StressFunction, payoff: PayoffFunction) -> np.ndarray:
    """``A(y) * S(y)`` at every grid point."""
    if stress.mission_time is None or not math.isclose(
        stress.mission_time, payoff.mission_time, rel_tol=1e-12, abs_tol=1e-12
    ):
        raise IncompatibleError(
            f"stress mission time {stress.mission_time} differs from payoff mission time {payoff.mission_time}"
        )
    return stress.values * payoff(stress.grid.points)


def risk_adjusted_payoff(
    s_star,
    price: float,
    mode: str = SHIELDED,
    *,
    grid: Optional[SupportGrid] = None,
    y_star: Optional[float] = None,
) -> np.ndarray:
    """Subtract the game price from the adversarial payoff.

    ``uniform`` subtracts it everywhere.  ``shielded`` subtracts it only from
    ``y_star`` on, so the consumer does not pay for the test when the item
    fails early; it needs ``grid`` and ``y_star``.
    """
    if price < 0:
        raise ParameterError(f"price must be nonnegative, got {price}")
    s_star = np.asarray(s_star, dtype=float)
    if mode == UNIFORM:
        return s_star - price
    if mode == SHIELDED:
        if grid is None or y_star is None:
            raise ParameterError("shielded adjustment needs the grid and mission time")
        points = grid.points if isinstance(grid, SupportGrid) else np.asarray(grid, dtype=float)
        return np.where(points < y_star, s_star, s_star - price)
    raise ParameterError(f"unknown adjustment mode {mode!r}")


PmfLike = Union[TiltedModel, LifetimeModel, np.ndarray]


def _as_pmf(obj, name: str) -> np.ndarray:
    if isinstance(obj, TiltedModel):
        arr = np.asarray(obj.q, dtype=float)
    elif isinstance(obj, LifetimeModel):
        arr = obj.pmf
    else:
        arr = np.asarray(obj, dtype=float)
    if arr.ndim != 1 or np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ParameterError(f"{name} must be a nonnegative vector")
    if abs(math.fsum(arr) - 1.0) > NORMALIZATION_TOL:
        raise ParameterError(f"{name} does not sum to 1")
    return arr


def kl_discrimination(q: PmfLike, f: PmfLike) -> float:
    """Kullback-Leibler discrimination ``sum q log2(q / f)`` in bits.

    Terms with ``q = 0`` contribute nothing.  Rounding can leave a sum a few
    ulps below zero when ``q`` is essentially ``f``; the result is clipped at 0.
    """
    q_arr, f_arr = _as_pmf(q, "q"), _as_pmf(f, "f")
    if q_arr.shape != f_arr.shape:
        raise IncompatibleError("q and f have different lengths")
    live = q_arr > 0
    if np.any(f_arr[live] == 0):
        raise SupportError("q puts mass where f has none")
    terms = q_arr[live] * np.log2(q_arr[live] / f_arr[live])
    return max(math.fsum(terms), 0.0)


def expected_log_utility(stress: Union[StressFunction, np.ndarray], weights: PmfLike) -> float:
    """``sum w * log2 A``: expected log utility of the betting score under ``weights``."""
    values = stress.values if isinstance(stress, StressFunction) else np.asarray(stress, dtype=float)
    w = _as_pmf(weights, "weights")
    if values.shape != w.shape:
        raise IncompatibleError("stress values and weights have different lengths")
    if np.any(values < EPSILON * (1 - _BOUND_RTOL)):
        raise ParameterError(f"stress values must be at least {EPSILON}")
    return math.fsum(w * np.log2(values))
