"""Two-sided bet quotes and the payoff curves built on them.

The consumer's step payoff pays ``+p`` when the item fails before the mission
time and ``-1`` once it reaches it.  The "just" variant replaces the flat
``-1`` with ``-h(y)``, where ``h(y) = 1 - (1 - c) * exp(-r * (y - y_star))``
starts at ``c`` and rises concavely toward 1.  The manufacturer's payoff is
the pointwise negation of the consumer's.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .distributions import LifetimeModel, survival_at
from .errors import DegenerateBetError, DomainError, ParameterError

__all__ = [
    "BetQuote",
    "PayoffFunction",
    "quote_bet",
    "step_payoff",
    "just_payoff",
    "rotate",
    "evaluate",
]

CONSUMER = "consumer"
MANUFACTURER = "manufacturer"
_DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class BetQuote:
    p: float
    stake_for: float
    stake_against: float
    mission_time: float

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "stake_for": self.stake_for,
            "stake_against": self.stake_against,
            "mission_time": self.mission_time,
        }


@dataclass(frozen=True)
class PayoffFunction:
    """Piecewise payoff around ``mission_time``.

    ``kind`` is ``"step"`` or ``"just"``; ``start`` and ``rate`` are only used by
    the just form.  Calling the object evaluates it.
    """

    mission_time: float
    below_level: float
    kind: str = "step"
    start: float = 0.0
    rate: float = 0.0
    side: str = CONSUMER

    def __call__(self, y):
        return evaluate(self, y)

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "p": self.below_level, "y_star": self.mission_time}
        if self.kind == "just":
            doc.update(c=self.start, r=self.rate)
        return doc


def quote_bet(model: LifetimeModel, y_star: float) -> BetQuote:
    """De Finetti quote at ``y_star``: stake ``p = P(Y >= y_star)`` for, ``1 - p`` against."""
    pts = model.grid.points
    if not pts[0] <= y_star <= pts[-1]:
        raise DomainError(f"mission time {y_star} outside grid [{pts[0]}, {pts[-1]}]")
    p = survival_at(model, y_star)
    if p <= _DEGENERACY_TOL or p >= 1.0 - _DEGENERACY_TOL:
        raise DegenerateBetError(f"survival at {y_star} is {p}; no two-sided bet exists")
    return BetQuote(p=p, stake_for=p, stake_against=1.0 - p, mission_time=float(y_star))


def _check_level(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p must lie in (0, 1), got {p}")


def step_payoff(p: float, y_star: float) -> PayoffFunction:
    """Consumer step payoff: ``+p`` below ``y_star``, ``-1`` from ``y_star`` on."""
    _check_level(p)
    if y_star < 0:
        raise ParameterError("mission time must be nonnegative")
    return PayoffFunction(mission_time=float(y_star), below_level=float(p), kind="step")


def just_payoff(p: float, y_star: float, c: float, r: float) -> PayoffFunction:
    """Consumer payoff with a concave penalty ``-h(y)`` from ``y_star`` on."""
    _check_level(p)
    if not 0.0 <= c < 1.0:
        raise ParameterError(f"c must lie in [0, 1), got {c}")
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    if y_star < 0:
        raise ParameterError("mission time must be nonnegative")
    return PayoffFunction(
        mission_time=float(y_star), below_level=float(p), kind="just", start=float(c), rate=float(r)
    )


def rotate(payoff: PayoffFunction) -> PayoffFunction:
    """Hand the payoff to the other player (pointwise negation)."""
    side = MANUFACTURER if payoff.side == CONSUMER else CONSUMER
    return replace(payoff, side=side)


def evaluate(payoff: PayoffFunction, y):
    """Payoff at ``y`` (scalar or array); ``y == y_star`` takes the upper branch."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise DomainError("lifetime must be nonnegative")
    excess = y_arr - payoff.mission_time
    if payoff.kind == "step":
        upper = np.ones_like(y_arr)
    elif payoff.kind == "just":
        upper = 1.0 - (1.0 - payoff.start) * np.exp(-payoff.rate * np.maximum(excess, 0.0))
    else:
        raise ParameterError(f"unknown payoff kind {payoff.kind!r}")
    value = np.where(excess < 0, payoff.below_level, -upper)
    if payoff.side == MANUFACTURER:
        value = -value
    return float(value) if value.ndim == 0 else value
