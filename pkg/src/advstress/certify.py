"""Certification rules: when should the consumer certify the declared model?

Three rules are supported.

* ``payback_cap``: certify when the lifetime reaches the last grid point at
  which the risk-adjusted payoff is still at or above a cap ``C``.  The cap
  only has to be finite: once the price is subtracted the adjusted payoff
  can sit well below -1, and a cap above it would never bind.
* ``quantile_match``: match quantiles of the declared survival ``F`` and the
  consumer's own survival ``G``.  ``as_written`` picks the smallest ``y~`` with
  ``G(y~) <= F(y*)`` (this lands at or below ``y*``); ``strict`` picks the
  smallest ``y~ >= y*`` with ``F(y~) <= G(y*)``, which respects ``y~ >= y*``.
* ``repeated_trials``: run ``n`` tests and certify when at least ``k`` reach a
  fixed threshold; the certitude is the binomial tail under ``G``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .distributions import LifetimeModel, SupportGrid, dominates, survival_at
from .errors import (
    ArityError,
    DomainError,
    ParameterError,
    PreconditionError,
    ShapeError,
    UnachievableError,
)

__all__ = [
    "PaybackCap",
    "QuantileMatch",
    "RepeatedTrials",
    "CertificationContext",
    "Decision",
    "Threshold",
    "threshold_from_cap",
    "threshold_from_quantile",
    "certitude",
    "design_trials",
    "certify",
]

AS_WRITTEN = "as_written"
STRICT = "strict"
MAX_TRIALS = 64
_TOL = 1e-12


@dataclass(frozen=True)
class PaybackCap:
    cap: float
    kind: str = field(default="payback_cap", init=False)

    def __post_init__(self):
        _check_cap(self.cap)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "cap": self.cap}


@dataclass(frozen=True)
class QuantileMatch:
    belief: LifetimeModel
    convention: str = STRICT
    kind: str = field(default="quantile_match", init=False)

    def __post_init__(self):
        if self.convention not in (AS_WRITTEN, STRICT):
            raise ParameterError(f"unknown convention {self.convention!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "convention": self.convention}


@dataclass(frozen=True)
class RepeatedTrials:
    n: int
    k: int
    belief: LifetimeModel
    y_tilde: float
    kind: str = field(default="repeated_trials", init=False)

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ParameterError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.n > MAX_TRIALS:
            raise ParameterError(f"at most {MAX_TRIALS} trials are supported")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "k": self.k, "y_tilde": self.y_tilde}


@dataclass(frozen=True)
class CertificationContext:
    """What a rule may need besides the policy itself."""

    declared: Optional[LifetimeModel] = None
    adjusted: Optional[np.ndarray] = None
    grid: Optional[SupportGrid] = None
    y_star: Optional[float] = None


@dataclass(frozen=True)
class Decision:
    certified: bool
    y_tilde: float
    certitude: Optional[float] = None
    rationale: str = ""

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "y_tilde": self.y_tilde if math.isfinite(self.y_tilde) else None,
            "certitude": self.certitude,
            "rationale": self.rationale,
        }


def _check_cap(cap: float) -> None:
    if not math.isfinite(cap):
        raise ParameterError(f"payback cap must be finite, got {cap}")


class Threshold(NamedTuple):
    y_tilde: float
    cap_unreachable: bool = False


def threshold_from_cap(adjusted, grid: SupportGrid, cap: float, y_star: float) -> Threshold:
    """Largest grid point ``y >= y_star`` whose adjusted payoff is still ``>= cap``.

    If the payoff is already below the cap at ``y_star`` the threshold falls
    back to ``y_star`` and ``cap_unreachable`` is set.
    """
    _check_cap(cap)
    adjusted = np.asarray(adjusted, dtype=float)
    points = grid.points
    if adjusted.shape != points.shape:
        raise ParameterError("adjusted payoff must have one value per grid point")
    upper = points >= y_star - _TOL * max(1.0, abs(y_star))
    if not upper.any():
        raise DomainError(f"no grid point at or above the mission time {y_star}")
    tail = adjusted[upper]
    if np.any(np.diff(tail) > _TOL):
        raise ShapeError("adjusted payoff must be nonincreasing from the mission time on")
    tail_points = points[upper]
    meets = np.flatnonzero(tail >= cap - _TOL)
    if meets.size == 0:
        return Threshold(float(tail_points[0]), True)
    return Threshold(float(tail_points[meets[-1]]), False)


def threshold_from_quantile(
    declared: LifetimeModel, belief: LifetimeModel, y_star: float, convention: str = STRICT
) -> float:
    """Quantile-matched threshold; ``inf`` when no grid point qualifies."""
    if not dominates(declared, belief):
        raise PreconditionError("declared survival must dominate the belief; stress testing is moot otherwise")
    points = declared.grid.points
    if convention == AS_WRITTEN:
        target = survival_at(declared, y_star)
        hits = np.flatnonzero(belief.survival <= target + _TOL)
    elif convention == STRICT:
        target = survival_at(belief, y_star)
        hits = np.flatnonzero((declared.survival <= target + _TOL) & (points >= y_star - _TOL))
    else:
        raise ParameterError(f"unknown convention {convention!r}")
    return float(points[hits[0]]) if hits.size else math.inf


def _exact(p: float) -> Fraction:
    # shortest decimal repr, so 0.9 means 9/10
    return Fraction(repr(float(p)))


def certitude(n: int, k: int, p: float) -> float:
    """Probability of at least ``k`` successes in ``n`` trials of probability ``p``.

    Evaluated in exact rational arithmetic and rounded once, so for example
    ``certitude(3, 2, 0.9) == 0.972``.
    """
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n > MAX_TRIALS:
        raise ParameterError(f"at most {MAX_TRIALS} trials are supported")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p}")
    q = _exact(p)
    total = sum(math.comb(n, j) * q**j * (1 - q) ** (n - j) for j in range(k, n + 1))
    return float(total)


def design_trials(p: float, gamma: float, k: int) -> int:
    """Smallest ``n >= k`` with ``certitude(n, k, p) >= gamma``."""
    if not 0.0 < gamma < 1.0:
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")
    if k < 1:
        raise ParameterError("k must be at least 1")
    if not 0.0 < p <= 1.0:
        raise UnachievableError(f"certitude cannot reach {gamma} with p={p}")
    for n in range(k, MAX_TRIALS + 1):
        if certitude(n, k, p) >= gamma:
            return n
    raise UnachievableError(f"certitude {gamma} needs more than {MAX_TRIALS} trials")


def certify(policy, observations: Sequence[float], context: CertificationContext) -> Decision:
    """Apply ``policy`` to observed lifetimes."""
    obs = [float(y) for y in observations]
    if not obs:
        raise ArityError("at least one observation is required")
    if any(y < 0 for y in obs):
        raise DomainError("observed lifetimes must be nonnegative")

    if isinstance(policy, RepeatedTrials):
        if len(obs) != policy.n:
            raise ArityError(f"repeated trials expect {policy.n} observations, got {len(obs)}")
        passed = sum(y >= policy.y_tilde for y in obs)
        p = survival_at(policy.belief, policy.y_tilde)
        level = certitude(policy.n, policy.k, p)
        return Decision(
            passed >= policy.k,
            float(policy.y_tilde),
            level,
            f"{passed} of {policy.n} tests reached {policy.y_tilde}; {policy.k} required",
        )

    if len(obs) != 1:
        raise ArityError(f"{policy.kind} decides on a single observation, got {len(obs)}")
    y = obs[0]
    if isinstance(policy, PaybackCap):
        if context.adjusted is None or context.grid is None or context.y_star is None:
            raise PreconditionError("payback cap needs the adjusted payoff, grid and mission time")
        y_tilde, unreachable = threshold_from_cap(context.adjusted, context.grid, policy.cap, context.y_star)
        note = " (cap already exceeded at the mission time)" if unreachable else ""
        rationale = f"payback capped at {policy.cap}: threshold {y_tilde}{note}"
    elif isinstance(policy, QuantileMatch):
        if context.declared is None or context.y_star is None:
            raise PreconditionError("quantile matching needs the declared model and mission time")
        y_tilde = threshold_from_quantile(context.declared, policy.belief, context.y_star, policy.convention)
        rationale = f"quantile match ({policy.convention}): threshold {y_tilde}"
    else:
        raise ParameterError(f"unknown policy {policy!r}")
    certified = y >= y_tilde
    verdict = "reaches" if certified else "falls short of"
    return Decision(certified, float(y_tilde), None, f"{rationale}; observation {y} {verdict} it")
