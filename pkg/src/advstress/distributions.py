"""Lifetime distributions on a finite support grid.

A :class:`LifetimeModel` places probability mass on the points of a
:class:`SupportGrid`.  Survival is ``P(Y >= y)``, so at grid point ``y_i`` it is
the sum of the masses at ``y_i`` and above.  Continuous families are
discretized by differencing their survival function over the grid, with the
mass below the first point folded into the first point and the mass beyond the
last point folded into the last point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GridError, IncompatibleError, ParameterError

__all__ = [
    "NORMALIZATION_TOL",
    "SupportGrid",
    "LifetimeModel",
    "discretize",
    "survival_at",
    "dominates",
    "sample",
]

NORMALIZATION_TOL = 1e-9
DOMINANCE_TOL = 1e-12
# Relative slack used when matching a lifetime to a grid point.
_GRID_MATCH_TOL = 1e-12


def _frozen(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SupportGrid:
    """Strictly increasing, nonnegative lifetime values (at least two)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise GridError("a support grid needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise GridError("grid points must be finite")
        if pts[0] < 0:
            raise GridError("grid points must be nonnegative")
        if np.any(np.diff(pts) <= 0):
            raise GridError("grid points must be strictly increasing")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def uniform(cls, start: float, stop: float, step: float) -> "SupportGrid":
        """Evenly spaced grid ``start, start+step, ..., stop`` (endpoints included)."""
        if step <= 0:
            raise GridError("grid step must be positive")
        count = int(round((stop - start) / step)) + 1
        if count < 2 or not math.isclose(start + (count - 1) * step, stop, rel_tol=1e-9, abs_tol=1e-12):
            raise GridError(f"({start}, {stop}) is not a whole number of steps of {step}")
        return cls(np.linspace(start, stop, count))

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, SupportGrid):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def index_of(self, y: float) -> int:
        """Index of the grid point equal to ``y``; raises :class:`DomainError` off grid."""
        i = int(np.searchsorted(self.points, y - _GRID_MATCH_TOL * max(1.0, abs(y))))
        if i < len(self) and abs(self.points[i] - y) <= _GRID_MATCH_TOL * max(1.0, abs(y)):
            return i
        raise DomainError(f"{y} is not a grid point")

    def to_list(self) -> list[float]:
        return [float(v) for v in self.points]


def _check_pmf(pmf: np.ndarray, size: int) -> None:
    if pmf.shape != (size,):
        raise ParameterError(f"pmf has {pmf.size} entries for a grid of {size} points")
    if not np.all(np.isfinite(pmf)) or np.any(pmf < 0):
        raise ParameterError("pmf entries must be finite and nonnegative")
    total = math.fsum(pmf)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ParameterError(f"pmf sums to {total!r}, not 1")


@dataclass(frozen=True, eq=False)
class LifetimeModel:
    """Probability mass ``pmf[i]`` at ``grid.points[i]``.

    The survival array is derived, ``survival[i] = sum(pmf[i:])``.
    """

    grid: SupportGrid
    pmf: np.ndarray

    def __post_init__(self):
        if not isinstance(self.grid, SupportGrid):
            object.__setattr__(self, "grid", SupportGrid(self.grid))
        pmf = np.asarray(self.pmf, dtype=float)
        _check_pmf(pmf, len(self.grid))
        object.__setattr__(self, "pmf", _frozen(pmf))

    @cached_property
    def survival(self) -> np.ndarray:
        surv = np.cumsum(self.pmf[::-1])[::-1]
        surv.setflags(write=False)
        return surv

    @property
    def points(self) -> np.ndarray:
        return self.grid.points

    def __eq__(self, other) -> bool:
        if not isinstance(other, LifetimeModel):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.pmf, other.pmf)

    def __hash__(self) -> int:
        return hash((self.grid, self.pmf.tobytes()))

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_list(), "pmf": [float(v) for v in self.pmf]}

    @classmethod
    def from_dict(cls, doc: dict) -> "LifetimeModel":
        unknown = set(doc) - {"grid", "pmf"}
        if unknown:
            raise ParameterError(f"unknown model keys: {sorted(unknown)}")
        return cls(SupportGrid(doc["grid"]), doc["pmf"])


def _continuous_survival(family: str, y: np.ndarray, params: dict) -> np.ndarray:
    if family == "exponential":
        rate = params.get("rate")
        if rate is None or not rate > 0:
            raise ParameterError("exponential family needs rate > 0")
        return np.exp(-rate * y)
    if family == "weibull":
        shape, scale = params.get("shape"), params.get("scale")
        if shape is None or scale is None or not (shape > 0 and scale > 0):
            raise ParameterError("weibull family needs shape > 0 and scale > 0")
        return np.exp(-((y / scale) ** shape))
    raise ParameterError(f"unknown lifetime family {family!r}")


_FAMILY_PARAMS = {"exponential": {"rate"}, "weibull": {"shape", "scale"}, "points": {"pmf"}}


def discretize(family: str, grid: SupportGrid | Sequence[float], **params) -> LifetimeModel:
    """Build a :class:`LifetimeModel` from a parametric family on ``grid``.

    Parameters
    ----------
    family : {"exponential", "weibull", "points"}
        ``exponential`` takes ``rate``; ``weibull`` takes ``shape`` and
        ``scale``; ``points`` takes an explicit ``pmf``.
    grid : SupportGrid or sequence of float

    Returns
    -------
    LifetimeModel
        For continuous families the mass at ``y_i`` is
        ``S(y_i) - S(y_{i+1})``, the last point carries the tail ``S(y_m)``
        and the first point also absorbs ``1 - S(y_1)``.  Survival at every
        grid point after the first therefore equals the continuous survival.
    """
    if not isinstance(grid, SupportGrid):
        grid = SupportGrid(grid)
    if family not in _FAMILY_PARAMS:
        raise ParameterError(f"unknown lifetime family {family!r}")
    extra = set(params) - _FAMILY_PARAMS[family]
    if extra:
        raise ParameterError(f"unexpected parameters for {family}: {sorted(extra)}")
    if family == "points":
        if "pmf" not in params:
            raise ParameterError("points family needs a pmf")
        return LifetimeModel(grid, params["pmf"])

    surv = _continuous_survival(family, grid.points, params)
    surv[0] = 1.0
    pmf = surv - np.append(surv[1:], 0.0)
    return LifetimeModel(grid, pmf)


def survival_at(model: LifetimeModel, y: float) -> float:
    """``P(Y >= y)``: survival at the smallest grid point ``>= y``, 0 past the grid."""
    if y < 0:
        raise DomainError(f"lifetime must be nonnegative, got {y}")
    pts = model.grid.points
    i = int(np.searchsorted(pts, y - _GRID_MATCH_TOL * max(1.0, abs(y))))
    if i >= pts.size:
        return 0.0
    return float(model.survival[i])


def _require_same_grid(a: LifetimeModel, b: LifetimeModel) -> None:
    if a.grid != b.grid:
        raise IncompatibleError("models are defined on different grids")


def dominates(optimist: LifetimeModel, pessimist: LifetimeModel) -> bool:
    """True when ``optimist`` survival is at least ``pessimist`` survival everywhere."""
    _require_same_grid(optimist, pessimist)
    return bool(np.all(optimist.survival >= pessimist.survival - DOMINANCE_TOL))


def draw(model: LifetimeModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """Inverse-cdf draws using an existing generator."""
    cdf = np.cumsum(model.pmf)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return model.grid.points[np.minimum(idx, cdf.size - 1)]


def sample(model: LifetimeModel, seed: int, n: int) -> np.ndarray:
    """``n`` i.i.d. lifetimes from ``model``; identical for identical ``(seed, n)``."""
    if n < 1:
        raise ParameterError("sample size must be at least 1")
    return draw(model, np.random.default_rng(seed), n)
