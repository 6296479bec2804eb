"""Choosing the stress function that maximizes KL discrimination.

The design problem is

    maximize    sum_i f_i * A_i * log2(A_i)
    subject to  sum_i f_i * A_i = 1,   lo_i <= A_i <= hi_i

with ``lo = EPSILON`` and ``hi = B`` when unconstrained.  The adversarial shape
asks for ``A > 1`` below the mission time and ``A <= 1`` from it on; the solvers
work on the closure, ``[1, B]`` below and ``[EPSILON, 1]`` above, and the
returned :class:`~advstress.stress.StressFunction` reports whether the strict
shape holds.

Three solvers are provided:

``solve_vertex``
    The objective is convex and the feasible set a polytope, so the maximum
    sits at a vertex, where every coordinate but at most one is at a bound.
    All such vertices are enumerated exactly.
``solve_parametric``
    Grid search over step or logistic stress families.
``oracle``
    Brute-force lattice search, independent of the vertex argument, used to
    check the other two.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .distributions import LifetimeModel
from .errors import (
    InfeasibleError,
    NoSolutionError,
    ParameterError,
    ProblemTooLargeError,
)
from .stress import (
    EPSILON,
    StressFunction,
    _logistic_values,
    _step_values,
    kl_discrimination,
    tilt,
)

__all__ = [
    "DesignProblem",
    "DesignSolution",
    "solve_vertex",
    "solve_parametric",
    "oracle",
    "MAX_VERTEX_SIZE",
    "MAX_ORACLE_SIZE",
]

UNCONSTRAINED = "unconstrained"
ADVERSARIAL = "adversarial"
MAX_VERTEX_SIZE = 20
MAX_ORACLE_SIZE = 6
_FEAS_TOL = 1e-12
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class DesignProblem:
    model: LifetimeModel
    bound: float
    shape: str = UNCONSTRAINED
    mission_time: Optional[float] = None
    epsilon: float = EPSILON

    def __post_init__(self):
        if not self.bound >= 1.0:
            raise InfeasibleError(f"bound B={self.bound} < 1 admits no normalized stress function")
        if self.shape not in (UNCONSTRAINED, ADVERSARIAL):
            raise ParameterError(f"unknown shape {self.shape!r}")
        if self.shape == ADVERSARIAL and self.mission_time is None:
            raise ParameterError("adversarial shape needs a mission time")
        if not 0 < self.epsilon <= 1:
            raise ParameterError("epsilon must lie in (0, 1]")

    def coordinate_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-grid-point lower and upper bounds on the stress value."""
        m = len(self.model.grid)
        lo = np.full(m, self.epsilon)
        hi = np.full(m, float(self.bound))
        if self.shape == ADVERSARIAL:
            below = self.model.grid.points < self.mission_time
            lo[below] = 1.0
            hi[~below] = 1.0
        return lo, hi

    def _below(self) -> np.ndarray:
        if self.shape != ADVERSARIAL:
            return np.zeros(len(self.model.grid), dtype=bool)
        return self.model.grid.points < self.mission_time

    def _check_feasible(self, lo: np.ndarray, hi: np.ndarray) -> None:
        f = self.model.pmf
        if math.fsum(f * lo) > 1 + _FEAS_TOL or math.fsum(f * hi) < 1 - _FEAS_TOL:
            raise InfeasibleError("no stress function within the bounds has price 1")


@dataclass(frozen=True)
class DesignSolution:
    stress: StressFunction
    objective: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "objective_bits": self.objective,
            "stress": self.stress.to_dict(),
            "adversarial_shape": self.stress.adversarial_shape,
            "diagnostics": dict(self.diagnostics),
        }


def _phi(a: np.ndarray) -> np.ndarray:
    return a * np.log2(a)


def _finish(problem: DesignProblem, values: np.ndarray, method: str, diagnostics: dict) -> DesignSolution:
    """Normalize exactly, wrap as a stress function and score it."""
    f = problem.model.pmf
    values = values / math.fsum(values * f)
    stress = StressFunction(
        problem.model.grid,
        values,
        problem.bound,
        problem.mission_time,
        {"kind": "tabulated"},
    )
    objective = kl_discrimination(tilt(stress, problem.model), problem.model)
    return DesignSolution(stress, objective, method, diagnostics)


def _idle_value(problem: DesignProblem, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Stress values at zero-mass points, where they affect neither price nor objective."""
    values = np.clip(1.0, lo, hi)
    below = problem._below()
    values[below] = hi[below]
    return values


def _subset_sums(steps: np.ndarray) -> np.ndarray:
    """All ``2**len(steps)`` subset sums; bit ``k`` of the index selects ``steps[k]``."""
    sums = np.zeros(1)
    for s in steps:
        sums = np.concatenate([sums, sums + s])
    return sums


def solve_vertex(problem: DesignProblem) -> DesignSolution:
    """Exact maximum by enumerating every vertex of the feasible polytope.

    For each choice of the fractional coordinate ``j`` every split of the other
    coordinates into lower/upper bound is scored at once through subset sums.
    Ties are broken toward the lexicographically smallest set of coordinates
    at their upper bound.
    """
    f = problem.model.pmf
    lo, hi = problem.coordinate_bounds()
    problem._check_feasible(lo, hi)
    live = np.flatnonzero(f > 0)
    n = live.size
    if n > MAX_VERTEX_SIZE:
        raise ProblemTooLargeError(
            f"{n} positive-mass points exceed the exact vertex search limit of {MAX_VERTEX_SIZE}"
        )
    fl, lol, hil = f[live], lo[live], hi[live]

    best = -np.inf
    chosen, chosen_key = None, None
    ties = 0
    enumerated = 0
    feasible = 0
    for j in range(n):
        others = np.delete(np.arange(n), j)
        base_mass = math.fsum(fl[others] * lol[others])
        base_gain = math.fsum(fl[others] * _phi(lol[others]))
        d_mass = _subset_sums(fl[others] * (hil[others] - lol[others]))
        d_gain = _subset_sums(fl[others] * (_phi(hil[others]) - _phi(lol[others])))
        a_j = (1.0 - base_mass - d_mass) / fl[j]
        ok = (a_j >= lol[j] - _FEAS_TOL) & (a_j <= hil[j] + _FEAS_TOL)
        enumerated += a_j.size
        feasible += int(ok.sum())
        if not ok.any():
            continue
        masks = np.flatnonzero(ok)
        a_ok = np.clip(a_j[ok], lol[j], hil[j])
        score = base_gain + d_gain[ok] + fl[j] * _phi(a_ok)
        top = score.max()
        if top < best - _TIE_TOL:
            continue
        if top > best + _TIE_TOL:
            best, chosen, chosen_key, ties = top, None, None, 0
        for k in np.flatnonzero(score >= best - _TIE_TOL):
            ties += 1
            vec = lol.copy()
            upper = others[((masks[k] >> np.arange(n - 1)) & 1) == 1]
            vec[upper] = hil[upper]
            vec[j] = a_ok[k]
            key = tuple(int(live[i]) for i in np.flatnonzero(vec >= hil - _FEAS_TOL))
            if chosen_key is None or key < chosen_key:
                chosen, chosen_key = vec, key

    if chosen is None:
        raise InfeasibleError("no feasible vertex found")

    values = _idle_value(problem, lo, hi)
    values[live] = chosen
    diagnostics = {"vertices_enumerated": enumerated, "vertices_feasible": feasible, "ties": ties}
    return _finish(problem, values, "vertex", diagnostics)


_FAMILY_KEYS = {"step": ("a_hi", "a_lo"), "logistic": ("a_hi", "a_lo", "kappa")}


def solve_parametric(
    problem: DesignProblem, family: str, search_grid: Mapping[str, Sequence[float]]
) -> DesignSolution:
    """Best member of a step or logistic stress family over a parameter grid.

    ``search_grid`` maps ``a_hi``, ``a_lo`` (and ``kappa`` for logistic) to
    candidate values; an optional ``mission_time`` list overrides the problem's
    mission time.  Every candidate is normalized before it is checked against
    the problem's bounds and scored.  The first best candidate in product
    order wins ties.
    """
    if family not in _FAMILY_KEYS:
        raise ParameterError(f"unknown family {family!r}; expected step or logistic")
    keys = _FAMILY_KEYS[family]
    unknown = set(search_grid) - set(keys) - {"mission_time"}
    if unknown:
        raise ParameterError(f"unknown search parameters: {sorted(unknown)}")
    missing = [k for k in keys if not search_grid.get(k)]
    if missing:
        raise ParameterError(f"empty or missing search ranges: {missing}")
    centers = search_grid.get("mission_time") or [problem.mission_time]
    if any(c is None for c in centers):
        raise ParameterError("parametric search needs a mission time")

    f = problem.model.pmf
    points = problem.model.grid.points
    lo, hi = problem.coordinate_bounds()
    best_score, best_values, best_params = -np.inf, None, None
    tried = 0
    accepted = 0
    for center in centers:
        for params in itertools.product(*(search_grid[k] for k in keys)):
            tried += 1
            named = dict(zip(keys, params))
            if named["a_hi"] <= 0 or named["a_lo"] <= 0:
                continue
            if family == "step":
                raw = _step_values(points, center, named["a_hi"], named["a_lo"])
            else:
                if named["kappa"] <= 0:
                    continue
                raw = _logistic_values(points, center, named["a_hi"], named["a_lo"], named["kappa"])
            values = raw / math.fsum(raw * f)
            live = f > 0
            if np.any(values[live] < lo[live] * (1 - _FEAS_TOL)) or np.any(
                values[live] > hi[live] * (1 + _FEAS_TOL)
            ):
                continue
            if np.any(values < problem.epsilon) or np.any(values > problem.bound * (1 + _FEAS_TOL)):
                continue
            accepted += 1
            score = math.fsum(f[live] * _phi(values[live]))
            if score > best_score:
                best_score, best_values = score, values
                best_params = {"mission_time": float(center), **{k: float(v) for k, v in named.items()}}
    if best_values is None:
        raise NoSolutionError(f"none of the {tried} {family} candidates is feasible")
    diagnostics = {"family": family, "candidates": tried, "feasible": accepted, "best_parameters": best_params}
    return _finish(problem, best_values, "parametric", diagnostics)


def _lattice_levels(delta: float, lo: float, hi: float, bound: float, epsilon: float) -> np.ndarray:
    grid = delta * np.arange(1, int(math.floor(bound / delta * (1 + 1e-12))) + 1)
    levels = np.concatenate([[epsilon, 1.0, bound, lo, hi], grid])
    levels = levels[(levels >= lo * (1 - _FEAS_TOL)) & (levels <= hi * (1 + _FEAS_TOL))]
    return np.unique(np.clip(levels, lo, hi))


def oracle(problem: DesignProblem, delta: float) -> DesignSolution:
    """Exhaustive lattice search, independent of the vertex characterization.

    Stress values are drawn from ``{epsilon, delta, 2*delta, ..., B}`` (plus the
    shape bounds 1 and ``B`` when they are not lattice points).  One coordinate
    at a time is left free and solved exactly from the budget ``sum f A = 1``;
    every lattice combination of the others is covered, so every returned
    candidate is exactly normalized and within bounds.  Pruning by upper bounds
    never discards a candidate that could beat the incumbent.
    """
    from ._lattice import build_tree, search_free_coordinate

    m = len(problem.model.grid)
    if m > MAX_ORACLE_SIZE:
        raise ProblemTooLargeError(f"oracle refuses grids of {m} points (limit {MAX_ORACLE_SIZE})")
    if not 0 < delta < problem.bound or (problem.bound == 1.0 and not 0 < delta < 1):
        raise ParameterError(f"lattice step must lie in (0, B), got {delta}")
    f = problem.model.pmf
    lo, hi = problem.coordinate_bounds()
    problem._check_feasible(lo, hi)
    live = np.flatnonzero(f > 0)
    levels = {
        int(i): _lattice_levels(delta, lo[i], hi[i], problem.bound, problem.epsilon) for i in live
    }

    values = _idle_value(problem, lo, hi)
    if live.size == 1:
        values[live] = 1.0 / f[live]
        return _finish(problem, values, "oracle", {"delta": delta, "candidates": 1})

    best = -np.inf
    best_vec = None
    candidates = leaves = nodes = 0
    for j in live:
        others = [int(i) for i in live if i != j]
        inner, outer = others[-2:], others[:-2]
        grids = np.meshgrid(*(levels[i] for i in inner), indexing="ij")
        inner_vals = np.stack([g.ravel() for g in grids], axis=1)
        inner_mass = inner_vals @ f[inner]
        inner_gain = _phi(inner_vals) @ f[inner]
        order = np.argsort(inner_mass, kind="stable")
        inner_vals, inner_mass, inner_gain = inner_vals[order], inner_mass[order], inner_gain[order]
        node_start, node_end, node_max = build_tree(inner_gain)

        width = max((levels[i].size for i in outer), default=1)
        outer_mass = np.zeros((len(outer), width))
        outer_gain = np.zeros((len(outer), width))
        outer_counts = np.array([levels[i].size for i in outer], dtype=np.int64)
        for r, i in enumerate(outer):
            outer_mass[r, : levels[i].size] = f[i] * levels[i]
            outer_gain[r, : levels[i].size] = f[i] * _phi(levels[i])
        candidates += inner_mass.size * int(np.prod(outer_counts))

        found, outer_idx, inner_idx, n_leaves, n_nodes = search_free_coordinate(
            outer_mass,
            outer_gain,
            outer_counts,
            inner_mass,
            inner_gain,
            node_start,
            node_end,
            node_max,
            float(f[j]),
            1.0 - f[j] * hi[j],
            1.0 - f[j] * lo[j],
            best,
        )
        leaves += n_leaves
        nodes += n_nodes
        if inner_idx >= 0 and found > best:
            best = found
            vec = values.copy()
            vec[inner] = inner_vals[inner_idx]
            for r, i in enumerate(outer):
                vec[i] = levels[i][outer_idx[r]]
            rest = math.fsum(f[others] * vec[others])
            vec[j] = min(max((1.0 - rest) / f[j], lo[j]), hi[j])
            best_vec = vec

    if best_vec is None:
        raise InfeasibleError("no lattice candidate satisfies the budget")
    diagnostics = {"delta": delta, "candidates": candidates, "leaves_scored": leaves, "nodes_visited": nodes}
    return _finish(problem, best_vec, "oracle", diagnostics)
