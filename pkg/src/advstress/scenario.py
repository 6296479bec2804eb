"""Scenario documents: one JSON object that drives every CLI command.

Example::

    {
      "grid": {"start": 0, "stop": 50, "step": 1},
      "declared": {"family": "exponential", "rate": 0.1},
      "belief": {"family": "exponential", "rate": 0.2},
      "truth": "belief",
      "y_star": 10,
      "payoff": {"kind": "just", "c": 0.5, "r": 0.1},
      "stress": {"kind": "step", "a_hi": 1.5, "a_lo": 0.5, "B": 2, "normalize": true},
      "adjustment_mode": "shielded",
      "policy": {"kind": "quantile_match", "convention": "strict"},
      "replications": 10000,
      "seed": 7
    }

Model blocks are either a family (``exponential``, ``weibull``) with its
parameters or a ``pmf`` list on the scenario grid.  ``truth`` is ``declared``,
``belief``, ``tilted`` or a model block.  A payoff without ``p`` takes it from
the bet quote on the declared model.  Unknown keys are rejected everywhere.

:func:`to_document` writes the canonical form: an explicit grid, tabulated
pmfs, the payoff with its ``p`` and a tabulated, already normalized stress
function.  Parsing a canonical document gives back an identical scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .certify import PaybackCap, QuantileMatch, RepeatedTrials
from .distributions import LifetimeModel, SupportGrid, discretize
from .errors import ParameterError
from .game import Scenario
from .payoff import PayoffFunction, just_payoff, quote_bet, step_payoff
from .stress import (
    SHIELDED,
    StressFunction,
    logistic_stress,
    normalize,
    step_stress,
    tabulated_stress,
    tilt,
)

__all__ = ["ScenarioDocument", "parse_document", "load_scenario", "to_document", "dumps"]

_TOP_KEYS = {
    "grid",
    "declared",
    "belief",
    "truth",
    "y_star",
    "payoff",
    "stress",
    "adjustment_mode",
    "policy",
    "replications",
    "seed",
    "design",
}
_DESIGN_KEYS = {"method", "B", "delta", "shape", "family", "search"}
_TRUTH_REFS = ("declared", "belief", "tilted")


def _check_keys(block: Mapping, allowed: set, where: str) -> None:
    if not isinstance(block, Mapping):
        raise ParameterError(f"{where} must be an object")
    unknown = set(block) - allowed
    if unknown:
        raise ParameterError(f"unknown keys in {where}: {sorted(unknown)}")


def _require(block: Mapping, key: str, where: str):
    if key not in block:
        raise ParameterError(f"{where} is missing {key!r}")
    return block[key]


def _parse_grid(doc) -> SupportGrid:
    if isinstance(doc, Mapping):
        _check_keys(doc, {"start", "stop", "step"}, "grid")
        return SupportGrid.uniform(
            float(_require(doc, "start", "grid")), float(_require(doc, "stop", "grid")), float(_require(doc, "step", "grid"))
        )
    if isinstance(doc, list):
        return SupportGrid(doc)
    raise ParameterError("grid must be a list of points or {start, stop, step}")


def _parse_model(doc, grid: SupportGrid, where: str) -> LifetimeModel:
    if not isinstance(doc, Mapping):
        raise ParameterError(f"{where} must be an object")
    if "pmf" in doc:
        _check_keys(doc, {"pmf"}, where)
        return LifetimeModel(grid, doc["pmf"])
    family = _require(doc, "family", where)
    params = {k: v for k, v in doc.items() if k != "family"}
    if family == "points":
        raise ParameterError(f"{where}: give a pmf list directly instead of the points family")
    return discretize(family, grid, **params)


def _parse_payoff(doc, declared: LifetimeModel, y_star: float) -> PayoffFunction:
    _check_keys(doc, {"kind", "p", "y_star", "c", "r"}, "payoff")
    if "y_star" in doc and float(doc["y_star"]) != y_star:
        raise ParameterError("payoff y_star differs from the scenario y_star")
    kind = doc.get("kind", "step")
    p = float(doc["p"]) if "p" in doc else quote_bet(declared, y_star).p
    if kind == "step":
        extra = {"c", "r"} & set(doc)
        if extra:
            raise ParameterError(f"step payoff takes no {sorted(extra)}")
        return step_payoff(p, y_star)
    if kind == "just":
        return just_payoff(p, y_star, float(_require(doc, "c", "payoff")), float(_require(doc, "r", "payoff")))
    raise ParameterError(f"unknown payoff kind {kind!r}")


_STRESS_KEYS = {
    "step": {"a_hi", "a_lo"},
    "logistic": {"a_hi", "a_lo", "kappa"},
    "tabulated": {"values"},
}


def _parse_stress(doc, declared: LifetimeModel, y_star: float) -> StressFunction:
    kind = _require(doc, "kind", "stress")
    if kind not in _STRESS_KEYS:
        raise ParameterError(f"unknown stress kind {kind!r}")
    _check_keys(doc, {"kind", "B", "y_star", "normalize"} | _STRESS_KEYS[kind], "stress")
    if "y_star" in doc and float(doc["y_star"]) != y_star:
        raise ParameterError("stress y_star differs from the scenario y_star")
    bound = float(_require(doc, "B", "stress"))
    grid = declared.grid
    if kind == "step":
        stress = step_stress(grid, y_star, float(_require(doc, "a_hi", "stress")), float(_require(doc, "a_lo", "stress")), bound)
    elif kind == "logistic":
        stress = logistic_stress(
            grid,
            y_star,
            float(_require(doc, "a_hi", "stress")),
            float(_require(doc, "a_lo", "stress")),
            float(_require(doc, "kappa", "stress")),
            bound,
        )
    else:
        stress = tabulated_stress(grid, _require(doc, "values", "stress"), bound, y_star)
    normalize_flag = doc.get("normalize", True)
    if not isinstance(normalize_flag, bool):
        raise ParameterError("stress normalize must be true or false")
    return normalize(stress, declared) if normalize_flag else stress


def _parse_policy(doc, belief: Optional[LifetimeModel]):
    kind = _require(doc, "kind", "policy")
    if kind == "payback_cap":
        _check_keys(doc, {"kind", "cap"}, "policy")
        return PaybackCap(float(_require(doc, "cap", "policy")))
    if belief is None:
        raise ParameterError(f"{kind} policy needs a belief model")
    if kind == "quantile_match":
        _check_keys(doc, {"kind", "convention"}, "policy")
        return QuantileMatch(belief, doc.get("convention", "strict"))
    if kind == "repeated_trials":
        _check_keys(doc, {"kind", "n", "k", "y_tilde"}, "policy")
        n, k = _require(doc, "n", "policy"), _require(doc, "k", "policy")
        if not (isinstance(n, int) and isinstance(k, int)):
            raise ParameterError("repeated trials n and k must be integers")
        return RepeatedTrials(n, k, belief, float(_require(doc, "y_tilde", "policy")))
    raise ParameterError(f"unknown policy kind {kind!r}")


@dataclass(frozen=True, eq=False)
class ScenarioDocument:
    """A parsed document: the scenario plus the optional design block."""

    scenario: Scenario
    design: dict


def _int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParameterError(f"{name} must be an integer")
    return value


def parse_document(doc: Mapping[str, Any]) -> ScenarioDocument:
    _check_keys(doc, _TOP_KEYS, "scenario")
    grid = _parse_grid(_require(doc, "grid", "scenario"))
    declared = _parse_model(_require(doc, "declared", "scenario"), grid, "declared")
    belief = _parse_model(doc["belief"], grid, "belief") if "belief" in doc else None
    y_star = float(_require(doc, "y_star", "scenario"))
    payoff = _parse_payoff(doc.get("payoff", {"kind": "step"}), declared, y_star)
    stress = _parse_stress(_require(doc, "stress", "scenario"), declared, y_star)

    truth_doc = doc.get("truth", "declared")
    if truth_doc == "declared":
        truth = declared
    elif truth_doc == "belief":
        if belief is None:
            raise ParameterError("truth refers to a belief model that is not given")
        truth = belief
    elif truth_doc == "tilted":
        truth = tilt(normalize(stress, declared), declared).as_model()
    elif isinstance(truth_doc, str):
        raise ParameterError(f"truth must be one of {_TRUTH_REFS} or a model block")
    else:
        truth = _parse_model(truth_doc, grid, "truth")
    source = truth_doc if isinstance(truth_doc, str) else "model"

    policy = _parse_policy(doc["policy"], belief) if "policy" in doc else None
    design = dict(doc.get("design", {}))
    _check_keys(design, _DESIGN_KEYS, "design")
    scenario = Scenario(
        declared=declared,
        truth=truth,
        y_star=y_star,
        payoff=payoff,
        stress=stress,
        belief=belief,
        adjustment_mode=doc.get("adjustment_mode", SHIELDED),
        policy=policy,
        replications=_int(doc.get("replications", 1000), "replications"),
        seed=_int(doc.get("seed", 0), "seed"),
        truth_source=source,
    )
    return ScenarioDocument(scenario, design)


def load_scenario(path) -> ScenarioDocument:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: not valid JSON ({exc})") from exc
    return parse_document(doc)


def to_document(parsed: ScenarioDocument | Scenario) -> dict:
    """Canonical document for a scenario."""
    if isinstance(parsed, Scenario):
        parsed = ScenarioDocument(parsed, {})
    s = parsed.scenario
    doc: dict = {
        "grid": s.grid.to_list(),
        "declared": {"pmf": s.declared.pmf.tolist()},
    }
    if s.belief is not None:
        doc["belief"] = {"pmf": s.belief.pmf.tolist()}
    doc["truth"] = s.truth_source if s.truth_source in _TRUTH_REFS else {"pmf": s.truth.pmf.tolist()}
    doc["y_star"] = s.y_star
    doc["payoff"] = s.payoff.to_dict()
    doc["stress"] = {**s.stress.to_dict(), "normalize": False}
    doc["adjustment_mode"] = s.adjustment_mode
    if s.policy is not None:
        doc["policy"] = s.policy.to_dict()
    doc["replications"] = int(s.replications)
    doc["seed"] = int(s.seed)
    if parsed.design:
        doc["design"] = dict(parsed.design)
    return doc


def dumps(doc: Mapping) -> str:
    """Stable JSON text used for every emitted document."""
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"
