"""Monte Carlo play of the adversarial betting game.

Each replication draws a lifetime ``y`` from the scenario's truth, scores it
against the declared model and settles the payoffs of both players.

Random streams are derived with a fixed block scheme: replication ``i``
belongs to block ``i // BLOCK_SIZE`` and block ``b`` is sampled from
``SeedSequence(seed, spawn_key=(b,))``.  The draws for a replication depend
only on ``(seed, i)``, so the report does not depend on how blocks are spread
over workers.  Aggregates are computed with ``math.fsum`` over the full,
ordered per-replication arrays.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .certify import (
    CertificationContext,
    PaybackCap,
    QuantileMatch,
    RepeatedTrials,
    threshold_from_cap,
    threshold_from_quantile,
)
from .distributions import LifetimeModel, dominates, draw
from .errors import IncompatibleError, ParameterError, PreconditionError
from .payoff import PayoffFunction
from .stress import (
    SHIELDED,
    UNIFORM,
    StressFunction,
    adversarial_payoff,
    game_price,
    kl_discrimination,
    normalize,
    risk_adjusted_payoff,
    tilt,
)

__all__ = [
    "BLOCK_SIZE",
    "Scenario",
    "GameOutcome",
    "SimulationReport",
    "play_once",
    "simulate",
    "evidence_summary",
]

BLOCK_SIZE = 4096
EVIDENCE_AGAINST = "evidence against declared model"
INSUFFICIENT = "insufficient evidence"

Policy = Union[PaybackCap, QuantileMatch, RepeatedTrials]


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed to play the game repeatedly.

    ``truth`` is the sampling distribution; ``truth_source`` records where it
    came from (``declared``, ``belief``, ``tilted`` or ``model``) so that a
    scenario can be written back out the way it was specified.
    """

    declared: LifetimeModel
    truth: LifetimeModel
    y_star: float
    payoff: PayoffFunction
    stress: StressFunction
    belief: Optional[LifetimeModel] = None
    adjustment_mode: str = SHIELDED
    policy: Optional[Policy] = None
    replications: int = 1000
    seed: int = 0
    truth_source: str = "model"

    def __post_init__(self):
        grid = self.declared.grid
        for name in ("truth", "belief"):
            model = getattr(self, name)
            if model is not None and model.grid != grid:
                raise IncompatibleError(f"{name} model is defined on a different grid")
        if self.stress.grid != grid:
            raise IncompatibleError("stress function is defined on a different grid")
        if self.belief is not None and not dominates(self.declared, self.belief):
            raise PreconditionError("declared survival must dominate the belief")
        if self.adjustment_mode not in (UNIFORM, SHIELDED):
            raise ParameterError(f"unknown adjustment mode {self.adjustment_mode!r}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ParameterError("replications must be a positive integer")
        if not math.isclose(self.payoff.mission_time, self.y_star, rel_tol=1e-12, abs_tol=1e-12):
            raise IncompatibleError("payoff mission time differs from the scenario's")
        if isinstance(self.policy, (QuantileMatch, RepeatedTrials)) and self.policy.belief.grid != grid:
            raise IncompatibleError("policy belief is defined on a different grid")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        names = self.__dataclass_fields__
        return all(getattr(self, k) == getattr(other, k) for k in names)

    __hash__ = None

    @property
    def grid(self):
        return self.declared.grid

    @property
    def price(self) -> float:
        return game_price(self.stress, self.declared)

    def adjusted_payoff(self) -> np.ndarray:
        """Consumer's risk-adjusted payoff at every grid point."""
        s_star = adversarial_payoff(self.stress, self.payoff)
        return risk_adjusted_payoff(s_star, self.price, self.adjustment_mode, grid=self.grid, y_star=self.y_star)

    def threshold(self) -> float:
        """Certification threshold ``y~``; the mission time when no policy is set."""
        policy = self.policy
        if policy is None:
            return float(self.y_star)
        if isinstance(policy, RepeatedTrials):
            return float(policy.y_tilde)
        if isinstance(policy, PaybackCap):
            return threshold_from_cap(self.adjusted_payoff(), self.grid, policy.cap, self.y_star).y_tilde
        return threshold_from_quantile(self.declared, policy.belief, self.y_star, policy.convention)

    def certification_context(self) -> CertificationContext:
        return CertificationContext(self.declared, self.adjusted_payoff(), self.grid, self.y_star)


@dataclass(frozen=True)
class GameOutcome:
    y: float
    score: float
    c_payoff: float
    m_payoff: float
    log2_score: float


@dataclass(frozen=True, eq=False)
class SimulationReport:
    mean_score: float
    score_stderr: float
    mean_log2_score: float
    log2_stderr: float
    mean_c_payoff: float
    mean_m_payoff: float
    min_adjusted_payoff: float
    certification_rate: float
    kl_reference: float
    replications: int
    seed: int
    threshold: float
    table: Optional[dict] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "mean_score": self.mean_score,
            "score_stderr": self.score_stderr,
            "mean_log2_score": self.mean_log2_score,
            "log2_stderr": self.log2_stderr,
            "mean_c_payoff": self.mean_c_payoff,
            "mean_m_payoff": self.mean_m_payoff,
            "min_adjusted_payoff": self.min_adjusted_payoff,
            "certification_rate": self.certification_rate,
            "kl_reference": self.kl_reference,
            "replications": self.replications,
            "seed": self.seed,
            "threshold": self.threshold if math.isfinite(self.threshold) else None,
        }


def _outcome_tables(scenario: Scenario) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Score, consumer payoff and manufacturer payoff at every grid point."""
    price = scenario.price
    points = scenario.grid.points
    s_star = adversarial_payoff(scenario.stress, scenario.payoff)
    score = scenario.stress.values / price
    c_pay = risk_adjusted_payoff(s_star, price, scenario.adjustment_mode, grid=scenario.grid, y_star=scenario.y_star)
    if scenario.adjustment_mode == UNIFORM:
        m_pay = -s_star + price
    else:
        m_pay = np.where(points < scenario.y_star, -s_star, -s_star + price)
    return score, c_pay, m_pay


def play_once(scenario: Scenario, y: float) -> GameOutcome:
    """Settle one game at the observed lifetime ``y`` (a grid point)."""
    i = scenario.grid.index_of(y)
    score, c_pay, m_pay = _outcome_tables(scenario)
    return GameOutcome(
        y=float(scenario.grid.points[i]),
        score=float(score[i]),
        c_payoff=float(c_pay[i]),
        m_payoff=float(m_pay[i]),
        log2_score=float(np.log2(score[i])),
    )


def _draw_block(truth: LifetimeModel, seed: int, block: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    return draw(truth, rng, size)


def _draw_all(scenario: Scenario, workers: int) -> np.ndarray:
    n = int(scenario.replications)
    blocks = [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range(-(-n // BLOCK_SIZE))]
    if workers <= 1 or len(blocks) == 1:
        parts = [_draw_block(scenario.truth, scenario.seed, b, size) for b, size in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda bs: _draw_block(scenario.truth, scenario.seed, *bs), blocks))
    return np.concatenate(parts)


def _mean_and_stderr(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    mean = math.fsum(x) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def simulate(scenario: Scenario, workers: int = 1) -> SimulationReport:
    """Play ``scenario.replications`` independent games.

    The report is a deterministic function of the scenario (including its
    seed); ``workers`` only changes how the sampling is scheduled.
    """
    if workers < 1:
        raise ParameterError("workers must be at least 1")
    ys = _draw_all(scenario, workers)
    idx = np.searchsorted(scenario.grid.points, ys)
    score_t, c_t, m_t = _outcome_tables(scenario)
    score, c_pay, m_pay = score_t[idx], c_t[idx], m_t[idx]
    log2_score = np.log2(score)
    threshold = scenario.threshold()
    certified = ys >= threshold

    reference = normalize(scenario.stress, scenario.declared)
    kl_ref = kl_discrimination(tilt(reference, scenario.declared), scenario.declared)
    mean_score, score_se = _mean_and_stderr(score)
    mean_log, log_se = _mean_and_stderr(log2_score)
    n = ys.size
    table = {
        "replication": np.arange(n),
        "y": ys,
        "score": score,
        "log2_score": log2_score,
        "c_payoff": c_pay,
        "m_payoff": m_pay,
        "certified": certified,
    }
    return SimulationReport(
        mean_score=mean_score,
        score_stderr=score_se,
        mean_log2_score=mean_log,
        log2_stderr=log_se,
        mean_c_payoff=math.fsum(c_pay) / n,
        mean_m_payoff=math.fsum(m_pay) / n,
        min_adjusted_payoff=float(c_pay.min()),
        certification_rate=int(certified.sum()) / n,
        kl_reference=kl_ref,
        replications=n,
        seed=int(scenario.seed),
        threshold=float(threshold),
        table=table,
    )


def evidence_summary(report: SimulationReport, threshold: float) -> dict:
    """Label a run by whether ``mean log2 score - 3 stderr`` clears ``threshold``."""
    lower = report.mean_log2_score - 3.0 * report.log2_stderr
    verdict = EVIDENCE_AGAINST if lower > threshold else INSUFFICIENT
    return {
        "verdict": verdict,
        "mean_log2_score": report.mean_log2_score,
        "log2_stderr": report.log2_stderr,
        "lower_bound": lower,
        "threshold": threshold,
    }
