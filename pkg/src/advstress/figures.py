"""Plot data for the seven payoff and stress curves.

Every figure is a set of labelled series over the scenario grid.  Series are
written as CSV (one ``y`` column plus one column per series).  PNG rendering
is optional and needs matplotlib, which is imported only when asked for.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .game import Scenario
from .payoff import just_payoff, rotate, step_payoff
from .stress import SHIELDED, adversarial_payoff, risk_adjusted_payoff

__all__ = ["FigureSeries", "Figure", "figure_data", "write_csv", "render_png"]

# Shape of the just payoff when the scenario itself uses the step form.
DEFAULT_JUST = {"c": 0.5, "r": 0.1}


@dataclass(frozen=True, eq=False)
class FigureSeries:
    label: str
    y: np.ndarray
    values: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.y.tolist(), self.values.tolist()))


@dataclass(frozen=True, eq=False)
class Figure:
    name: str
    title: str
    series: Sequence[FigureSeries]


def figure_data(scenario: Scenario) -> list[Figure]:
    """Series for figures 1 to 7 on the scenario grid."""
    y = scenario.grid.points
    y_star = scenario.y_star
    p = scenario.payoff.below_level
    step = step_payoff(p, y_star)
    if scenario.payoff.kind == "just":
        just = scenario.payoff
    else:
        just = just_payoff(p, y_star, **DEFAULT_JUST)
    stress = scenario.stress
    s = scenario.payoff(y)
    s_star = adversarial_payoff(stress, scenario.payoff)
    adjusted = risk_adjusted_payoff(s_star, scenario.price, SHIELDED, grid=scenario.grid, y_star=y_star)

    def series(label, values):
        return FigureSeries(label, y, np.asarray(values, dtype=float))

    return [
        Figure("fig1", "Consumer step payoff S(y)", [series("S", step(y))]),
        Figure("fig2", "Manufacturer step payoff -S(y)", [series("minus_S", rotate(step)(y))]),
        Figure("fig3", "Consumer just payoff S(y)", [series("S", just(y))]),
        Figure("fig4", "Manufacturer just payoff -S(y)", [series("minus_S", rotate(just)(y))]),
        Figure("fig5", "Adversarial stress function A(y)", [series("A", stress.values)]),
        Figure("fig6", "Adversarial payoff S*(y)", [series("S_star", s_star), series("S", s)]),
        Figure("fig7", "Risk adjusted payoff", [series("adjusted", adjusted), series("S_star", s_star)]),
    ]


def write_csv(figure: Figure, directory: Path) -> Path:
    path = Path(directory) / f"{figure.name}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y", *(s.label for s in figure.series)])
        for i, y in enumerate(figure.series[0].y):
            writer.writerow([repr(float(y)), *(repr(float(s.values[i])) for s in figure.series)])
    return path


def render_png(figure: Figure, directory: Path, y_star: float) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(directory) / f"{figure.name}.png"
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for k, s in enumerate(figure.series):
        ax.step(s.y, s.values, where="post", label=s.label, linestyle="-" if k == 0 else "--")
    ax.axhline(0.0, color="0.6", linewidth=0.6)
    ax.axvline(y_star, color="0.6", linewidth=0.6, linestyle=":")
    ax.set_xlabel("y")
    ax.set_title(figure.title)
    if len(figure.series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
