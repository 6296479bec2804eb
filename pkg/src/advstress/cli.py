"""Command line interface.

Subcommands ``quote``, ``design``, ``figures``, ``simulate`` and ``certify``
all read one scenario document.  Structured results go to stdout as JSON
(and to ``--out`` when given).  Exit codes: 0 on success (for ``certify``:
certified), 1 when ``certify`` declines, 2 on any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .certify import certify
from .design import DesignProblem, oracle, solve_parametric, solve_vertex
from .errors import ParameterError, StressTestError
from .figures import figure_data, render_png, write_csv
from .game import evidence_summary, simulate
from .payoff import quote_bet
from .scenario import ScenarioDocument, dumps, load_scenario, to_document

EXIT_OK = 0
EXIT_DECLINED = 1
EXIT_ERROR = 2

_DEFAULT_SEARCH = {
    "a_hi": [1.0, 1.25, 1.5, 2.0, 3.0, 4.0],
    "a_lo": [0.1, 0.25, 0.5, 0.75, 1.0],
    "kappa": [0.5, 1.0, 2.0, 8.0],
}


def _emit(doc: dict, out: Optional[Path], name: str) -> None:
    text = dumps(doc)
    sys.stdout.write(text)
    if out is not None:
        (out / name).write_text(text, encoding="utf-8")


def _out_dir(args) -> Optional[Path]:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    parsed = load_scenario(args.scenario)
    if args.seed is not None:
        parsed = ScenarioDocument(replace(parsed.scenario, seed=args.seed), parsed.design)
    return parsed


def cmd_quote(args) -> int:
    s = _load(args).scenario
    _emit(quote_bet(s.declared, s.y_star).to_dict(), _out_dir(args), "quote.json")
    return EXIT_OK


def cmd_design(args) -> int:
    parsed = _load(args)
    s, block = parsed.scenario, parsed.design
    method = args.method or block.get("method", "vertex")
    bound = args.B if args.B is not None else block.get("B", s.stress.bound)
    shape = block.get("shape", "adversarial")
    problem = DesignProblem(s.declared, float(bound), shape, s.y_star)
    if method == "vertex":
        solution = solve_vertex(problem)
    elif method == "oracle":
        delta = args.delta if args.delta is not None else block.get("delta", 0.01)
        solution = oracle(problem, float(delta))
    elif method == "parametric":
        family = block.get("family", "step")
        search = {**_DEFAULT_SEARCH, **block.get("search", {})}
        if family == "step":
            search.pop("kappa", None)
        solution = solve_parametric(problem, family, search)
    else:
        raise ParameterError(f"unknown design method {method!r}")
    _emit(solution.to_dict(), _out_dir(args), "design.json")
    return EXIT_OK


def cmd_figures(args) -> int:
    parsed = _load(args)
    s = parsed.scenario
    out = _out_dir(args) or Path(".")
    files = []
    for figure in figure_data(s):
        files.append(write_csv(figure, out).name)
        if args.render:
            files.append(render_png(figure, out, s.y_star).name)
    _emit({"figures": files}, None, "")
    return EXIT_OK


_TABLE_COLUMNS = ("replication", "y", "score", "log2_score", "c_payoff", "m_payoff", "certified")


def _write_table(table: dict, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_TABLE_COLUMNS)
        cols = [table[c] for c in _TABLE_COLUMNS]
        for row in zip(*cols):
            writer.writerow(
                [
                    int(row[0]),
                    *(repr(float(v)) for v in row[1:6]),
                    "true" if row[6] else "false",
                ]
            )


def cmd_simulate(args) -> int:
    parsed = _load(args)
    report = simulate(parsed.scenario, workers=args.workers)
    doc = {"report": report.to_dict()}
    if args.threshold is not None:
        doc["evidence"] = evidence_summary(report, args.threshold)
    doc["scenario"] = to_document(parsed)
    out = _out_dir(args)
    _emit(doc, out, "report.json")
    if out is not None:
        _write_table(report.table, out / "replications.csv")
    return EXIT_OK


def _observations(source: str) -> list[float]:
    path = Path(source)
    if path.is_file():
        rows = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()]
        items = [r for r in rows if r and not r.startswith("#")]
    else:
        items = [x.strip() for x in source.split(",") if x.strip()]
    try:
        return [float(x) for x in items]
    except ValueError as exc:
        raise ParameterError(f"cannot read observations from {source!r}: {exc}") from exc


def cmd_certify(args) -> int:
    parsed = _load(args)
    s = parsed.scenario
    if s.policy is None:
        raise ParameterError("certify needs a policy block in the scenario")
    if args.observations is None:
        raise ParameterError("certify needs --observations")
    decision = certify(s.policy, _observations(args.observations), s.certification_context())
    _emit(decision.to_dict(), _out_dir(args), "decision.json")
    return EXIT_OK if decision.certified else EXIT_DECLINED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advstress", description="Adversarial stress testing of lifetime models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="path to the scenario JSON document")
        p.add_argument("--seed", type=int, default=None, help="override the document's seed")
        p.add_argument("--out", default=None, help="directory for output files")
        p.set_defaults(func=func)
        return p

    add("quote", cmd_quote, "quote the two-sided bet at the mission time")
    p = add("design", cmd_design, "design the stress function")
    p.add_argument("--method", choices=("vertex", "parametric", "oracle"), default=None)
    p.add_argument("--B", type=float, default=None, help="upper bound on the stress function")
    p.add_argument("--delta", type=float, default=None, help="lattice step for the oracle")
    p = add("figures", cmd_figures, "write the figure series as CSV")
    p.add_argument("--render", action="store_true", help="also render PNG files (needs matplotlib)")
    p = add("simulate", cmd_simulate, "simulate the game")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--threshold", type=float, default=None, help="evidence threshold in bits")
    p = add("certify", cmd_certify, "apply the certification policy")
    p.add_argument("--observations", default=None, help="file with one lifetime per line, or a comma list")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (StressTestError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ImportError as exc:
        print(f"error: {exc} (install the 'plot' extra for --render)", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
