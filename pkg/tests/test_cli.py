"""CLI behaviour and golden outputs.

Golden files live in ``tests/golden/expected``.  Set ``ADVSTRESS_REGEN=1`` to
rewrite them after an intended output change, then review the diff.
"""

import os
import subprocess
import sys
from pathlib import Path

import pytest

from advstress.cli import main

GOLDEN = Path(__file__).parent / "golden"
EXPECTED = GOLDEN / "expected"
REGEN = os.environ.get("ADVSTRESS_REGEN") == "1"

# (case name, scenario, argv after the scenario, expected exit code)
CASES = [
    ("two_point_quote", "two_point", ["quote"], 0),
    ("two_point_design", "two_point", ["design"], 0),
    ("two_point_oracle", "two_point", ["design", "--method", "oracle", "--delta", "0.01"], 0),
    ("two_point_simulate", "two_point", ["simulate", "--threshold", "0.1"], 0),
    ("two_point_certify_pass", "two_point", ["certify", "--observations", "2"], 0),
    ("two_point_certify_fail", "two_point", ["certify", "--observations", "1"], 1),
    ("two_point_figures", "two_point", ["figures"], 0),
    ("exponential_design", "exponential", ["design"], 0),
    ("exponential_parametric", "exponential", ["design", "--method", "parametric"], 0),
    ("exponential_simulate", "exponential", ["simulate", "--threshold", "0.1"], 0),
    ("exponential_certify", "exponential", ["certify", "--observations", "21"], 0),
    ("exponential_figures", "exponential", ["figures"], 0),
    ("trials_certify", "trials", ["certify", "--observations", "12,3,10"], 0),
    ("trials_simulate", "trials", ["simulate", "--seed", "5"], 0),
    ("identity_design", "identity", ["design"], 0),
    ("identity_simulate", "identity", ["simulate"], 0),
]


def run(scenario, argv, out, capsys):
    command, *rest = argv
    code = main([command, "--scenario", str(GOLDEN / f"{scenario}.json"), "--out", str(out), *rest])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def outputs(out: Path, stdout: str) -> dict[str, bytes]:
    files = {"stdout": stdout.encode()}
    for path in sorted(out.iterdir()):
        files[path.name] = path.read_bytes()
    return files


@pytest.mark.parametrize("name, scenario, argv, code", CASES, ids=[c[0] for c in CASES])
def test_golden(name, scenario, argv, code, tmp_path, capsys):
    first, stdout, err = run(scenario, argv, tmp_path / "a", capsys)
    assert first == code, err
    got = outputs(tmp_path / "a", stdout)
    second, stdout2, _ = run(scenario, argv, tmp_path / "b", capsys)
    assert second == code
    assert outputs(tmp_path / "b", stdout2) == got

    target = EXPECTED / name
    if REGEN:
        target.mkdir(parents=True, exist_ok=True)
        for old in target.iterdir():
            old.unlink()
        for fname, data in got.items():
            (target / fname).write_bytes(data)
    expected = {p.name: p.read_bytes() for p in sorted(target.iterdir())}
    assert got == expected


def test_simulate_workers_do_not_change_output(tmp_path, capsys):
    base = ["simulate", "--scenario", str(GOLDEN / "exponential.json")]
    main([*base, "--out", str(tmp_path / "one"), "--workers", "1"])
    one = capsys.readouterr().out
    main([*base, "--out", str(tmp_path / "four"), "--workers", "4"])
    four = capsys.readouterr().out
    assert one == four
    assert outputs(tmp_path / "one", "") == outputs(tmp_path / "four", "")


def test_replication_table_columns(tmp_path, capsys):
    main(["simulate", "--scenario", str(GOLDEN / "trials.json"), "--out", str(tmp_path)])
    header = (tmp_path / "replications.csv").read_text().splitlines()[0]
    assert header == "replication,y,score,log2_score,c_payoff,m_payoff,certified"


def _series(path):
    rows = [line.split(",") for line in path.read_text().splitlines()]
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def test_figure_shapes(tmp_path, capsys):
    assert main(["figures", "--scenario", str(GOLDEN / "exponential.json"), "--out", str(tmp_path)]) == 0
    y_star = 10.0
    _, fig1 = _series(tmp_path / "fig1.csv")
    p = fig1[0][1]
    assert {v for _, v in fig1} == {p, -1.0}
    ys = [r[0] for r in fig1]
    assert ys == sorted(ys)
    _, fig5 = _series(tmp_path / "fig5.csv")
    adversarial = all((a > 1) == (y < y_star) for y, a in fig5)
    header, fig6 = _series(tmp_path / "fig6.csv")
    assert header == ["y", "S_star", "S"]
    if adversarial:
        for y, s_star, s in fig6:
            if y < y_star:
                assert abs(s_star) > abs(s)
            else:
                assert abs(s_star) <= abs(s)
    _, fig7 = _series(tmp_path / "fig7.csv")
    price = 1.0
    for (y, adjusted, s_star) in fig7:
        expected = s_star if y < y_star else s_star - price
        assert adjusted == pytest.approx(expected, abs=1e-12)


def test_figure_render(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    assert main(["figures", "--scenario", str(GOLDEN / "two_point.json"), "--out", str(tmp_path), "--render"]) == 0
    assert (tmp_path / "fig7.png").stat().st_size > 0


@pytest.mark.parametrize(
    "argv, message",
    [
        (["design", "--scenario", "{g}/two_point.json", "--B", "0.5"], "no normalized stress"),
        (["design", "--scenario", "{g}/exponential.json", "--method", "oracle"], "oracle refuses"),
        (["certify", "--scenario", "{g}/identity.json", "--observations", "3"], "policy"),
        (["certify", "--scenario", "{g}/trials.json", "--observations", "1,2"], "expect 3"),
        (["certify", "--scenario", "{g}/two_point.json"], "--observations"),
        (["quote", "--scenario", "{g}/missing.json"], "No such file"),
        (["simulate"], ""),
        (["dance"], ""),
    ],
)
def test_errors_exit_two(argv, message, capsys):
    argv = [a.format(g=GOLDEN) for a in argv]
    assert main(argv) == 2
    assert message in capsys.readouterr().err


def test_quote_beyond_grid(tmp_path, capsys):
    doc = (GOLDEN / "two_point.json").read_text().replace('"y_star": 2', '"y_star": 5')
    path = tmp_path / "far.json"
    path.write_text(doc)
    assert main(["quote", "--scenario", str(path)]) == 2


def test_bound_one_design(capsys):
    assert main(["design", "--scenario", str(GOLDEN / "two_point.json"), "--B", "1"]) == 0
    assert '"objective_bits": 0.0' in capsys.readouterr().out


def test_observations_file(tmp_path, capsys):
    obs = tmp_path / "obs.txt"
    obs.write_text("# lifetimes\n12\n3\n10\n")
    assert main(["certify", "--scenario", str(GOLDEN / "trials.json"), "--observations", str(obs)]) == 0


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "advstress", "quote", "--scenario", str(GOLDEN / "two_point.json")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert result.returncode == 0
    assert '"p": 0.5' in result.stdout
