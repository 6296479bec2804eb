import json
from pathlib import Path

import numpy as np
import pytest

from advstress.certify import PaybackCap, QuantileMatch, RepeatedTrials
from advstress.errors import ParameterError, PreconditionError, StressTestError
from advstress.scenario import dumps, load_scenario, parse_document, to_document
from advstress.stress import game_price

GOLDEN = Path(__file__).parent / "golden"
SCENARIOS = sorted(GOLDEN.glob("*.json"))


def base():
    return json.loads((GOLDEN / "two_point.json").read_text())


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_canonical_round_trip(path):
    parsed = load_scenario(path)
    doc = to_document(parsed)
    again = parse_document(json.loads(dumps(doc)))
    assert again.scenario == parsed.scenario
    assert again.design == parsed.design
    assert to_document(again) == doc


def test_stress_is_normalized_by_default():
    parsed = load_scenario(GOLDEN / "trials.json")
    assert abs(game_price(parsed.scenario.stress, parsed.scenario.declared) - 1) <= 1e-12


def test_payoff_p_defaults_to_quote():
    parsed = load_scenario(GOLDEN / "exponential.json")
    assert parsed.scenario.payoff.below_level == pytest.approx(np.exp(-1.0), abs=1e-12)


def test_policies_parse():
    kinds = {p.stem: load_scenario(p).scenario.policy for p in SCENARIOS}
    assert isinstance(kinds["two_point"], PaybackCap)
    assert isinstance(kinds["exponential"], QuantileMatch)
    assert isinstance(kinds["trials"], RepeatedTrials)
    assert kinds["identity"] is None


@pytest.mark.parametrize(
    "patch",
    [
        {"colour": "red"},
        {"payoff": {"kind": "step", "p": 0.5, "q": 1}},
        {"stress": {"kind": "tabulated", "values": [1.5, 0.5], "B": 1.5, "extra": 1}},
        {"declared": {"pmf": [0.5, 0.5], "grid": [1, 2]}},
        {"truth": "oracle"},
        {"truth": "belief"},
        {"policy": {"kind": "quantile_match"}},
        {"policy": {"kind": "lottery"}},
        {"replications": 0},
        {"replications": 2.5},
        {"seed": "one"},
        {"adjustment_mode": "half"},
        {"stress": {"kind": "step", "a_hi": 1.5, "a_lo": 0.5, "B": 1.5, "normalize": "yes"}},
        {"payoff": {"kind": "step", "p": 0.5, "y_star": 1}},
        {"design": {"solver": "magic"}},
    ],
)
def test_invalid_documents(patch):
    doc = base()
    doc.update(patch)
    with pytest.raises(StressTestError):
        parse_document(doc)


def test_missing_blocks():
    for key in ("grid", "declared", "y_star", "stress"):
        doc = base()
        del doc[key]
        with pytest.raises(ParameterError):
            parse_document(doc)


def test_dominance_enforced():
    doc = base()
    doc["belief"] = {"pmf": [0.2, 0.8]}
    with pytest.raises(PreconditionError):
        parse_document(doc)


def test_truth_model_block():
    doc = base()
    doc["truth"] = {"pmf": [0.9, 0.1]}
    parsed = parse_document(doc)
    assert parsed.scenario.truth_source == "model"
    np.testing.assert_array_equal(parsed.scenario.truth.pmf, [0.9, 0.1])
    assert to_document(parsed)["truth"] == {"pmf": [0.9, 0.1]}


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ParameterError):
        load_scenario(path)
