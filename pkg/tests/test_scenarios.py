"""Tests for scenario loading, dispatch, deterministic emission, and the CLI."""

import json
from pathlib import Path

import numpy as np
import pytest

from qcontexts import (
    InvariantViolation,
    ScenarioError,
    emit_report,
    format_number,
    load_preset,
    load_scenario,
    parse_report,
    preset_names,
    run_scenario,
    scenario_to_json,
)
from qcontexts.cli import main

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

EXAMPLE_FILES = {
    "abl": "three_box.json",
    "chain": "three_box_chain.json",
    "gap": "two_slit_gap.json",
    "pointer": "skewed_record_pointer.json",
    "spreading": "packet_spreading.json",
    "detector": "geiger_counter.json",
}


def write_scenario(tmp_path, payload) -> str:
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(payload))
    return str(path)


# --- formatting -----------------------------------------------------------------


def test_format_number_twelve_significant_digits():
    assert format_number(1.0) == "1.00000000000"
    assert format_number(0.5) == "0.50000000000"
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(288675.1345948129) == "288675.134595"


# --- loading -------------------------------------------------------------------


def test_every_example_file_loads_and_runs():
    for kind, filename in EXAMPLE_FILES.items():
        scenario = load_scenario(SCENARIO_DIR / filename)
        assert scenario.kind == kind
        report = run_scenario(scenario)
        assert report.kind == kind
        assert report.rows


def test_preset_reference_expands(tmp_path):
    path = write_scenario(tmp_path, {"preset": "three-box"})
    scenario = load_scenario(path)
    assert scenario.name == "three-box"
    # Expansion matches the hand-built arrangement: amplitudes 1/sqrt(3).
    state = scenario.parameters["preparation"]["state"]
    expected = 1 / np.sqrt(3)
    assert state[0] == [expected, 0.0]
    assert state[2] == [expected, 0.0]
    post = scenario.parameters["postselection"]
    assert post["label"] == "b"
    corner = post["observable"]["outcomes"][0]["projector"][2][2]
    assert abs(corner[0] - 1 / 3) < 1e-15 and corner[1] == 0.0


def test_missing_postselection_is_field_level_error(tmp_path):
    preset = load_preset("three-box")
    params = dict(preset.parameters)
    del params["postselection"]
    path = write_scenario(tmp_path, {"name": "broken", "kind": "abl", "parameters": params})
    with pytest.raises(ScenarioError, match="postselection"):
        load_scenario(path)


def test_unnormalized_state_names_the_field(tmp_path):
    preset = load_preset("three-box")
    params = json.loads(json.dumps(preset.parameters))
    params["preparation"]["state"] = [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]
    path = write_scenario(tmp_path, {"name": "broken", "kind": "abl", "parameters": params})
    with pytest.raises(InvariantViolation, match="preparation.state"):
        load_scenario(path)


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"name": "x", ')
    with pytest.raises(ScenarioError, match="line"):
        load_scenario(str(path))


def test_complex_entries_must_be_pairs(tmp_path):
    path = write_scenario(
        tmp_path,
        {
            "name": "bad",
            "kind": "gap",
            "parameters": {
                "preparation": {"state": [1.0, 0.0]},
                "intermediate": {"observable": "X"},
                "postselection": {"observable": "Z", "label": "+1"},
            },
        },
    )
    with pytest.raises(ScenarioError, match=r"\[re, im\]"):
        load_scenario(path)


def test_unknown_kind_rejected(tmp_path):
    path = write_scenario(tmp_path, {"name": "x", "kind": "banana", "parameters": {}})
    with pytest.raises(ScenarioError, match="unknown kind"):
        load_scenario(path)


# --- presets ---------------------------------------------------------------------


def test_preset_names_stable():
    assert preset_names() == ("geiger", "three-box", "two-slit")


def test_presets_self_validate(tmp_path):
    # Serializing a preset, loading it back, and serializing again is a fixed point.
    for name in preset_names():
        first = scenario_to_json(load_preset(name))
        path = tmp_path / f"{name}.json"
        path.write_bytes(first)
        second = scenario_to_json(load_scenario(str(path)))
        assert first == second


def test_unknown_preset():
    with pytest.raises(ScenarioError, match="unknown preset"):
        load_preset("four-box")


# --- running -------------------------------------------------------------------


def test_three_box_report_values():
    report = run_scenario(load_preset("three-box"))
    assert report.value("abl:box1") == 1.0
    assert report.value("abl:elsewhere") == 0.0
    assert abs(report.value("born:box1") - 1 / 3) < 1e-12
    assert report.metadata_dict()["reading"] == "subjective"


def test_two_slit_gap_report_values():
    report = run_scenario(load_preset("two-slit"))
    assert report.value("quantum") == 1.0
    assert report.value("classical_chain") == 0.5
    assert report.value("gap") == 0.5


def test_chain_report_columns_and_overrides():
    scenario = load_scenario(SCENARIO_DIR / EXAMPLE_FILES["chain"])
    report = run_scenario(scenario, seed=5, samples=2000)
    assert report.columns == ("analytic", "frequency", "zscore")
    metadata = report.metadata_dict()
    assert metadata["seed"] == "5"
    assert metadata["samples"] == "2000"
    assert int(metadata["retained"]) > 0
    assert report.value("box1", "analytic") == 1.0
    assert report.value("box1", "frequency") == 1.0


def test_detector_report_counts():
    report = run_scenario(load_preset("geiger"), samples=50)
    assert report.value("runs") == 50.0
    assert report.value("clicked") + report.value("censored") == 50.0


def test_reports_carry_version_and_tolerances():
    report = run_scenario(load_preset("two-slit"))
    metadata = report.metadata_dict()
    assert "tool_version" in metadata
    assert metadata["tolerance_construction"] == "1e-12"
    assert metadata["tolerance_algebra"] == "1e-10"


# --- emission ---------------------------------------------------------------------


def test_csv_shape_plain_kind():
    data = emit_report(run_scenario(load_preset("three-box")), "csv").decode()
    lines = data.split("\n")
    assert lines[0] == "label,value"
    assert lines[1] == "abl:box1,1.00000000000"
    assert data.endswith("\n") and "\r" not in data


def test_csv_shape_chain_kind():
    scenario = load_scenario(SCENARIO_DIR / EXAMPLE_FILES["chain"])
    data = emit_report(run_scenario(scenario, samples=1000), "csv").decode()
    assert data.split("\n")[0] == "label,analytic,frequency,zscore"


def test_emission_is_deterministic():
    scenario = load_scenario(SCENARIO_DIR / EXAMPLE_FILES["chain"])
    first = emit_report(run_scenario(scenario), "json")
    second = emit_report(run_scenario(scenario), "json")
    assert first == second
    assert emit_report(run_scenario(scenario), "csv") == emit_report(run_scenario(scenario), "csv")


def test_json_round_trip():
    for name in preset_names():
        report = run_scenario(load_preset(name))
        assert parse_report(emit_report(report, "json")) == report


def test_unknown_format_rejected():
    with pytest.raises(ScenarioError, match="format"):
        emit_report(run_scenario(load_preset("two-slit")), "xml")


# --- CLI -----------------------------------------------------------------------


def test_cli_run_writes_deterministic_bytes(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    source = str(SCENARIO_DIR / EXAMPLE_FILES["chain"])
    assert main(["run", source, "--seed", "12", "--out", str(out1)]) == 0
    assert main(["run", source, "--seed", "12", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_run_stdout(capsysbinary):
    assert main(["run", str(SCENARIO_DIR / EXAMPLE_FILES["gap"]), "--format", "json"]) == 0
    payload = json.loads(capsysbinary.readouterr().out)
    assert payload["kind"] == "gap"
    assert payload["rows"][0] == ["quantum", "1.00000000000"]


def test_cli_parse_error_exit_code(tmp_path, capsysbinary):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == 2
    diagnostic = json.loads(capsysbinary.readouterr().err)
    assert diagnostic["error"] == "parse-error"
    assert diagnostic["exit_code"] == 2


def test_cli_invariant_violation_exit_code(tmp_path, capsysbinary):
    preset = load_preset("three-box")
    params = json.loads(json.dumps(preset.parameters))
    params["preparation"]["state"][0] = [2.0, 0.0]
    path = write_scenario(tmp_path, {"name": "bad", "kind": "abl", "parameters": params})
    assert main(["run", path]) == 3
    diagnostic = json.loads(capsysbinary.readouterr().err)
    assert diagnostic["error"] == "invariant-violation"


def test_cli_impossible_postselection_exit_code(tmp_path, capsysbinary):
    params = {
        "preparation": {"state": [[1.0, 0.0], [0.0, 0.0]], "time": 0.0},
        "intermediate": {"observable": "Z", "time": 1.0},
        "postselection": {"observable": "Z", "label": "-1", "time": 2.0},
    }
    path = write_scenario(tmp_path, {"name": "dead-end", "kind": "abl", "parameters": params})
    assert main(["run", path]) == 4
    diagnostic = json.loads(capsysbinary.readouterr().err)
    assert diagnostic["error"] == "impossible-postselection"
    assert diagnostic["exit_code"] == 4


def test_cli_preset_list_and_show(capsysbinary):
    assert main(["preset", "list"]) == 0
    names = capsysbinary.readouterr().out.decode().split()
    assert names == list(preset_names())
    assert main(["preset", "show", "three-box"]) == 0
    payload = json.loads(capsysbinary.readouterr().out)
    assert payload["kind"] == "abl"
    assert main(["preset", "show", "missing"]) == 2


def test_cli_chain_no_data_exit_code(tmp_path, capsysbinary):
    params = {
        "preparation": {"state": [[1.0, 0.0], [0.0, 0.0]], "time": 0.0},
        "intermediate": {"observable": "Z", "time": 1.0},
        "postselection": {"observable": "Z", "label": "-1", "time": 2.0},
        "samples": 500,
        "seed": 2,
    }
    path = write_scenario(tmp_path, {"name": "dead-end", "kind": "chain", "parameters": params})
    assert main(["run", path]) == 4
