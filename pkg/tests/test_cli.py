from __future__ import annotations

import json
import shutil

import pytest

from roeforge import io
from roeforge.cli import run
from roeforge.generators import documented_homotopy
from roeforge.metric_space import FiniteMetricSpace


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        run(["--help"])
    out = capsys.readouterr().out
    for name in ("validate-space", "check-map", "check-closeness", "build-cylinder", "slice-family",
                 "verify-family", "verify-pushforward", "verify-homotopy", "rot-path", "matrix-info",
                 "run-suite"):
        assert name in out


def test_validate_space_exit_codes(data_dir):
    assert run(["validate-space", str(data_dir / "line5.json")]) == 0
    assert run(["validate-space", str(data_dir / "asymmetric.json")]) == 1


def test_failure_carries_witness(data_dir, capsys):
    assert run(["validate-space", str(data_dir / "asymmetric.json"), "--format", "json"]) == 1
    doc = json.loads(capsys.readouterr().out)
    sym = next(c for c in doc["checks"] if c["name"] == "symmetry")
    assert sym["status"] == "fail" and sym["witness"] == [0, 1]


def test_parse_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"labels": [0, 1],\n "dist": [[0, 1], [1, 0]')
    assert run(["validate-space", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err
    missing = tmp_path / "missing.json"
    missing.write_text('{"labels": [0]}')
    assert run(["validate-space", str(missing)]) == 2
    assert "'dist'" in capsys.readouterr().err
    assert run(["validate-space", str(tmp_path / "absent.json")]) == 2


def test_bad_block_shape_exit_2(data_dir, tmp_path, capsys):
    shutil.copy(data_dir / "line5.json", tmp_path / "line5.json")
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"index": "line5.json", "d": 2, "blocks": {"0,1": [[[1, 0]]]}}))
    assert run(["matrix-info", str(m)]) == 2
    assert "blocks" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["check-map", "shift5.json"],
    ["check-closeness", "id5.json", "shift5.json", "--bound", "1"],
    ["build-cylinder", "line5.json", "--p", "0,1,2,3,4"],
    ["slice-family", "documented_homotopy.json"],
    ["verify-family", "documented_homotopy.json"],
    ["verify-pushforward", "--map", "shift5.json", "--matrix", "shift_matrix.json"],
    ["verify-homotopy", "--f", "id5.json", "--g", "shift5.json", "--matrix", "shift_matrix.json",
     "--samples", "5"],
    ["verify-chain", "documented_homotopy.json", "--matrix", "shift_matrix.json", "--samples", "5"],
    ["rot-path", "--sigma", "swap_ab.json", "--t", "0.5"],
    ["matrix-info", "shift_matrix.json"],
])
def test_subcommands_pass(data_dir, argv, capsys):
    resolved = [str(data_dir / a) if a.endswith(".json") else a for a in argv]
    assert run(resolved) == 0
    assert run(resolved + ["--format", "json"]) == 0
    out = capsys.readouterr().out
    assert out.strip()


def test_closeness_bound_violation(data_dir):
    argv = ["check-closeness", str(data_dir / "id5.json"), str(data_dir / "shift5.json"), "--bound", "0.5"]
    assert run(argv) == 1


def test_rot_path_json(data_dir, capsys):
    assert run(["rot-path", "--sigma", str(data_dir / "swap_ab.json"), "--t", "1", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["matrix"] == [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
    assert run(["rot-path", "--sigma", str(data_dir / "swap_ab.json"), "--t", "2"]) == 2


def small_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"counts": {k: 2 for k in (
        "metric", "products", "norm", "pushforward", "rotation", "closeness",
        "functoriality", "identity", "corner", "homotopy")}}))
    return str(cfg)


def test_run_suite_seed_from_environment(tmp_path, monkeypatch, capsys):
    cfg = small_config(tmp_path)
    monkeypatch.setenv("ROEFORGE_SEED", "5")
    assert run(["run-suite", "--config", cfg]) == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 5
    assert run(["run-suite", "--config", cfg, "--seed", "6"]) == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 6
    monkeypatch.setenv("ROEFORGE_SEED", "five")
    assert run(["run-suite", "--config", cfg]) == 2


def test_run_suite_text_and_output(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert run(["run-suite", "--config", small_config(tmp_path), "--seed", "2", "--format", "text",
                "--output", str(out)]) == 0
    assert "RESULT: PASS" in capsys.readouterr().out
    assert json.loads(out.read_text())["passed"] is True


def test_run_suite_unknown_config_field(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"bogus": 1}')
    assert run(["run-suite", "--config", str(cfg)]) == 2


# round trips: parse, re-serialize, compare as documents

def test_space_round_trip(data_dir):
    doc = json.loads((data_dir / "line5.json").read_text())
    assert io.load_space(data_dir / "line5.json").to_json() == doc


def test_map_round_trip(data_dir):
    doc = json.loads((data_dir / "shift5.json").read_text())
    f = io.load_map(data_dir / "shift5.json")
    assert io.map_to_json(f, doc["source"], doc["target"]) == doc


def test_inline_map_round_trip(tmp_path):
    X = FiniteMetricSpace(["p", "q"], [[0, 2], [2, 0]])
    doc = {"source": X.to_json(), "target": X.to_json(), "values": ["q", "q"]}
    (tmp_path / "f.json").write_text(json.dumps(doc))
    f = io.load_map(tmp_path / "f.json")
    assert json.loads(json.dumps(io.map_to_json(f))) == doc


def test_matrix_round_trip(data_dir):
    m = io.load_matrix(data_dir / "shift_matrix.json")
    again = type(m).from_json(json.loads(json.dumps(m.to_json())), m.index)
    assert again.distance(m) == 0
    doc = json.loads((data_dir / "shift_matrix.json").read_text())
    assert m.to_json()["blocks"] == doc["blocks"]


def test_involution_round_trip(data_dir):
    doc = json.loads((data_dir / "swap_ab.json").read_text())
    assert io.load_involution(data_dir / "swap_ab.json").to_json() == doc


def test_homotopy_round_trip(data_dir, tmp_path):
    doc = json.loads((data_dir / "documented_homotopy.json").read_text())
    data = io.load_homotopy(data_dir / "documented_homotopy.json")
    assert io.homotopy_to_json(data, doc["base"], doc["target"]) == doc
    inline = io.homotopy_to_json(documented_homotopy())
    (tmp_path / "h.json").write_text(json.dumps(inline))
    assert io.homotopy_to_json(io.load_homotopy(tmp_path / "h.json")) == json.loads(json.dumps(inline))


def test_homotopy_with_string_labels(tmp_path):
    X = FiniteMetricSpace(["u", "v"], [[0, 1], [1, 0]])
    doc = {"base": X.to_json(), "target": X.to_json(), "p": [1, 0],
           "H": {"u,1": "u", "u,2": "v", "v,1": "v"}}
    (tmp_path / "h.json").write_text(json.dumps(doc))
    data = io.load_homotopy(tmp_path / "h.json")
    assert list(data.g.values) == ["v", "v"]
    doc["H"].pop("v,1")
    (tmp_path / "h.json").write_text(json.dumps(doc))
    with pytest.raises(io.InputError, match="no value"):
        io.load_homotopy(tmp_path / "h.json")
