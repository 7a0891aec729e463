import json

import pytest

from wentropy.cli import (
    PRESETS,
    collect_rows,
    config_from_entries,
    load_run_config,
    main,
    preset_text,
    verdict,
)
from wentropy.io import ConfigError, parse_config_entries


def test_presets_parse_and_validate():
    for name in PRESETS:
        cfg = load_run_config(preset=name)
        assert cfg.nodes == 128 and cfg.dt == 5e-4 and cfg.T == 1.0
    assert load_run_config(preset="round-fixed-point").fixed_point
    assert "heat-of-norms" in load_run_config(preset="perturbed-default").expected_failures


@pytest.mark.parametrize("text,msg", [
    ("nodes = 8\n", "nodes: need at least 16"),
    ("dt = 0\n", "dt: must be positive"),
    ("T = -1\n", "T: must be positive"),
    ("nodes = many\n", "cfg:1: field 'nodes'"),
    ("colour = red\n", "cfg:1: field 'colour': unknown key"),
    ("stages = flow, dance\n", "unknown stage 'dance'"),
])
def test_config_validation_errors(text, msg):
    with pytest.raises(ConfigError, match=msg):
        config_from_entries(parse_config_entries(text, "cfg"), "cfg")


def test_overrides_and_tolerances():
    cfg = load_run_config("perturbed-default", overrides=["nodes=64", "tol.ev-H=1e-3"])
    assert cfg.nodes == 64 and cfg.tolerance("ev-H", 1e-5) == 1e-3
    with pytest.raises(ConfigError):
        load_run_config("perturbed-default", overrides=["nodes"])
    with pytest.raises(ConfigError):
        preset_text("nope")


def test_report_of_empty_artifacts(tmp_path, capsys):
    assert main(["report", str(tmp_path)]) == 0
    assert "identity" in capsys.readouterr().out


def test_report_missing_artifact(tmp_path):
    assert main(["report", str(tmp_path / "absent")]) == 2


def test_jet_subcommand_and_report(tmp_path, capsys):
    assert main(["identities", "jet", "--check", "sim-ric", "--seeds", "20", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "jet_sim-ric.json").read_text())
    assert len(data["seeds"]) == 20 and all(s["pass"] and s["witness"] is None for s in data["seeds"])
    bad = tmp_path / "bad"
    assert main(["identities", "jet", "--check", "lap-a", "--seeds", "3", "--out", str(bad)]) == 1
    assert main(["report", str(tmp_path)]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "sim-ric" in out
    assert main(["identities", "jet", "--check", "lap-a", "--seeds", "3", "--out", str(bad),
                 "--expected-failure", "lap-a"]) == 0
    assert [verdict(r) for r in collect_rows([bad])] == ["XFAIL"]


def test_small_pipeline_end_to_end(tmp_path, capsys):
    traj = tmp_path / "traj.txt"
    args = ["flow", "run", "--T", "0.1", "--dt", "1e-3", "--nodes", "32", "--perturbation", "0,0,0.05",
            "--fT-epsilon", "0.1", "--seed", "1", "--out", str(traj)]
    assert main(args) == 0
    assert main(["entropy", "first-variation", "--traj", str(traj), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "first_variation.csv").read_text().startswith("t,W,Wdot_formula")
    code = main(["entropy", "second-variation", "--traj", str(traj), "--out", str(tmp_path)])
    rows = json.loads((tmp_path / "second_variation.json").read_text())["rows"]
    by = {r["identity"]: r for r in rows}
    assert by["second-variation-printed"]["pass"] is False
    assert code == 1
    assert main(["identities", "slice", "--seeds", "2", "--nodes", "48", "--out", str(tmp_path)]) == 0
    main(["identities", "flow", "--traj", str(traj), "--stride", "10", "--out", str(tmp_path)])
    tags = [r["identity"] for r in json.loads((tmp_path / "flow_identities.json").read_text())["rows"]]
    assert len(tags) == len(set(tags)) and "ev-H" in tags


def test_run_is_deterministic(tmp_path):
    overrides = ["nodes=32", "T=0.1", "dt=2e-3", "stages=flow, first-variation, reparametrization"]
    assert main(["run", "--preset", "perturbed-default", "--out", str(tmp_path / "a")] +
                sum((["--set", o] for o in overrides), [])) == 0
    assert main(["run", "--preset", "perturbed-default", "--out", str(tmp_path / "b")] +
                sum((["--set", o] for o in overrides), [])) == 0
    for name in ("trajectory.txt", "first_variation.csv", "first_variation.json", "run.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
