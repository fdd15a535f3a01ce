import json

import pytest
import yaml

from drivestyle.cli import main
from drivestyle.scenarios import all_conservative_scenario, lane_change_scenario
from drivestyle.sim import save_scenario


@pytest.fixture
def slc_scenario(tmp_path):
    path = tmp_path / "slc.yaml"
    save_scenario(lane_change_scenario(0), path)
    return path


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "report schema" in capsys.readouterr().out


def test_simulate_writes_outputs(slc_scenario, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--scenario", str(slc_scenario), "--out", str(out)]) == 0
    assert (out / "trajectories.csv").exists()
    assert (out / "labels.csv").exists()


def test_simulate_is_idempotent(slc_scenario, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--scenario", str(slc_scenario), "--out", str(out_a)])
    main(["simulate", "--scenario", str(slc_scenario), "--out", str(out_b)])
    assert (out_a / "trajectories.csv").read_bytes() == (
        out_b / "trajectories.csv"
    ).read_bytes()
    assert (out_a / "labels.csv").read_bytes() == (out_b / "labels.csv").read_bytes()


def test_simulate_missing_scenario(tmp_path, capsys):
    missing = tmp_path / "nope.yaml"
    assert main(["simulate", "--scenario", str(missing), "--out", str(tmp_path)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_full_pipeline_and_evaluate(slc_scenario, tmp_path, capsys):
    run = tmp_path / "run"
    main(["simulate", "--scenario", str(slc_scenario), "--out", str(run)])
    assert main([
        "analyze",
        "--trajectories", str(run / "trajectories.csv"),
        "--frame-rate", "10",
        "--window", "1.0", "--stride", "0.5",
        "--out", str(run),
    ]) == 0
    assert (run / "report.json").exists()
    assert (run / "centrality.csv").exists()
    report = json.loads((run / "report.json").read_text())
    assert report["schema_version"] == "1"
    assert {a["agent_id"] for a in report["agents"]} == {"subject", "g0", "g1", "g2"}

    assert main([
        "evaluate",
        "--report", str(run / "report.json"),
        "--labels", str(run / "labels.csv"),
        "--out", str(run),
    ]) == 0
    tde_rows = (run / "tde.csv").read_text().splitlines()
    assert tde_rows[0] == "style,mean_tde_s,maneuver_count,missing_count"
    assert tde_rows[1].startswith("SLC,")
    mean = float(tde_rows[1].split(",")[1])
    assert mean < 1.5  # timing quality is asserted tightly in acceptance


def test_evaluate_with_unmatched_agent(slc_scenario, tmp_path, capsys):
    run = tmp_path / "run"
    main(["simulate", "--scenario", str(slc_scenario), "--out", str(run)])
    main([
        "analyze", "--trajectories", str(run / "trajectories.csv"),
        "--frame-rate", "10", "--out", str(run),
    ])
    (run / "ghost.csv").write_text(
        "agent_id,style,start_frame,end_frame\nghost,OS,0,10\n"
    )
    assert main([
        "evaluate", "--report", str(run / "report.json"),
        "--labels", str(run / "ghost.csv"), "--out", str(run),
    ]) == 0
    assert "missing" in capsys.readouterr().err
    rows = (run / "tde.csv").read_text().splitlines()
    assert rows[1].split(",")[3] == "1"


def test_evaluate_empty_labels(slc_scenario, tmp_path, capsys):
    run = tmp_path / "run"
    main(["simulate", "--scenario", str(slc_scenario), "--out", str(run)])
    main([
        "analyze", "--trajectories", str(run / "trajectories.csv"),
        "--frame-rate", "10", "--out", str(run),
    ])
    (run / "empty.csv").write_text("agent_id,style,start_frame,end_frame\n")
    assert main([
        "evaluate", "--report", str(run / "report.json"),
        "--labels", str(run / "empty.csv"), "--out", str(run),
    ]) == 0
    assert "no labeled maneuvers" in capsys.readouterr().err


def test_analyze_requires_frame_rate(slc_scenario, tmp_path, capsys):
    run = tmp_path / "run"
    main(["simulate", "--scenario", str(slc_scenario), "--out", str(run)])
    assert main([
        "analyze", "--trajectories", str(run / "trajectories.csv"),
        "--out", str(run),
    ]) == 1
    assert "frame rate" in capsys.readouterr().err


def test_calibrate_writes_thresholds(tmp_path, capsys):
    for i in range(2):
        save_scenario(all_conservative_scenario(i), tmp_path / f"calib{i}.yaml")
    cfg = tmp_path / "run.yaml"
    cfg.write_text(
        "frame_rate_hz: 10\nwindow_s: 1.0\nstride_s: 0.5\n"
        "calibration_scenarios: [calib0.yaml, calib1.yaml]\n"
    )
    out = tmp_path / "thresholds.yaml"
    assert main(["calibrate", "--config", str(cfg), "--out", str(out)]) == 0
    payload = yaml.safe_load(out.read_text())
    assert payload["tau_degree"] > 0
    assert payload["tau_closeness"] > 0
    first = out.read_bytes()
    main(["calibrate", "--config", str(cfg), "--out", str(out)])
    assert out.read_bytes() == first  # deterministic


def test_calibrate_without_scenarios(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("frame_rate_hz: 10\n")
    assert main(["calibrate", "--config", str(cfg), "--out", str(tmp_path / "t.yaml")]) == 1
    assert "calibration_scenarios" in capsys.readouterr().err


def test_analyze_accepts_config_and_thresholds_files(slc_scenario, tmp_path):
    run = tmp_path / "run"
    main(["simulate", "--scenario", str(slc_scenario), "--out", str(run)])
    (tmp_path / "cfg.yaml").write_text(
        "frame_rate_hz: 10\nmu: 100\nwindow_s: 1.0\nstride_s: 0.5\n"
        "thresholds: {tau_degree: 3.4, tau_closeness: 0.16, weaving_min_sharpness: 0.15}\n"
    )
    assert main([
        "analyze", "--trajectories", str(run / "trajectories.csv"),
        "--config", str(tmp_path / "cfg.yaml"), "--out", str(run),
    ]) == 0


def test_analyze_lone_conservative_agent(tmp_path):
    from drivestyle.sim import ScenarioConfig, SpawnSpec

    scenario = tmp_path / "lone.yaml"
    save_scenario(
        ScenarioConfig(
            lane_count=2, road_length_m=3000.0, timestep_s=0.1, duration_s=20.0,
            spawns=[SpawnSpec("solo", "conservative", 0, 10.0, 24.0)],
        ),
        scenario,
    )
    run = tmp_path / "run"
    main(["simulate", "--scenario", str(scenario), "--out", str(run)])
    main([
        "analyze", "--trajectories", str(run / "trajectories.csv"),
        "--frame-rate", "10", "--out", str(run),
    ])
    report = json.loads((run / "report.json").read_text())
    (agent,) = report["agents"]
    assert agent["global_label"] == "conservative"


def test_evaluate_accepts_annotation_format(slc_scenario, tmp_path):
    run = tmp_path / "run"
    main(["simulate", "--scenario", str(slc_scenario), "--out", str(run)])
    main([
        "analyze", "--trajectories", str(run / "trajectories.csv"),
        "--frame-rate", "10", "--window", "1.0", "--stride", "0.5",
        "--out", str(run),
    ])
    labels = (run / "labels.csv").read_text().splitlines()[1].split(",")
    agent, style, start, end = labels
    (run / "annotations.csv").write_text(
        "video_id,agent_id,style,annotator_id,start_frame,end_frame\n"
        f"vid0,{agent},{style},p1,{start},{end}\n"
        f"vid0,{agent},{style},p2,{int(start) + 4},{int(end) + 4}\n"
    )
    assert main([
        "evaluate", "--report", str(run / "report.json"),
        "--labels", str(run / "annotations.csv"), "--out", str(run),
    ]) == 0
    rows = (run / "tde.csv").read_text().splitlines()
    assert rows[1].split(",")[2] == "1"  # one maneuver, aggregated over 2 annotators


def test_internal_error_maps_to_exit_2(monkeypatch, capsys):
    from drivestyle import cli
    from drivestyle.errors import ContractViolationError

    def boom(args):
        raise ContractViolationError("broken invariant")

    monkeypatch.setitem(cli._COMMANDS, "simulate", boom)
    assert main(["simulate", "--scenario", "x", "--out", "y"]) == 2
    assert "invariant" in capsys.readouterr().err
