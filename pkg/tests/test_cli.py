import json
import math
import textwrap

import pytest

from tshc import artifacts
from tshc.cli import main

TRIVIAL_YAML = """
seed: 3
policy:
  layer_sizes: [4, 8, 2]
env:
  kind: vehicle
tasks:
  generator: freeform
  z0: [0, 0, 0, 0]
  z_goal: [0, 0, 0, 0]
training:
  n_restarts: 1
  n_iter_max: 2
  n_candidates: 3
  t_max: 10
"""

HARD_YAML = TRIVIAL_YAML.replace("z_goal: [0, 0, 0, 0]",
                                 "z_goal: [90, 0, 0, 0]")


def write_config(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def train(tmp_path, text):
    out = tmp_path / "out"
    code = main(["train", write_config(tmp_path, text),
                 "--output-dir", str(out), "--workers", "1"])
    return code, out


def test_train_writes_all_artifacts_and_exit_zero(tmp_path):
    code, out = train(tmp_path, TRIVIAL_YAML)
    assert code == 0
    for name in ("tasks_seed3.json", "train_log_seed3.jsonl",
                 "checkpoint_seed3.json", "summary_seed3.json"):
        assert (out / name).exists(), name
    summary = artifacts.read_summary(out / "summary_seed3.json")
    assert summary["n_star"] == summary["n_tasks"] == 1
    assert summary["p_star"] == 0.0
    assert summary["seed"] == 3
    log = artifacts.read_log(out / "train_log_seed3.jsonl")
    assert len(log) == summary["iterations"]
    ckpt = artifacts.read_checkpoint(out / "checkpoint_seed3.json")
    assert ckpt["seed"] == 3
    assert len(ckpt["goal_tuples"]) == 1
    assert ckpt["best"]["n_solved"] == 1


def test_train_unsolved_run_exits_one(tmp_path):
    code, out = train(tmp_path, HARD_YAML)
    assert code == 1
    summary = artifacts.read_summary(out / "summary_seed3.json")
    assert summary["n_star"] == 0
    assert summary["restarts_with_full_solution"] == 0


def test_train_config_error_exits_two(tmp_path):
    path = write_config(tmp_path, TRIVIAL_YAML.replace("seed: 3", "seed: nope"))
    with pytest.raises(SystemExit) as err:
        main(["train", path, "--output-dir", str(tmp_path / "o")])
    assert err.value.code == 2


def test_replay_task_produces_csv_and_summary(tmp_path):
    _, out = train(tmp_path, TRIVIAL_YAML)
    code = main(["replay", str(out / "checkpoint_seed3.json"),
                 "--task", "freeform", "--tasks", str(out / "tasks_seed3.json"),
                 "--output-dir", str(out)])
    assert code == 0
    cols, rows = artifacts.read_trajectory_csv(out / "replay_freeform_seed3.csv")
    assert cols == ("t", "x", "y", "psi", "v", "delta")
    meta = artifacts.read_summary(out / "replay_freeform_seed3.json")
    assert meta["task"] == "freeform"
    assert meta["F"] == 1
    assert meta["mirror"] is False


def test_replay_setpoint_uses_nearest_goal(tmp_path):
    _, out = train(tmp_path, TRIVIAL_YAML)
    code = main(["replay", str(out / "checkpoint_seed3.json"),
                 "--setpoint", "0.05,0,0,0", "--output-dir", str(out)])
    assert code == 0
    meta = artifacts.read_summary(out / "replay_setpoint_seed3.json")
    assert meta["task"] == "setpoint"


def test_replay_unknown_task_fails(tmp_path):
    _, out = train(tmp_path, TRIVIAL_YAML)
    with pytest.raises(SystemExit) as err:
        main(["replay", str(out / "checkpoint_seed3.json"),
              "--task", "bogus", "--tasks", str(out / "tasks_seed3.json")])
    assert err.value.code == 2


def test_replay_feature_dim_mismatch_names_both(tmp_path, capsys):
    _, out = train(tmp_path, TRIVIAL_YAML)
    # hand-build a task list whose recipe needs 5 features
    from tshc.tasks import heading_grid
    artifacts.write_task_list(tmp_path / "grid.json", heading_grid(10, 20))
    with pytest.raises(SystemExit) as err:
        main(["replay", str(out / "checkpoint_seed3.json"),
              "--task", "heading10", "--tasks", str(tmp_path / "grid.json")])
    assert err.value.code == 2
    message = capsys.readouterr().err
    assert "5" in message and "4" in message


def test_plot_from_csv_and_checkpoint(tmp_path):
    _, out = train(tmp_path, TRIVIAL_YAML)
    main(["replay", str(out / "checkpoint_seed3.json"),
          "--task", "freeform", "--tasks", str(out / "tasks_seed3.json"),
          "--output-dir", str(out)])
    svg_path = tmp_path / "plot.svg"
    code = main(["plot", str(out / "replay_freeform_seed3.csv"),
                 "-o", str(svg_path)])
    assert code == 0
    svg = svg_path.read_text()
    assert svg.count("<polyline") == 1
    assert "x [m]" in svg and "y [m]" in svg

    code = main(["plot", "--checkpoint", str(out / "checkpoint_seed3.json"),
                 "--tasks", str(out / "tasks_seed3.json"),
                 "-o", str(svg_path)])
    assert code == 0
    assert svg_path.read_text().count("<polyline") == 1


def test_plot_without_inputs_fails(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["plot", "-o", str(tmp_path / "x.svg")])
    assert err.value.code == 2


def test_setpoint_parsing_accepts_units(tmp_path):
    _, out = train(tmp_path, TRIVIAL_YAML)
    code = main(["replay", str(out / "checkpoint_seed3.json"),
                 "--setpoint", "0,0,10 deg,5 km/h", "--output-dir", str(out)])
    assert code == 0
    with pytest.raises(SystemExit):
        main(["replay", str(out / "checkpoint_seed3.json"),
              "--setpoint", "1,2,3", "--output-dir", str(out)])
