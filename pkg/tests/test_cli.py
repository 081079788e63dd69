import csv
import json
import os
import subprocess
import sys

import jsonschema
import pytest

from cstep.cli import main
from cstep.rl.ppo import STATS_FIELDS
from cstep.schemas import EMPMAP, EVAL_REPORT, REACHSET, SNAPSHOT_HEADER
from cstep.rl.snapshot import read_header

SMALL = {
    "system": {"kind": "planar_drone"},
    "map": {"kind": "point_maze"},
    "env": {"max_steps": 40},
    "empowerment": {"n_trajectories": 40, "steps_per_trajectory": 20, "mc_samples": 2000},
    "ppo": {"horizon": 128, "batch_size": 32, "epochs": 1, "hidden": [8, 8], "total_steps": 256,
            "eval_every": 128, "eval_episodes": 2},
    "eval": {"episodes": 3, "seed": 5},
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(SMALL))
    return str(p)


def write_cfg(tmp_path, doc, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_train_writes_artifacts(tmp_path, cfg_path):
    out = tmp_path / "run"
    assert main(["train", "--config", cfg_path, "--seed", "1", "--out", str(out)]) == 0
    assert sorted(os.listdir(out)) == ["resolved_config.json", "snapshot.bin", "stats.csv"]
    rows = list(csv.reader(open(out / "stats.csv")))
    assert tuple(rows[0]) == STATS_FIELDS and len(rows) == 3
    header, _ = read_header((out / "snapshot.bin").read_bytes())
    jsonschema.validate(header, SNAPSHOT_HEADER)
    assert header["seed"] == 1
    # resolved config reproduces itself
    again = tmp_path / "again"
    assert main(["train", "--config", str(out / "resolved_config.json"), "--seed", "1", "--out", str(again)]) == 0
    assert (again / "resolved_config.json").read_bytes() == (out / "resolved_config.json").read_bytes()
    assert (again / "snapshot.bin").read_bytes() == (out / "snapshot.bin").read_bytes()


def test_train_and_eval_are_byte_deterministic(tmp_path, cfg_path, capsys):
    blobs = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        main(["train", "--config", cfg_path, "--seed", "3", "--out", str(out)])
        capsys.readouterr()
        assert main(["eval", "--config", cfg_path, "--snapshot", str(out / "snapshot.bin"),
                     "--out", str(out / "ep.csv")]) == 0
        report = capsys.readouterr().out
        blobs.append(((out / "snapshot.bin").read_bytes(), (out / "stats.csv").read_bytes(),
                      report, (out / "ep.csv").read_bytes()))
    assert blobs[0] == blobs[1]
    doc = json.loads(blobs[0][2])
    jsonschema.validate(doc, EVAL_REPORT)
    assert doc["n_episodes"] == 3


def test_empmap_deterministic_and_schema(tmp_path, cfg_path):
    outs = []
    for k in range(2):
        o = tmp_path / f"m{k}.json"
        assert main(["empmap", "--config", cfg_path, "--grid", "4,3", "--velocity", "0.5,0", "--seed", "2",
                     "--out", str(o)]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    jsonschema.validate(doc, EMPMAP)
    assert len(doc["values"]) == 3 and len(doc["values"][0]) == 4


def test_reachset_deterministic_and_schema(tmp_path, cfg_path):
    outs = []
    for k in range(2):
        o = tmp_path / f"r{k}.json"
        assert main(["reachset", "--config", cfg_path, "--state", "1.0,1.2,0.5,0", "--out", str(o)]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]
    jsonschema.validate(json.loads(outs[0]), REACHSET)


def test_corridor_empmap_draws_map_from_seed(tmp_path):
    p = write_cfg(tmp_path, {"system": {"kind": "planar_drone"}, "map": {"kind": "corridor"},
                             "empowerment": {"n_trajectories": 30, "steps_per_trajectory": 20, "mc_samples": 500}})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["empmap", "--config", p, "--grid", "3", "--seed", "0", "--out", str(a)])
    main(["empmap", "--config", p, "--grid", "3", "--seed", "1", "--out", str(b)])
    assert json.loads(a.read_text())["map"] != json.loads(b.read_text())["map"]


@pytest.mark.parametrize("doc", [
    {"map": {"kind": "point_maze"}},
    {**SMALL, "ppo": {"learnin_rate": 0.1}},
])
def test_config_errors_exit_2(tmp_path, doc, capsys):
    p = write_cfg(tmp_path, doc)
    assert main(["reachset", "--config", p, "--state", "1,1,0,0", "--out", str(tmp_path / "x")]) == 2
    assert "config error" in capsys.readouterr().err


def test_malformed_json_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert main(["train", "--config", str(p), "--out", str(tmp_path / "o")]) == 2


@pytest.mark.parametrize("state", ["1,1,0", "2.0,0.5,0,0"])
def test_bad_state_exit_3(tmp_path, cfg_path, state):
    assert main(["reachset", "--config", cfg_path, "--state", state, "--out", str(tmp_path / "x")]) == 3


def test_bad_velocity_exit_3(tmp_path, cfg_path):
    assert main(["empmap", "--config", cfg_path, "--velocity", "1,2,3", "--out", str(tmp_path / "x")]) == 3


def test_snapshot_dimension_mismatch_exit_3(tmp_path, cfg_path):
    out = tmp_path / "run"
    main(["train", "--config", cfg_path, "--out", str(out)])
    other = write_cfg(tmp_path, {**SMALL, "env": {"max_steps": 40, "lidar": {"beam_count": 8}}})
    assert main(["eval", "--config", other, "--snapshot", str(out / "snapshot.bin")]) == 3


def test_console_entry_point(tmp_path, cfg_path):
    r = subprocess.run([sys.executable, "-m", "cstep.cli", "reachset", "--config", cfg_path, "--state", "1,1",
                        "--out", str(tmp_path / "x")], capture_output=True, text=True)
    assert r.returncode == 3 and "state needs 4" in r.stderr


def test_divergence_exit_4_keeps_last_good_snapshot(tmp_path, cfg_path, monkeypatch):
    import numpy as np
    import cstep.cli as cli
    from cstep.errors import TrainingError
    from cstep.rl.snapshot import load_snapshot

    def diverging(env_cfg, cfg, seed):
        from cstep.rl.ppo import init_actor_critic
        ac = init_actor_critic(env_cfg, cfg, np.random.default_rng(11))
        raise TrainingError("loss is nan", {"last_good_params": [p.copy() for p in ac.params]})
    monkeypatch.setattr(cli, "train", diverging)
    out = tmp_path / "run"
    assert main(["train", "--config", cfg_path, "--out", str(out)]) == 4
    ac, _ = load_snapshot(out / "snapshot.bin")
    assert all(np.all(np.isfinite(p)) for p in ac.params)
