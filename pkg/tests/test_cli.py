import json

import pytest

from starsim.cli import main
from starsim.errors import ConfigError
from starsim.experiments import ExperimentConfig, load_experiment_config, write_atomic


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_pipeline_command(tmp_path, capsys):
    code, out, _ = run(["pipeline", "--out", str(tmp_path)], capsys)
    assert code == 0
    lines = (tmp_path / "pipeline.csv").read_text().splitlines()
    assert lines[0].startswith("# starsim ")
    assert "config=" in lines[0]
    assert lines[1] == "config_id,initial_latency_ns,throughput,stall_cycles,bottleneck"
    assert lines[2].split(",")[1:] == ["24", "32", "0", "none"]
    assert lines[3].split(",")[1:] == ["24", "64", "0", "none"]


def test_reruns_are_byte_identical(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_blocks": 1, "ssd": {"wordlines_per_block": 8}}))
    for d in ("a", "b"):
        assert run(["state-dist", "--config", str(cfg), "--seed", "5", "--out", str(tmp_path / d)],
                   capsys)[0] == 0
    assert (tmp_path / "a" / "state-dist.csv").read_bytes() == (tmp_path / "b" / "state-dist.csv").read_bytes()


def test_different_seed_changes_output(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_blocks": 1, "ssd": {"wordlines_per_block": 8}}))
    for seed in ("1", "2"):
        run(["state-dist", "--config", str(cfg), "--seed", seed, "--out", str(tmp_path / seed)], capsys)
    assert (tmp_path / "1" / "state-dist.csv").read_bytes() != (tmp_path / "2" / "state-dist.csv").read_bytes()


def test_machine_readable_error(tmp_path, capsys):
    code, _, err = run(["lifetime", "--config", str(tmp_path / "missing.json")], capsys)
    assert code != 0
    payload = json.loads(err)
    assert payload["error"] == "config-invalid"


def test_tailcut_on_qlc_is_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_blocks": 1, "ssd": {"wordlines_per_block": 4}}))
    code, _, err = run(["state-dist", "--cell", "qlc", "--mode", "tailcut", "--config", str(cfg),
                        "--out", str(tmp_path)], capsys)
    assert code != 0
    assert json.loads(err)["error"] == "unsupported-mode"


def test_calibrate_uniform_gives_zero_beta(tmp_path, capsys):
    targets = tmp_path / "t.json"
    targets.write_text(json.dumps({"state_ratio": 1.0}))
    code, _, _ = run(["calibrate", "--cell", "tlc", "--targets", str(targets), "--out", str(tmp_path)], capsys)
    assert code == 0
    prof = json.loads((tmp_path / "profile.json").read_text())
    assert prof["beta"] == 0 and prof["beta_pair"] == 0
    assert (tmp_path / "calibrate.csv").read_text().splitlines()[1] == "target,value,achieved,residual"


def test_replay_command(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    trace.write_text("timestamp_us,op,lba,size_bytes\n0,read,0,4096\n10,write,8,8192\n20,read,8,4096\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_blocks": 1, "ssd": {"wordlines_per_block": 8}, "conditions": [[0, 0]]}))
    code, _, err = run(["replay", str(trace), "--cell", "tlc", "--config", str(cfg), "--out", str(tmp_path)],
                       capsys)
    assert code == 0, err
    rows = (tmp_path / "replay.csv").read_text().splitlines()[2:]
    assert [r.split(",")[2] for r in rows] == ["baseline", "tailcut", "star"]


def test_env_overrides_config_and_flags_override_env(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"seed": 1, "cell_type": "tlc"}))
    env = {"STARSIM_SEED": "7", "STARSIM_N_BLOCKS": "3"}
    cfg = load_experiment_config(path, {}, env)
    assert (cfg.seed, cfg.n_blocks, cfg.cell_type) == (7, 3, "tlc")
    cfg = load_experiment_config(path, {"seed": 9}, env)
    assert cfg.seed == 9


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(None, {"bogus": 1}, {})
    with pytest.raises(ConfigError):
        ExperimentConfig(seed=-1)
    with pytest.raises(ConfigError):
        ExperimentConfig(profile=str(tmp_path / "nope.json"))
    with pytest.raises(ConfigError):
        ExperimentConfig(workloads=["video"])


def test_atomic_write_leaves_no_temp(tmp_path):
    write_atomic(tmp_path / "x" / "f.csv", "a\n")
    assert [p.name for p in (tmp_path / "x").iterdir()] == ["f.csv"]


def test_modes_per_cell():
    assert ExperimentConfig(cell_type="qlc").modes() == ["baseline", "star"]
    assert ExperimentConfig(cell_type="tlc").modes() == ["baseline", "tailcut", "star"]
    assert ExperimentConfig(cell_type="tlc", mode="star").modes() == ["baseline", "star"]
