"""End-to-end CLI tests, driving main() the way a shell would."""

import csv
import json
from pathlib import Path

import pytest

from flurrysda.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


@pytest.fixture
def small_sim_config(tmp_path):
    return _write(tmp_path / "sim.yaml", """
population:
  m: 30
  k: 3
  t: 1.0
  r: 0.05
trace:
  epoch_length: 60.0
  sends: {count: 12, spacing: 300.0}
""")


@pytest.fixture
def small_attack_config(tmp_path):
    return _write(tmp_path / "atk.yaml", """
attack:
  bob: 0
  m: 30
  n: 12
  k_hat: 3
  epoch_length: 60.0
""")


def test_simulate_writes_csvs(small_sim_config, tmp_path, capsys):
    out = tmp_path / "sim_out"
    assert main(["simulate", "--config", str(small_sim_config), "--seed", "3",
                 "--out", str(out)]) == 0
    trace_lines = (out / "trace.csv").read_text().splitlines()
    obs_lines = (out / "observed.csv").read_text().splitlines()
    assert trace_lines[0] == "timestamp,sender,recipient,kind"
    assert obs_lines[0] == "timestamp,recipient"
    assert len(trace_lines) == len(obs_lines)
    assert "12 group sends" in capsys.readouterr().out


def test_simulate_deterministic(small_sim_config, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--config", str(small_sim_config), "--seed", "5", "--out", str(out_a)])
    main(["simulate", "--config", str(small_sim_config), "--seed", "5", "--out", str(out_b)])
    assert (out_a / "trace.csv").read_bytes() == (out_b / "trace.csv").read_bytes()
    assert (out_a / "observed.csv").read_bytes() == (out_b / "observed.csv").read_bytes()


def test_attack_recovers_group_from_observed_csv(
    small_sim_config, small_attack_config, tmp_path, capsys
):
    out = tmp_path / "pipeline"
    main(["simulate", "--config", str(small_sim_config), "--seed", "11", "--out", str(out)])
    capsys.readouterr()
    epochs_csv = tmp_path / "epochs.csv"
    assert main([
        "attack", "--log", str(out / "observed.csv"),
        "--config", str(small_attack_config), "--seed", "2",
        "--dump-epochs", str(epochs_csv),
    ]) == 0
    payload = json.loads(capsys.readouterr().out)
    top3 = [u for u, _ in payload["ranked"][:3]]
    assert sorted(top3) == [1, 2, 3]
    assert payload["pairs_processed"] == 12
    assert payload["success"] is None  # ground truth not known to the attacker
    with open(epochs_csv) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["label", "window_start", "window_end", "receiver_ids"]
    assert len(rows) == 1 + 2 * 12  # a target and a random sample per pair


def test_attack_result_file_output(small_sim_config, small_attack_config, tmp_path, capsys):
    out = tmp_path / "pipeline"
    main(["simulate", "--config", str(small_sim_config), "--seed", "11", "--out", str(out)])
    res_dir = tmp_path / "res"
    assert main([
        "attack", "--log", str(out / "observed.csv"),
        "--config", str(small_attack_config), "--out", str(res_dir),
    ]) == 0
    payload = json.loads((res_dir / "attack_result.json").read_text())
    assert payload["config_echo"]["m"] == 30


def test_bound_table_stdout(capsys):
    assert main(["bound", "--m", "1000", "--k", "3", "--t", "1.0", "--r", "0.1",
                 "--confidence", "0.95"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "m,k,t,r,n,C,bound"
    row = lines[1].split(",")
    assert row[:5] == ["1000", "3", "1.0", "0.1", "55"]
    assert float(row[6]) >= 0.95


def test_bound_table_from_config(tmp_path):
    out_file = tmp_path / "bounds.csv"
    assert main(["bound", "--config", str(CONFIGS / "bound_grid.yaml"),
                 "--out", str(out_file)]) == 0
    with open(out_file) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["m", "k", "t", "r", "n", "C", "bound"]
    # 3 m * 3 k * 3 (t,r) * 4 n values (2 explicit + 2 confidence targets)
    assert len(rows) == 1 + 3 * 3 * 3 * 4


def test_experiment_run_with_figures(tmp_path):
    cfg = _write(tmp_path / "exp.yaml", """
experiment:
  mode: ideal
  grid:
    m: [10]
    k: [2]
    t_r: [[1.0, 0.0]]
    n: [1, 2]
  trials: 20
  base_seed: 3
""")
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "trials.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["all_pass"] is True
    assert len(summary["figures"]) == 2  # one rate panel + the overview
    for rel in summary["figures"]:
        assert (out / rel).exists()


def test_experiment_cli_overrides(tmp_path):
    cfg = _write(tmp_path / "exp.yaml", """
experiment:
  mode: ideal
  grid:
    m: [10]
    k: [2]
    t_r: [[1.0, 0.0]]
    n: [1]
  trials: 500
  base_seed: 3
""")
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out", str(out),
                 "--trials", "5", "--seed", "9", "--no-figures"]) == 0
    rows = (out / "trials.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 5
    summary = json.loads((out / "summary.json").read_text())
    assert summary["base_seed"] == 9
    assert summary["figures"] == []


def test_experiment_invalid_plan_errors(tmp_path, capsys):
    cfg = _write(tmp_path / "exp.yaml", """
experiment:
  mode: ideal
  grid:
    m: [10]
    k: [2]
    t_r: [[0.5, 0.5]]
    n: [1]
""")
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 1
    assert "error:" in capsys.readouterr().err


def test_oracle_exact_and_monte_carlo(capsys):
    assert main(["oracle", "--m", "3", "--k", "1", "--t", "1.0", "--r", "0.5",
                 "--n", "2", "--trials", "2000", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "0.65625" in out
    assert "monte carlo" in out


def test_oracle_force_flag(capsys):
    assert main(["oracle", "--m", "3", "--k", "1", "--t", "1.0", "--r", "1.0",
                 "--n", "1", "--force"]) == 0
    assert "0.0" in capsys.readouterr().out


def test_oracle_too_large_is_reported(capsys):
    assert main(["oracle", "--m", "6", "--k", "2", "--t", "1.0", "--r", "0.1",
                 "--n", "4"]) == 1
    assert "error:" in capsys.readouterr().err


def test_report_rerenders_figures(tmp_path):
    cfg = _write(tmp_path / "exp.yaml", """
experiment:
  mode: ideal
  grid:
    m: [10]
    k: [2]
    t_r: [[1.0, 0.0]]
    n: [1]
  trials: 10
""")
    out = tmp_path / "run"
    main(["experiment", "--config", str(cfg), "--out", str(out), "--no-figures"])
    assert not (out / "figures").exists()
    assert main(["report", "--run", str(out)]) == 0
    assert any((out / "figures").iterdir())


def test_repo_example_configs_parse():
    from flurrysda import config as cfgmod

    sim = cfgmod.load_config(CONFIGS / "simulate_small.yaml")
    cfgmod.population_from_dict(sim["population"])
    cfgmod.trace_config_from_dict(sim["trace"])
    atk = cfgmod.load_config(CONFIGS / "attack_default.yaml")
    cfgmod.attack_config_from_dict(atk["attack"])
    for name in ("experiment_ideal.yaml", "experiment_trace.yaml"):
        plan = cfgmod.plan_from_dict(cfgmod.load_config(CONFIGS / name)["experiment"])
        assert plan.cells()
