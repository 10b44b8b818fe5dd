"""Command-line behaviour: parsing, precedence, exit codes, artifacts."""

import json

import pytest

from cryptoflow.cli import main


def run_cli(capsys, *args):
    try:
        code = main(list(args))
    except SystemExit as exc:  # argparse-native exits
        code = exc.code if exc.code is not None else 0
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_unstable_sentiment(capsys):
    code, out, err = run_cli(capsys, "analyze", "--variant", "sentiment3x3",
                             "--q", "2", "--q1", "1", "--tau0", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["params"]["q"] == 2.0
    assert doc["params"]["q1"] == 1.0
    assert doc["params"]["tau0"] == 1.0
    assert doc["params"]["c3"] == 10.0  # untouched default
    assert doc["verdict"]["tag"] == "unstable"
    assert doc["verdict"]["max_real"] > 0.0
    assert doc["closed_form"]["criterion_3x3"]["verdict"] == "unstable"
    assert doc["version"]
    assert doc["eps"] == 1e-8 and doc["band"] == 1e-6


def test_analyze_defaults_to_full_variant(capsys):
    code, out, _ = run_cli(capsys, "analyze")
    assert code == 0
    doc = json.loads(out)
    assert doc["variant"] == "full5x5"
    assert len(doc["jacobian"]) == 5
    assert len(doc["eigenvalues"]) == 5
    assert doc["ignored_fields"] == []


def test_bad_float_token_exits_2(capsys):
    code, _, err = run_cli(capsys, "analyze", "--q", "banana")
    assert code == 2
    assert "banana" in err


def test_missing_verb_exits_2(capsys):
    code, _, _ = run_cli(capsys)
    assert code == 2


def test_version_flag(capsys):
    code, out, _ = run_cli(capsys, "--version")
    assert code == 0


def test_config_supplies_values(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"q": 1.0, "variant": "liquidity2x2"}))
    code, out, _ = run_cli(capsys, "analyze", "--config", str(cfg))
    assert code == 0
    doc = json.loads(out)
    assert doc["variant"] == "liquidity2x2"
    assert doc["params"]["q"] == 1.0


def test_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"q": 1.0}))
    code, out, _ = run_cli(capsys, "analyze", "--config", str(cfg), "--q", "2")
    assert code == 0
    assert json.loads(out)["params"]["q"] == 2.0


@pytest.mark.parametrize(
    "payload",
    [
        {"qq": 1.0},            # unknown key
        {"q": True},            # bool is not a number
        {"seed": 1.5},          # float is not an integer
        {"variant": "bogus"},   # not a variant
        {"format": "yaml"},     # not an export format
    ],
)
def test_bad_config_exits_2(tmp_path, capsys, payload):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps(payload))
    code, _, err = run_cli(capsys, "analyze", "--config", str(cfg))
    assert code == 2
    assert json.loads(err)["error"]


def test_sweep_rejects_inverted_axis(capsys):
    code, _, err = run_cli(capsys, "sweep", "--variant", "liquidity2x2",
                           "--axis1", "q:2:1:5", "--axis2", "tau0:0.1:1:5")
    assert code == 2
    assert json.loads(err)["error"]


def test_sweep_requires_axes(capsys):
    code, _, _ = run_cli(capsys, "sweep")
    assert code == 2


def test_sweep_writes_csv(tmp_path, capsys):
    out_file = tmp_path / "map.csv"
    code, _, _ = run_cli(capsys, "sweep", "--variant", "liquidity2x2",
                         "--tau0", "1", "--axis1", "q:0:2:5",
                         "--axis2", "c_over_tau0:0.5:1.5:3",
                         "--out", str(out_file))
    assert code == 0
    lines = out_file.read_text().strip().split("\n")
    assert lines[0] == "axis1,axis2,max_real_or_margin,verdict"
    assert len(lines) == 16


def test_sweep_infers_json_from_suffix(tmp_path, capsys):
    out_file = tmp_path / "map.json"
    code, _, _ = run_cli(capsys, "sweep", "--variant", "liquidity2x2",
                         "--tau0", "1", "--axis1", "q:0:2:3",
                         "--axis2", "c_over_tau0:0.5:1.5:3",
                         "--out", str(out_file))
    assert code == 0
    doc = json.loads(out_file.read_text())
    assert doc["type"] == "stability_map"
    assert doc["axis1"]["steps"] == 3


def test_verify_clean_run_exits_0(capsys):
    code, out, _ = run_cli(capsys, "verify", "--variant", "liquidity2x2",
                           "-n", "400", "--seed", "7")
    assert code == 0
    doc = json.loads(out)
    assert doc["mismatches"] == 0
    assert doc["criterion"] == "criterion_2x2"
    assert doc["samples"] == 400


def test_verify_pins_explicit_params(capsys):
    code, out, _ = run_cli(capsys, "verify", "--variant", "full5x5",
                           "--q2", "0", "-n", "300")
    assert code == 0
    doc = json.loads(out)
    assert doc["criterion"] == "criterion_5x5_q2zero"
    assert doc["pinned"] == {"q2": 0.0}
    assert doc["simple_condition_agreement"] is not None


def test_simulate_emits_verdict_and_csv(tmp_path, capsys):
    out_file = tmp_path / "traj.csv"
    code, out, _ = run_cli(capsys, "simulate", "--variant", "sentiment3x3",
                           "--q", "0.2", "--q1", "0.2", "--tau0", "1",
                           "--horizon", "50", "--out", str(out_file))
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "stable"
    assert doc["step"] == pytest.approx(1.0 / 20)
    assert out_file.read_text().startswith("t,P,L,zeta1\n")


def test_runtime_error_exits_3(capsys):
    # full-variant spectrum needs tied reaction scales
    code, _, err = run_cli(capsys, "analyze", "--c1", "2")
    assert code == 3
    doc = json.loads(err)
    assert "UnsupportedScaling" in doc["error"]


def test_baseline_report_and_path(tmp_path, capsys):
    out_file = tmp_path / "path.csv"
    code, out, _ = run_cli(capsys, "baseline", "-n", "50", "--seed", "3",
                           "--drop", "0.045", "--out", str(out_file))
    assert code == 0
    doc = json.loads(out)
    assert doc["exceedance"]["k"] == pytest.approx(6.0)
    assert 0.9e9 <= doc["exceedance"]["recurrence_days"] <= 1.1e9
    lines = out_file.read_text().strip().split("\n")
    assert lines[0] == "t,P"
    assert len(lines) == 52


def test_baseline_rejects_zero_drop(capsys):
    code, _, _ = run_cli(capsys, "baseline", "--drop", "0")
    assert code == 2


def test_threads_env_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CRYPTOFLOW_THREADS", "3")
    code, out, _ = run_cli(capsys, "verify", "--variant", "liquidity2x2", "-n", "200")
    assert code == 0
    baseline = json.loads(out)
    monkeypatch.delenv("CRYPTOFLOW_THREADS")
    code, out, _ = run_cli(capsys, "verify", "--variant", "liquidity2x2", "-n", "200")
    assert code == 0
    assert json.loads(out) == baseline


def test_threads_env_must_be_integer(capsys, monkeypatch):
    monkeypatch.setenv("CRYPTOFLOW_THREADS", "many")
    code, _, _ = run_cli(capsys, "verify", "--variant", "liquidity2x2", "-n", "10")
    assert code == 2


def test_nan_survives_json_output(tmp_path, capsys):
    # indeterminate growth fits may produce non-finite numbers; output stays JSON
    code, out, _ = run_cli(capsys, "simulate", "--variant", "sentiment3x3",
                           "--q", "2", "--q1", "1", "--tau0", "1",
                           "--horizon", "50")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "unstable"
