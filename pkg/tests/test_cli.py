"""Command-line frontend: artifacts, config files, error reporting."""

import json
import math
import os

import pytest

from tlstune import __version__
from tlstune.cli import main
from tlstune.io import (canonical_json, load_environment, load_json, read_csv,
                        validate_document)

SMALL_PLAN = ["--start=-10e3", "--stop=10e3", "--step=2e3"]


@pytest.fixture(scope="module")
def env_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("bath")
    rc = main(["generate-bath", "--out-dir", str(out), "--density", "10",
               "--background", "0.05", "--seed", "3"])
    assert rc == 0
    return str(out / "bath.json")


def run_ok(argv, capsys):
    rc = main(argv)
    captured = capsys.readouterr()
    assert rc == 0, captured.err
    return captured.out


def run_fail(argv, capsys):
    rc = main(argv)
    captured = capsys.readouterr()
    assert rc == 1
    return json.loads(captured.err)


# ------------------------------------------------------------------ plumbing

def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == __version__


def test_generate_bath_writes_loadable_environment(env_file):
    env = load_environment(env_file)
    assert len(env.defects) > 0
    record = load_json(os.path.join(os.path.dirname(env_file),
                                    "generate-bath.record.json"))
    validate_document(record, "run_record")
    assert record["command"] == "generate-bath"
    assert record["result"]["n_defects"] == len(env.defects)


def test_errors_are_machine_readable(tmp_path, capsys):
    err = run_fail(["optimize", "--env", str(tmp_path / "missing.json"),
                    "--qubit-freq", "5.0", "--out-dir", str(tmp_path)],
                   capsys)
    assert err["error"] == "FileNotFoundError"
    assert "missing.json" in err["message"]


# -------------------------------------------------------------- config files

def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"density": 5.0, "seed": 9}))
    run_ok(["generate-bath", "--config", str(cfg), "--out-dir",
            str(tmp_path)], capsys)
    record = load_json(tmp_path / "generate-bath.record.json")
    assert record["config"]["bath"]["defects_per_ghz"] == 5.0
    assert record["config"]["seed"] == 9


def test_explicit_flags_beat_the_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"density": 5.0}))
    run_ok(["generate-bath", "--config", str(cfg), "--density", "7",
            "--out-dir", str(tmp_path)], capsys)
    record = load_json(tmp_path / "generate-bath.record.json")
    assert record["config"]["bath"]["defects_per_ghz"] == 7.0


def test_unknown_config_keys_are_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus_key": 1}))
    err = run_fail(["generate-bath", "--config", str(cfg), "--out-dir",
                    str(tmp_path)], capsys)
    assert err["error"] == "ConfigError"
    assert "bogus_key" in err["message"]


# ------------------------------------------------------------- spectroscopy

def test_spectroscopy_raster_artifacts(env_file, tmp_path, capsys):
    run_ok(["spectroscopy", "--env", env_file, "--out-dir", str(tmp_path),
            "--freqs", "4.9:5.1:5", "--fields", "0:10e3:3",
            "--hold-time", "10"], capsys)
    comment, header, rows = read_csv(tmp_path / "spectroscopy.csv")
    assert header[0] == "freq_ghz"
    assert len(header) == 1 + 3
    assert len(rows) == 5
    record = load_json(tmp_path / "spectroscopy.record.json")
    validate_document(record, "run_record")
    assert record["result"]["shape"] == [3, 5]
    assert 0.0 <= record["result"]["min_population"] <= 1.0
    assert record["config_hash"] in comment


# ----------------------------------------------------------------- optimize

def test_optimize_artifacts(env_file, tmp_path, capsys):
    out = run_ok(["optimize", "--env", env_file, "--qubit-freq", "5.0",
                  "--out-dir", str(tmp_path), *SMALL_PLAN,
                  "--shots", "300", "--seed", "2"], capsys)
    assert "chosen field" in out
    _, header, rows = read_csv(tmp_path / "coarse_sweep.csv")
    assert header == ["field_v_per_m", "t1_us", "smoothed_t1_us"]
    assert len(rows) >= 8
    _, header, fine_rows = read_csv(tmp_path / "fine_sweep.csv")
    assert header == ["field_v_per_m", "t1_us"]
    assert len(fine_rows) >= 1
    record = load_json(tmp_path / "optimize.record.json")
    validate_document(record, "run_record")
    chosen = record["result"]["chosen_field"]
    assert -10e3 - 4e3 <= chosen <= 10e3 + 4e3
    assert record["result"]["passes"] == 2


# ---------------------------------------------------------------- benchmark

def test_benchmark_artifacts(env_file, tmp_path, capsys):
    run_ok(["benchmark", "--env", env_file, "--qubit-freq", "5.0",
            "--out-dir", str(tmp_path), "--window", "60", "--interval", "20",
            *SMALL_PLAN, "--shots", "300", "--seed", "5"], capsys)
    _, header, rows = read_csv(tmp_path / "benchmark_series.csv")
    assert header == ["t_s", "t1_reference_us", "t1_optimized_us"]
    assert len(rows) == 3
    assert [r[0] for r in rows] == ["0.0", "20.0", "40.0"]
    _, header, _ = read_csv(tmp_path / "gain_series.csv")
    assert header == ["t_s", "instantaneous_gain", "average_gain"]
    record = load_json(tmp_path / "benchmark.record.json")
    validate_document(record, "run_record")
    assert isinstance(record["result"]["mean_gain"], (float, type(None)))
    assert record["result"]["optimization_ok"] is True


# ----------------------------------------------------------------- campaign

def run_small_campaign(out_dir, capsys, seed="11"):
    return run_ok(["campaign", "--out-dir", str(out_dir), "--density", "10",
                   "--background", "0.05", "--freq-band", "4.9:5.1",
                   "--n-freqs", "2", "--window", "60", "--interval", "20",
                   *SMALL_PLAN, "--shots", "300", "--seed", seed], capsys)


def strip_metadata(record):
    record = dict(record)
    record.pop("metadata")
    return record


def test_campaign_artifacts(tmp_path, capsys):
    out = run_small_campaign(tmp_path, capsys)
    assert "2 frequencies" in out
    summary = load_json(tmp_path / "campaign_summary.json")
    validate_document(summary, "run_record")
    stats = summary["result"]["stats"]
    assert stats["n_records"] == 2
    assert set(stats) >= {"mean_gain", "fraction_improved",
                          "fraction_gain_gt_10", "fraction_gain_gt_20",
                          "best_gain"}
    for rec in summary["result"]["records"]:
        csv_path = tmp_path / rec["csv"]
        assert csv_path.exists()
        _, header, rows = read_csv(csv_path)
        assert header == ["t_s", "t1_reference_us", "t1_optimized_us"]
        assert len(rows) == 3
    assert (tmp_path / "ensemble_gain.csv").exists()


def test_campaign_reruns_identically(tmp_path, capsys):
    dir_a = tmp_path / "a"
    dir_b = tmp_path / "b"
    run_small_campaign(dir_a, capsys)
    run_small_campaign(dir_b, capsys)
    sum_a = strip_metadata(load_json(dir_a / "campaign_summary.json"))
    sum_b = strip_metadata(load_json(dir_b / "campaign_summary.json"))
    assert canonical_json(sum_a) == canonical_json(sum_b)
    assert (dir_a / "ensemble_gain.csv").read_bytes() \
        == (dir_b / "ensemble_gain.csv").read_bytes()
    assert (dir_a / "records" / "freq_000.csv").read_bytes() \
        == (dir_b / "records" / "freq_000.csv").read_bytes()


def test_report_renders_a_campaign_summary(tmp_path, capsys):
    run_small_campaign(tmp_path, capsys)
    out = run_ok(["report", "--summary",
                  str(tmp_path / "campaign_summary.json"),
                  "--out-dir", str(tmp_path)], capsys)
    assert "mean gain" in out
    assert "improved" in out
    _, header, rows = read_csv(tmp_path / "per_frequency.csv")
    assert header[0] == "qubit_freq_ghz"
    assert len(rows) == 2


def test_report_rejects_other_records(tmp_path, capsys):
    run_ok(["loss-budget", "--out-dir", str(tmp_path)], capsys)
    err = run_fail(["report", "--summary",
                    str(tmp_path / "loss_budget.record.json"),
                    "--out-dir", str(tmp_path)], capsys)
    assert err["error"] == "ValueError"


# -------------------------------------------------------------- loss budget

def test_loss_budget_presets(tmp_path, capsys):
    out = run_ok(["loss-budget", "--out-dir", str(tmp_path)], capsys)
    assert "total" in out
    record = load_json(tmp_path / "loss_budget.record.json")
    validate_document(record, "run_record")
    assert record["result"]["t1_total_ms"] == pytest.approx(6.043, rel=1e-3)

    run_ok(["loss-budget", "--preset", "local", "--out-dir", str(tmp_path)],
           capsys)
    record = load_json(tmp_path / "loss_budget.record.json")
    assert record["result"]["mode"] == "floating"
    assert record["result"]["t1_total_ms"] == pytest.approx(2.357, rel=1e-3)


def test_loss_budget_mode_override_and_sweep(tmp_path, capsys):
    run_ok(["loss-budget", "--mode", "rf_50ohm", "--sweep-area",
            "1e-5:1e-3:5", "--out-dir", str(tmp_path)], capsys)
    record = load_json(tmp_path / "loss_budget.record.json")
    assert record["result"]["impedance_ohm"] == 50.0
    assert record["result"]["area_sweep"]["min_total_ms"] > 0
    _, header, rows = read_csv(tmp_path / "area_sweep.csv")
    assert header == ["area_m2", "t1_radiative_ms", "t1_dielectric_ms",
                      "t1_total_ms"]
    assert len(rows) == 5
    assert not math.isnan(float(rows[0][3]))
