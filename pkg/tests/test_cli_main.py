import json
from pathlib import Path

import pytest

import main as cli_main
from spline_system_verifier.models import EXACT, CheckResult, VerificationReport
from spline_system_verifier.reporting import emit_report

run_calls = []


def _app_config(tmp_path):
    config = {
        "logging": {"console": False, "file": False},
        "paths": {"output_dir": str(tmp_path / "out")},
        "experiment_defaults": {"k": 2, "n": 12, "trials": 2},
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config), encoding="utf-8")
    return str(cfg_path)


def _dummy_report(config, passed=True):
    return VerificationReport(config.experiment_id, {}, [CheckResult("remez", EXACT, passed)])


@pytest.fixture
def dummy_runs(monkeypatch):
    run_calls.clear()

    def fake_run(config, quick=False, formats=None, app_config=None):
        run_calls.append((config, quick, formats))
        return _dummy_report(config, passed=config.seed != 13)

    def fake_batch(configs, quick=False, formats=None, app_config=None, workers=None):
        return [fake_run(c, quick, formats, app_config) for c in configs]

    monkeypatch.setattr(cli_main, "run_experiment", fake_run)
    monkeypatch.setattr(cli_main, "run_batch", fake_batch)
    return run_calls


def test_run_uses_defaults_and_flags(tmp_path, dummy_runs):
    status = cli_main.main(["-c", _app_config(tmp_path), "run", "--k", "3", "--p", "1.5,3"])
    assert status == cli_main.EXIT_OK
    (config, quick, formats), = dummy_runs
    assert (config.k, config.n, config.trials, config.p_list) == (3, 12, 2, (1.5, 3.0))
    assert config.output_dir == str(tmp_path / "out")
    assert not quick
    assert formats == ("csv", "json")


def test_verify_quick_and_failed_exact_check(tmp_path, dummy_runs):
    status = cli_main.main(["-c", _app_config(tmp_path), "verify", "--quick", "--seed", "13"])
    assert status == cli_main.EXIT_FAILED
    assert dummy_runs[0][1] is True


def test_invalid_config_is_usage_error(tmp_path, dummy_runs):
    assert cli_main.main(["-c", _app_config(tmp_path), "run", "--k", "9"]) == cli_main.EXIT_USAGE
    assert dummy_runs == []


def test_batch_writes_per_experiment_dirs(tmp_path, dummy_runs):
    a = tmp_path / "a.cfg"
    b = tmp_path / "b.cfg"
    a.write_text("family=dyadic\nseed=1\n", encoding="utf-8")
    b.write_text("family=clustered\nseed=2\n", encoding="utf-8")
    status = cli_main.main(
        ["-c", _app_config(tmp_path), "run", "--config", str(a), "--config", str(b), "--format", "xml"]
    )
    assert status == cli_main.EXIT_OK
    dirs = [Path(c.output_dir) for c, _, _ in dummy_runs]
    assert dirs == [tmp_path / "out" / "k2-dyadic-n12-seed1", tmp_path / "out" / "k2-clustered-n12-seed2"]
    assert all(formats == ("xml",) for _, _, formats in dummy_runs)


def test_report_subcommand_reemits_files(tmp_path):
    run_dir = tmp_path / "run"
    report = VerificationReport("k2-dyadic-n12-seed0", {"k": 2}, [CheckResult("remez", EXACT, True, {"failures": 0.0})])
    emit_report(report, "json", run_dir)
    app = _app_config(tmp_path)
    meta = str(run_dir / "meta.json")
    assert cli_main.main(["-c", app, "report", "--meta", meta]) == cli_main.EXIT_OK
    assert (run_dir / "summary.csv").exists()
    assert cli_main.main(["-c", app, "report", "--meta", meta, "--format", "xml", "--out", str(tmp_path / "x")]) == 0
    assert (tmp_path / "x" / "report.xml").exists()
    assert cli_main.main(["-c", app, "report", "--meta", str(tmp_path / "missing.json")]) == cli_main.EXIT_USAGE
