import json

import pytest

from spline_system_verifier.harness import ExperimentRunner, run_batch, run_experiment
from spline_system_verifier.models import EXACT, TRACKED, ExperimentConfig
from spline_system_verifier.reporting import report_to_dict

EXACT_CHECKS = {
    "orthogonality_interval",
    "orthogonality_torus",
    "alpha_recursion",
    "boehm_identity",
    "oracle_equivalence",
    "periodic_comparison",
    "nested_intervals",
    "remez",
    "level_set_inclusion",
    "parseval",
    "sign_invariance_p2",
}


def _config(tmp_path, **overrides):
    values = dict(
        k=2, family="dyadic", n=10, p_list=(1.5,), seed=3, trials=4, m=2,
        remez_trials=50, random_cases=3, projection_points=8,
        output_dir=str(tmp_path / "out"),
    )
    values.update(overrides)
    return ExperimentConfig(**values)


def test_quick_battery_holds_exact_checks_only(tmp_path):
    runner = ExperimentRunner(_config(tmp_path))
    quick = runner.battery(quick=True)
    assert {name for name, _, _ in quick} == EXACT_CHECKS
    assert all(tier == EXACT for _, tier, _ in quick)
    full = runner.battery()
    assert {name for name, tier, _ in full if tier == EXACT} == EXACT_CHECKS
    assert "unconditionality_p1.5" in {name for name, _, _ in full}


@pytest.mark.parametrize("family", ["dyadic", "uniform-random"])
def test_exact_checks_pass(tmp_path, family):
    report = ExperimentRunner(_config(tmp_path, family=family)).run(quick=True)
    assert report.failed_exact == []
    assert report.exit_code == 0
    assert all(c.status in ("pass", "skipped") for c in report.checks)


def test_full_run_writes_reports(tmp_path):
    cfg = _config(tmp_path)
    report = run_experiment(cfg, formats=("csv", "json", "xml"))
    out = tmp_path / "out"
    assert report.exit_code == 0
    assert (out / "summary.csv").exists()
    assert (out / "meta.json").exists()
    assert (out / "report.xml").exists()
    tracked = [c for c in report.checks if c.tier == TRACKED]
    assert tracked and all(c.passed is None for c in tracked)
    for c in report.checks:
        assert (out / "checks" / f"{c.name}.csv").exists()


def test_runs_are_deterministic(tmp_path):
    first = run_experiment(_config(tmp_path / "a", family="clustered"), quick=True, formats=("json",))
    second = run_experiment(_config(tmp_path / "b", family="clustered"), quick=True, formats=("json",))
    meta_a = (tmp_path / "a" / "out" / "meta.json").read_text(encoding="utf-8")
    meta_b = (tmp_path / "b" / "out" / "meta.json").read_text(encoding="utf-8")
    assert meta_a == meta_b
    assert report_to_dict(first) == report_to_dict(second)
    assert json.loads(meta_a)["experiment_id"] == "k2-clustered-n10-seed3"


def test_check_exception_fails_exact_tier(tmp_path):
    runner = ExperimentRunner(_config(tmp_path))

    def boom():
        raise RuntimeError("broken")

    runner.check_remez = boom
    report = runner.run(quick=True)
    remez = next(c for c in report.checks if c.name == "remez")
    assert remez.passed is False
    assert "RuntimeError" in remez.detail[0]["error"]
    assert report.exit_code == 1


def test_report_write_failure_sets_exit_code(tmp_path, monkeypatch):
    import spline_system_verifier.harness as harness

    def failing_emit(report, fmt, out_dir, schema_path=None):
        raise OSError("disk full")

    monkeypatch.setattr(harness, "emit_report", failing_emit)
    report = run_experiment(_config(tmp_path), quick=True, formats=("csv",))
    assert report.failed_exact == []
    assert report.io_errors == ["csv: disk full"]
    assert report.exit_code == 1


def test_run_batch_keeps_order(tmp_path):
    configs = [
        _config(tmp_path / "one", seed=1, family="uniform-random"),
        _config(tmp_path / "two", seed=2, family="uniform-random"),
    ]
    reports = run_batch(configs, quick=True, formats=("json",), workers=1)
    assert [r.experiment_id for r in reports] == [c.experiment_id for c in configs]
