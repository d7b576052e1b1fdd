# -*- coding: utf-8 -*-
"""Command-line interface for splinesys.

Run it from the project root::

    python src/main.py run --config config_rules/quick.cfg
    python src/main.py run --k 3 --family clustered --n 64 --p 1.5,3 --out data/experiments/k3
    python src/main.py verify --quick --k 2 --n 32
    python src/main.py report --meta data/experiments/k3/meta.json --format xml

``run`` executes the whole check battery of each experiment, ``verify --quick``
keeps the exact tier only and ``report`` re-emits the files of a finished run
from its ``meta.json``. The exit status is 1 when an exact check fails or a
report file cannot be written, and 2 for an invalid experiment configuration.
"""

import argparse
import dataclasses
import logging
from pathlib import Path
from typing import Any, Dict, List

from spline_system_verifier.config import (
    ConfigError,
    experiment_config_from_mapping,
    load_config,
    load_experiment_config,
)
from spline_system_verifier.harness import run_batch, run_experiment
from spline_system_verifier.logger import setup_logger
from spline_system_verifier.models import ExperimentConfig
from spline_system_verifier.reporting import (
    DEFAULT_FORMATS,
    FORMATS,
    emit_report,
    load_report,
)
from spline_system_verifier.validator import XMLValidationError

DEFAULT_CONFIG_FILE = "config_rules/config.json"
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# CLI flag -> ExperimentConfig field
_FLAG_FIELDS = {
    "k": "k",
    "family": "family",
    "n": "n",
    "p": "p_list",
    "trials": "trials",
    "seed": "seed",
    "out": "output_dir",
    "m": "m",
    "sequence_file": "sequence_file",
}


def _add_experiment_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--config",
        action="append",
        metavar="PATH",
        help=(
            "Flat key=value experiment config. Repeat to run a batch; each "
            "experiment then writes into <out>/<experiment id>."
        ),
    )
    sub.add_argument("--k", type=int, help="Spline order.")
    sub.add_argument("--family", help="Knot-sequence family.")
    sub.add_argument("--n", type=int, help="Number of generated points.")
    sub.add_argument("--p", help="Comma separated exponents, e.g. 1.5,3.")
    sub.add_argument("--trials", type=int, help="Random sign patterns per exponent.")
    sub.add_argument("--seed", type=int, help="Master seed.")
    sub.add_argument("--m", type=int, help="Grid refinement per cell.")
    sub.add_argument("--sequence-file", help="Knot file for the custom-file family.")
    sub.add_argument("--out", help="Output directory.")
    sub.add_argument(
        "--format",
        action="append",
        choices=FORMATS,
        help=f"Report format; repeat for several (default: {', '.join(DEFAULT_FORMATS)}).",
    )
    sub.add_argument(
        "--workers",
        type=int,
        help="Process-pool size for batches.",
    )


def parse_args(args: list[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments for the CLI.

    Parameters
    ----------
    args : list[str] | None, optional
        Argument list to parse. When ``None`` the values are taken from
        ``sys.argv``.

    Returns
    -------
    argparse.Namespace
        Parsed arguments object.
    """

    parser = argparse.ArgumentParser(
        description="Orthonormal spline system verifier",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "-c",
        "--app-config",
        default=DEFAULT_CONFIG_FILE,
        help="Application configuration JSON (paths, logging, experiment defaults).",
    )
    parser.add_argument(
        "--log-level",
        choices=["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"],
        help="Override logging level from the configuration file.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser(
        "run",
        help="Run the full check battery.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_experiment_options(run)

    verify = commands.add_parser(
        "verify",
        help="Run the check battery; --quick keeps the exact checks only.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_experiment_options(verify)
    verify.add_argument(
        "--quick",
        action="store_true",
        help="Run only the checks that gate the exit status.",
    )

    report = commands.add_parser(
        "report",
        help="Re-emit report files from a meta.json.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    report.add_argument("--meta", required=True, help="meta.json of a finished run.")
    report.add_argument("--format", choices=FORMATS, default="csv", help="Report format.")
    report.add_argument("--out", help="Output directory (default: next to meta.json).")
    return parser.parse_args(args)


def _flag_overrides(cli: argparse.Namespace) -> Dict[str, Any]:
    values = {}
    for flag, field_name in _FLAG_FIELDS.items():
        value = getattr(cli, flag, None)
        if value is not None:
            values[field_name] = value
    return values


def build_configs(cli: argparse.Namespace, app_config: dict) -> List[ExperimentConfig]:
    """Experiment configs from config files and flags; flags win over files.

    Raises
    ------
    ConfigError
        If any resulting configuration is invalid.
    """
    defaults = dict(app_config.get("experiment_defaults", {}))
    output_dir = app_config.get("paths", {}).get("output_dir")
    if output_dir:
        defaults.setdefault("output_dir", output_dir)
    overrides = _flag_overrides(cli)

    if not cli.config:
        return [experiment_config_from_mapping(overrides, defaults)]

    configs = []
    for path in cli.config:
        base = load_experiment_config(path, defaults)
        values = {**dataclasses.asdict(base), **overrides}
        configs.append(experiment_config_from_mapping(values))
    if len(configs) > 1:
        configs = [
            dataclasses.replace(cfg, output_dir=str(Path(cfg.output_dir) / cfg.experiment_id))
            for cfg in configs
        ]
    return configs


def _emit_from_meta(cli: argparse.Namespace, app_config: dict, main_logger: logging.Logger) -> int:
    try:
        report = load_report(cli.meta)
    except (OSError, ValueError, KeyError) as e:
        main_logger.error("Cannot load report %s: %s", cli.meta, e)
        return EXIT_USAGE
    out_dir = cli.out or str(Path(cli.meta).parent)
    schema = app_config.get("paths", {}).get("report_schema")
    try:
        written = emit_report(report, cli.format, out_dir, schema)
    except (OSError, XMLValidationError) as e:
        main_logger.error("FAIL: %s report: %s", cli.format, e)
        return EXIT_FAILED
    main_logger.info("OK: %s report written: %s", cli.format, ", ".join(str(p) for p in written))
    return EXIT_OK


def main(cli_args=None) -> int:
    """Run the verifier using the provided CLI arguments; returns the exit status."""

    cli = parse_args(cli_args)
    config_path = cli.app_config
    app_config = {}
    try:
        app_config = load_config(config_path)
    except Exception as e:
        logging.error("Error loading config: %s", e)
        app_config = {"logging": {}}
    if cli.log_level:
        app_config.setdefault("logging", {})["log_level"] = cli.log_level
    app_config["_config_file_path_"] = config_path
    main_logger = setup_logger(config=app_config)
    main_logger.info("Application starting - %s", cli.command)

    if cli.command == "report":
        return _emit_from_meta(cli, app_config, main_logger)

    try:
        configs = build_configs(cli, app_config)
    except ConfigError as e:
        main_logger.error("Invalid experiment configuration: %s", e)
        return EXIT_USAGE

    quick = cli.command == "verify" and cli.quick
    formats = tuple(dict.fromkeys(cli.format)) if cli.format else DEFAULT_FORMATS
    if len(configs) == 1:
        reports = [run_experiment(configs[0], quick, formats, app_config)]
    else:
        workers = cli.workers or configs[0].batch_workers
        reports = run_batch(configs, quick, formats, app_config, workers)

    status = EXIT_OK
    for report in reports:
        if report.exit_code:
            main_logger.error(
                "FAIL: %s (exact failures: %s; report errors: %d)",
                report.experiment_id,
                ", ".join(report.failed_exact) or "none",
                len(report.io_errors),
            )
            status = EXIT_FAILED
        else:
            main_logger.info("OK: %s", report.experiment_id)
    main_logger.info("Application finished.")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
