"""Experiment runner: builds both systems of one knot sequence and runs the check battery."""

import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from ..models import (
    EXACT,
    INTERVAL,
    TORUS,
    TRACKED,
    CheckResult,
    ExperimentConfig,
    VerificationReport,
)
from ..reporting import DEFAULT_FORMATS, emit_report
from ..validator import XMLValidationError
from .analysis_checks import AnalysisChecksMixin
from .generators import FAMILIES, generate_sequence
from .unconditionality import sign_pattern, unconditionality_trial

logger = logging.getLogger(__name__)

CheckEntry = Tuple[str, str, Callable[[], CheckResult]]


class ExperimentRunner(AnalysisChecksMixin):
    """Run every check of one experiment configuration."""

    def __init__(self, config: ExperimentConfig, app_config: Optional[Dict[str, Any]] = None):
        self.config = config
        self.app_config = app_config or {}
        self._init_state()
        self._init_analysis_state()
        logger.info("ExperimentRunner initialized for %s", config.experiment_id)

    def environment(self) -> Dict[str, Any]:
        cfg = self.config
        return {
            "k": cfg.k,
            "n": cfg.n,
            "family": cfg.family,
            "seed": cfg.seed,
            "p_list": list(cfg.p_list),
            "trials": cfg.trials,
            "m": cfg.m,
            "N_k": cfg.N_k,
        }

    def battery(self, quick: bool = False) -> List[CheckEntry]:
        """``(name, tier, check)`` triples; ``quick`` keeps the exact tier only."""
        checks: List[CheckEntry] = [
            ("orthogonality_interval", EXACT, partial(self.check_orthogonality, INTERVAL)),
            ("orthogonality_torus", EXACT, partial(self.check_orthogonality, TORUS)),
            ("alpha_recursion", EXACT, self.check_alpha_recursion),
            ("boehm_identity", EXACT, self.check_boehm_identity),
            ("oracle_equivalence", EXACT, self.check_oracle_equivalence),
            ("periodic_comparison", EXACT, self.check_periodic_comparison),
            ("nested_intervals", EXACT, self.check_nested_intervals),
            ("remez", EXACT, self.check_remez),
            ("level_set_inclusion", EXACT, self.check_level_set_inclusion),
            ("parseval", EXACT, self.check_parseval),
            ("sign_invariance_p2", EXACT, self.check_sign_invariance_p2),
        ]
        if quick:
            return checks
        checks += [
            ("bspline_stability", TRACKED, self.check_bspline_stability),
            ("dual_stability", TRACKED, self.check_dual_stability),
            ("gram_decay_interval", TRACKED, partial(self.check_gram_decay, INTERVAL)),
            ("gram_decay_torus", TRACKED, partial(self.check_gram_decay, TORUS)),
            ("projection_norm", TRACKED, self.check_projection_norm),
            ("coefficient_decay_interval", TRACKED, partial(self.check_coefficient_decay, INTERVAL)),
            ("coefficient_decay_torus", TRACKED, partial(self.check_coefficient_decay, TORUS)),
            ("norm_equivalence_interval", TRACKED, partial(self.check_norm_equivalence, INTERVAL)),
            ("norm_equivalence_torus", TRACKED, partial(self.check_norm_equivalence, TORUS)),
            ("tail_decay", TRACKED, self.check_tail_decay),
            ("nested_decay", TRACKED, self.check_nested_decay),
            ("enclosure_decay", TRACKED, self.check_enclosure_decay),
            ("union_integrals", TRACKED, self.check_union_integrals),
            ("domination", TRACKED, self.check_domination),
            ("maximal_l2", TRACKED, self.check_maximal_l2),
            ("maximal_refinement", TRACKED, self.check_maximal_refinement),
            ("technical_lemmas", TRACKED, self.check_technical_lemmas),
        ]
        checks += [
            (f"unconditionality_p{p:g}", TRACKED, partial(self.check_unconditionality, p))
            for p in self.config.p_list
        ]
        return checks

    def run(self, quick: bool = False) -> VerificationReport:
        report = VerificationReport(self.config.experiment_id, self.environment())
        for name, tier, check in self.battery(quick):
            logger.info("Running check %s", name)
            try:
                result = check()
            except Exception as e:
                logger.error("Check %s raised: %s", name, e, exc_info=True)
                result = CheckResult(
                    name, tier, False if tier == EXACT else None, {},
                    detail=[{"error": f"{type(e).__name__}: {e}"}],
                )
            report.checks.append(result)
            logger.info("Check %s: %s", result.name, result.status)
        if report.failed_exact:
            logger.error("Failed exact checks: %s", ", ".join(report.failed_exact))
        else:
            logger.info("All exact checks passed for %s", self.config.experiment_id)
        return report


def run_experiment(
    config: ExperimentConfig,
    quick: bool = False,
    formats: Sequence[str] = DEFAULT_FORMATS,
    app_config: Optional[Dict[str, Any]] = None,
) -> VerificationReport:
    """Run one experiment and write its reports into ``config.output_dir``."""
    app_config = app_config or {}
    report = ExperimentRunner(config, app_config).run(quick)
    schema = app_config.get("paths", {}).get("report_schema")
    for fmt in formats:
        try:
            written = emit_report(report, fmt, config.output_dir, schema)
            logger.info("OK: %s report written: %s", fmt, ", ".join(str(p) for p in written))
        except (OSError, XMLValidationError) as e:
            logger.error("FAIL: %s report for %s: %s", fmt, config.experiment_id, e)
            report.io_errors.append(f"{fmt}: {e}")
    return report


def run_batch(
    configs: Sequence[ExperimentConfig],
    quick: bool = False,
    formats: Sequence[str] = DEFAULT_FORMATS,
    app_config: Optional[Dict[str, Any]] = None,
    workers: Optional[int] = None,
) -> List[VerificationReport]:
    """Run independent experiments in a process pool; results keep the input order."""
    task = partial(run_experiment, quick=quick, formats=formats, app_config=app_config)
    if workers == 1 or len(configs) <= 1:
        return [task(cfg) for cfg in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, configs))


__all__ = [
    "FAMILIES",
    "ExperimentRunner",
    "generate_sequence",
    "run_batch",
    "run_experiment",
    "sign_pattern",
    "unconditionality_trial",
]
