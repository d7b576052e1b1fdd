import logging
from typing import Dict, List

import numpy as np

from ..analysis import (
    SystemSampler,
    cell_nodes,
    domination_check,
    expansion_values,
    hardy_littlewood,
    lambda_sweep,
    lemma_techn_inequalities,
    maximal_partial_sum,
    remez_random_trials,
    square_function,
)
from ..analysis.operators import CELL_ORDER, partial_max
from ..models import EXACT, TRACKED, CheckResult, Expansion
from .charint_checks import CharintChecksMixin
from .spline_checks import DOMAINS
from .unconditionality import unconditionality_trial

logger = logging.getLogger(__name__)

PARSEVAL_TOL = 1e-8
SIGN_TOL = 1e-8
SPIKE_END = 1.0 / 64.0
REFINEMENT_MAX_N = 256
LEVEL_R = 0.5


def spike(x: np.ndarray) -> np.ndarray:
    return (np.asarray(x) < SPIKE_END).astype(float)


class AnalysisChecksMixin(CharintChecksMixin):
    """Square function, maximal functions and sign-change experiments."""

    def _init_analysis_state(self) -> None:
        self._samplers: Dict[str, SystemSampler] = {}
        self._expansions: Dict[str, Expansion] = {}

    def sampler(self, domain: str) -> SystemSampler:
        if domain not in self._samplers:
            self._samplers[domain] = SystemSampler(self.system(domain), self.config.m)
        return self._samplers[domain]

    def expansion(self, domain: str) -> Expansion:
        """Random expansion shared by the analysis checks of one domain."""
        if domain not in self._expansions:
            rng = self.rng(f"expansion_{domain}")
            system = self.system(domain)
            self._expansions[domain] = Expansion(system, rng.standard_normal(system.size))
        return self._expansions[domain]

    def check_remez(self) -> CheckResult:
        name = "remez"
        failures, worst = remez_random_trials(self.rng(name), self.config.remez_trials)
        return CheckResult(
            name, EXACT, failures == 0,
            {"failures": float(failures), "min_measure_fraction": worst,
             "trials": float(self.config.remez_trials)},
        )

    def check_level_set_inclusion(self) -> CheckResult:
        """``[Sf > lam]`` lies inside ``[HL 1_E > 1/2]`` across the threshold sweep."""
        passed = True
        detail: List[dict] = []
        for domain in DOMAINS:
            S = square_function(self.expansion(domain), sampler=self.sampler(domain))
            for sets in lambda_sweep(S, LEVEL_R, self.system(domain).periodic):
                ok = sets.inclusion_holds
                passed = passed and ok
                detail.append(
                    {"domain": domain, "lambda": sets.lam, "measure_E": sets.measure_E,
                     "measure_B": sets.measure_B, "inclusion": ok}
                )
        if not passed:
            logger.error("Level set inclusion failed")
        return CheckResult("level_set_inclusion", EXACT, passed, {"thresholds": float(len(detail))}, detail=detail)

    def check_parseval(self) -> CheckResult:
        """``||Sf||_2^2`` and ``||f||_2^2`` both equal ``sum a_n^2``."""
        worst = 0.0
        for domain in DOMAINS:
            e = self.expansion(domain)
            sampler = self.sampler(domain)
            x, w = cell_nodes(sampler.grid, max(CELL_ORDER, self.config.k))
            x, w = x.ravel(), w.ravel()
            square = sampler.reduce(e.coeffs, x, lambda T: (T ** 2).sum(axis=0))
            total = sampler.reduce(e.coeffs, x, lambda T: T.sum(axis=0))
            target = float(e.coeffs @ e.coeffs)
            worst = max(
                worst,
                abs(float(square @ w) - target) / target,
                abs(float(total ** 2 @ w) - target) / target,
            )
        passed = worst <= PARSEVAL_TOL
        if not passed:
            logger.error("Parseval identity off by %.3e", worst)
        return CheckResult("parseval", EXACT, passed, {"max_relative_error": worst})

    def check_sign_invariance_p2(self) -> CheckResult:
        """At ``p = 2`` every sign change preserves the norm."""
        worst = 0.0
        for domain in DOMAINS:
            report = unconditionality_trial(
                self.system(domain), self.expansion(domain).coeffs, 2.0,
                self.config.trials, self.config.seed, sampler=self.sampler(domain),
            )
            worst = max(worst, abs(report.r_max - 1.0), abs(report.r_min - 1.0), abs(report.r_S - 1.0))
        passed = worst <= SIGN_TOL
        if not passed:
            logger.error("Sign changes at p=2 moved the norm by %.3e", worst)
        return CheckResult("sign_invariance_p2", EXACT, passed, {"max_deviation": worst})

    def check_domination(self) -> CheckResult:
        """Maximal partial sums and projections of a spike against Hardy-Littlewood."""
        measured: Dict[str, float] = {}
        for domain in DOMAINS:
            report = domination_check(self.system(domain), spike, [SPIKE_END], self.config.m)
            measured[f"{domain}_maximal"] = report.ratio_maximal
            measured[f"{domain}_projection"] = report.ratio_projection
            measured[f"{domain}_excluded"] = float(report.excluded)
        return CheckResult("domination", TRACKED, None, measured)

    def check_maximal_l2(self) -> CheckResult:
        """``||Mf||_2 / ||f||_2`` for the random expansion."""
        measured: Dict[str, float] = {}
        for domain in DOMAINS:
            e = self.expansion(domain)
            sampler = self.sampler(domain)
            M = maximal_partial_sum(e, sampler=sampler)
            f = expansion_values(e, sampler=sampler)
            x, w = sampler.nodes.ravel(), sampler.weights.ravel()
            M_nodes = sampler.reduce(e.coeffs, x, partial_max(sampler.block))
            measured[domain] = float(np.sqrt((M_nodes ** 2) @ w) / np.sqrt(e.coeffs @ e.coeffs))
            measured[f"{domain}_pointwise_min"] = float(np.min(M.values - np.abs(f.values)))
        return CheckResult("maximal_l2", TRACKED, None, measured)

    def check_maximal_refinement(self) -> CheckResult:
        """Relative change of the Hardy-Littlewood function when the grid is refined twice over."""
        name = "maximal_refinement"
        if self.config.n > REFINEMENT_MAX_N:
            return CheckResult(name, TRACKED, None, {"skipped": 1.0})
        measured: Dict[str, float] = {}
        for domain in DOMAINS:
            e = self.expansion(domain)
            periodic = self.system(domain).periodic
            coarse_s = self.sampler(domain)
            fine_s = SystemSampler(self.system(domain), 2 * self.config.m)
            coarse = hardy_littlewood(expansion_values(e, sampler=coarse_s), periodic)
            fine = hardy_littlewood(expansion_values(e, sampler=fine_s), periodic)
            on_coarse = np.interp(coarse.grid, fine.grid, fine.values)
            scale = float(np.max(on_coarse))
            measured[domain] = float(np.max(np.abs(on_coarse - coarse.values)) / scale) if scale > 0 else 0.0
        return CheckResult(name, TRACKED, None, measured)

    def check_technical_lemmas(self) -> CheckResult:
        """Both sides of the localisation inequalities on a random interval."""
        name = "technical_lemmas"
        rng = self.rng(name)
        a = 0.25 * float(rng.random())
        V = (a, a + 0.25)
        measured: Dict[str, float] = {"V_start": V[0], "V_end": V[1]}
        for domain in DOMAINS:
            report = lemma_techn_inequalities(
                self.expansion(domain), V, self.config.technical_p, self.config.N_k, m=self.config.m
            )
            measured[f"{domain}_tail_ratio"] = report.lemma_tail_ratio
            measured[f"{domain}_level_ratio"] = report.lemma_level_ratio
            for R, ratio in report.lemma_far_ratios.items():
                measured[f"{domain}_far_R{R:g}"] = ratio
            measured[f"{domain}_vanishing_residual"] = report.vanishing_residual
            measured[f"{domain}_gamma_size"] = float(report.gamma_size)
        return CheckResult(name, TRACKED, None, measured)

    def check_unconditionality(self, p: float) -> CheckResult:
        """Random sign changes and the square function at exponent ``p``."""
        measured: Dict[str, float] = {}
        detail: List[dict] = []
        for domain in DOMAINS:
            report = unconditionality_trial(
                self.system(domain), self.expansion(domain).coeffs, p,
                self.config.trials, self.config.seed, sampler=self.sampler(domain),
            )
            measured[f"{domain}_r_max"] = report.r_max
            measured[f"{domain}_r_min"] = report.r_min
            measured[f"{domain}_r_S"] = report.r_S
            detail.append(
                {"domain": domain, "p": p, "r_max": report.r_max, "r_min": report.r_min,
                 "r_S": report.r_S, "norm_f": report.norm_f, "trials": report.trials}
            )
        return CheckResult(f"unconditionality_p{p:g}", TRACKED, None, measured, detail=detail)
