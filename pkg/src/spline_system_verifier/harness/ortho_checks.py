import logging
import math
from typing import Dict, List

import numpy as np

from ..gram import fit_geometric_envelope
from ..knots import partition_for
from ..models import EXACT, INTERVAL, TORUS, TRACKED, CheckResult, OrthoFunction
from ..ortho import (
    DegenerateRecursionError,
    OrthogonalityLossError,
    UnsupportedPartitionError,
    alpha_closed_form,
    alpha_recursion,
    centred_alpha_identity,
    compare_periodic_nonperiodic,
    comparison_passes,
    gram_schmidt_oracle,
    system_gram,
)
from ..ortho.estimates import (
    NORM_EXPONENTS,
    coefficient_decay_samples,
    norm_profile,
    periodic_coefficient_samples,
    tail_samples,
)
from .spline_checks import DOMAINS, SplineChecksMixin

logger = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-8
RECURSION_TOL = 1e-13
ORACLE_TOL = 1e-8
ORACLE_MAX_N = 128
COMPARISON_TOL = 1e-10


class OrthoChecksMixin(SplineChecksMixin):
    """Checks on the orthonormal functions themselves."""

    def selected_functions(self, domain: str) -> List[OrthoFunction]:
        """Up to ``random_cases`` functions with an interval, evenly spread over the system."""
        fns = [fn for fn in self.system(domain).functions if fn.J is not None]
        if not fns:
            return []
        count = min(self.config.random_cases, len(fns))
        picks = np.unique(np.linspace(0, len(fns) - 1, count).round().astype(int))
        return [fns[i] for i in picks]

    def check_orthogonality(self, domain: str) -> CheckResult:
        name = f"orthogonality_{domain}"
        system = self.system(domain)
        G = system_gram(system)
        residual = float(np.abs(G - np.eye(system.size)).max())
        passed = residual <= ORTHOGONALITY_TOL
        if passed:
            logger.info("%s: max |<f_n, f_m> - delta| = %.3e", name, residual)
        else:
            logger.error("%s failed: max |<f_n, f_m> - delta| = %.3e", name, residual)
        detail = [
            {"row": r, "max_residual": float(np.abs(G[r] - np.eye(system.size)[r]).max())}
            for r in range(system.size)
        ]
        return CheckResult(name, EXACT, passed, {"max_residual": residual, "size": float(system.size)}, detail=detail)

    def check_alpha_recursion(self) -> CheckResult:
        """Closed form against the two-term recursion on random prefixes and knots."""
        name = "alpha_recursion"
        rng = self.rng(name)
        worst = 0.0
        skipped = 0
        for domain in DOMAINS:
            seq = self.sequence(domain)
            k = seq.order_k
            lowest = 2 * k if domain == TORUS else 1
            if len(seq) < lowest:
                continue
            for _ in range(self.config.random_cases):
                part = partition_for(seq.prefix(int(rng.integers(lowest, len(seq) + 1))))
                i0 = int(rng.integers(0, part.n))
                closed = alpha_closed_form(part, i0)
                try:
                    recursive = alpha_recursion(part, i0)
                except DegenerateRecursionError:
                    skipped += 1
                    continue
                scale = float(np.abs(closed).max())
                worst = max(worst, float(np.abs(closed - recursive).max()) / scale)
        passed = worst <= RECURSION_TOL
        if not passed:
            logger.error("Alpha recursion differs from the closed form by %.3e", worst)
        return CheckResult(name, EXACT, passed, {"max_relative_difference": worst, "skipped": float(skipped)})

    def check_oracle_equivalence(self) -> CheckResult:
        """Systems agree with modified Gram-Schmidt up to sign."""
        name = "oracle_equivalence"
        if self.config.n > ORACLE_MAX_N:
            return CheckResult(name, EXACT, None, {"skipped": 1.0})
        worst = 0.0
        detail: List[dict] = []
        for domain in DOMAINS:
            built = self.system(domain)
            try:
                oracle = gram_schmidt_oracle(self.sequence(domain))
            except OrthogonalityLossError as e:
                logger.error("Oracle aborted on %s: %s", domain, e)
                return CheckResult(name, EXACT, False, {"max_deviation": math.inf})
            for fn, ref in zip(built.functions, oracle.functions):
                c = fn.coefficients
                deviation = float(min(np.abs(c - ref.w).max(), np.abs(c + ref.w).max()))
                worst = max(worst, deviation)
                detail.append({"domain": domain, "n": fn.index_n, "deviation": deviation})
        passed = worst <= ORACLE_TOL
        if not passed:
            logger.error("Oracle deviation %.3e exceeds %.1e", worst, ORACLE_TOL)
        return CheckResult(name, EXACT, passed, {"max_deviation": worst}, detail=detail)

    def check_periodic_comparison(self) -> CheckResult:
        """Dual coefficients of periodic and split functions agree off the boundary."""
        name = "periodic_comparison"
        rng = self.rng(name)
        seq = self.sequence(TORUS)
        k = seq.order_k
        lowest = 2 * k + 2
        detail: List[dict] = []
        passed = True
        spread = off = 0.0
        ratios: List[float] = []
        centred: List[float] = []
        if len(seq) >= lowest:
            for case in range(self.config.random_cases):
                part = partition_for(seq.prefix(int(rng.integers(lowest, len(seq) + 1))))
                i0 = int(rng.integers(0, part.n))
                report = compare_periodic_nonperiodic(part, i0)
                ok = comparison_passes(report, COMPARISON_TOL)
                passed = passed and ok
                spread = max(spread, report.ratio_spread)
                off = max(off, report.max_offB_residual / report.norm_g)
                ratios.append(report.ratio_J)
                try:
                    diff, _ = centred_alpha_identity(part, i0)
                    centred.append(diff)
                except UnsupportedPartitionError:
                    pass
                detail.append(
                    {"case": case, "n": part.n, "i0": i0, "c": report.c,
                     "ratio_spread": report.ratio_spread,
                     "offB_residual": report.max_offB_residual,
                     "boundary_beta": report.max_boundary_beta,
                     "ratio_J": report.ratio_J, "passed": ok}
                )
        if not passed:
            logger.error("Periodic comparison failed: spread %.3e, off-boundary %.3e", spread, off)
        measured = {
            "max_ratio_spread": spread,
            "max_offB_residual": off,
            "ratio_J_min": min(ratios, default=None),
            "ratio_J_max": max(ratios, default=None),
            "centred_alpha_difference": max(centred, default=None),
        }
        return CheckResult(name, EXACT, passed, measured, detail=detail)

    def check_coefficient_decay(self, domain: str) -> CheckResult:
        """Decay of the primal coefficients away from the inserted knot."""
        sampler = coefficient_decay_samples if domain == INTERVAL else periodic_coefficient_samples
        dists, mags = [], []
        for fn in self.selected_functions(domain):
            d, m = sampler(fn)
            dists.append(d)
            mags.append(m / fn.norm2)
        if not dists:
            return CheckResult(f"coefficient_decay_{domain}", TRACKED, None, {})
        dist = np.concatenate(dists)
        mag = np.concatenate(mags)
        fit = fit_geometric_envelope(dist, mag)
        detail = [
            {"distance": int(d), "max_magnitude": float(mag[dist == d].max())}
            for d in np.unique(dist)
        ]
        return CheckResult(
            f"coefficient_decay_{domain}", TRACKED, None,
            {"q": fit.q, "C": fit.C, "residual": fit.residual}, fit=fit, detail=detail,
        )

    def check_norm_equivalence(self, domain: str) -> CheckResult:
        """``||g||_p |J|^{1-1/p}`` and its restriction to ``J`` over the selected functions."""
        exponents = sorted(set(NORM_EXPONENTS) | set(self.config.p_list))
        values: Dict[float, List[float]] = {p: [] for p in exponents}
        local: Dict[float, List[float]] = {p: [] for p in exponents}
        detail: List[dict] = []
        for fn in self.selected_functions(domain):
            profile = norm_profile(fn, exponents)
            for p, (whole, on_J) in profile.items():
                values[p].append(whole)
                local[p].append(on_J)
                detail.append({"n": fn.index_n, "p": p, "scaled_norm": whole, "scaled_norm_on_J": on_J})
        measured: Dict[str, float] = {}
        for p in exponents:
            if not values[p]:
                continue
            measured[f"p{p:g}_min"] = min(values[p])
            measured[f"p{p:g}_max"] = max(values[p])
            measured[f"p{p:g}_on_J_min"] = min(local[p])
        return CheckResult(f"norm_equivalence_{domain}", TRACKED, None, measured, detail=detail)

    def check_tail_decay(self) -> CheckResult:
        """Scaled ``L^p`` tails of ``f`` outside ``J`` against the distance count."""
        measured: Dict[str, float] = {}
        fits = []
        for p in self.config.p_list:
            dists, mags = [], []
            for fn in self.selected_functions(INTERVAL):
                d, m = tail_samples(fn, p)
                dists.append(d)
                mags.append(m)
            if not dists:
                continue
            fit = fit_geometric_envelope(np.concatenate(dists), np.concatenate(mags))
            fits.append(fit)
            measured[f"p{p:g}_q"] = fit.q
            measured[f"p{p:g}_C"] = fit.C
        worst = max(fits, key=lambda f: f.q, default=None)
        return CheckResult("tail_decay", TRACKED, None, measured, fit=worst)
