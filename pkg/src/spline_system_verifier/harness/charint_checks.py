import logging
import math
from typing import Dict, List, Optional

import numpy as np

from ..charint import (
    count_large_nested,
    maximal_chains,
    nested_check,
    nested_decay_ratio,
)
from ..gram import fit_geometric_envelope
from ..models import EXACT, TORUS, TRACKED, CheckResult, DecayFit
from ..ortho.estimates import enclosure_samples, random_union, union_integral_ratio
from .ortho_checks import OrthoChecksMixin
from .spline_checks import DOMAINS

logger = logging.getLogger(__name__)

LARGE_FRACTION = 0.5
UNION_SIZE = 4


class CharintChecksMixin(OrthoChecksMixin):
    """Combinatorics of the characteristic intervals."""

    def intervals(self, domain: str):
        return [fn.J for fn in self.system(domain).functions]

    def check_nested_intervals(self) -> CheckResult:
        """Any two characteristic intervals are nested or have disjoint interiors."""
        measured: Dict[str, float] = {}
        detail: List[dict] = []
        for domain in DOMAINS:
            bad = nested_check(self.intervals(domain))
            measured[f"{domain}_bad_pairs"] = float(len(bad))
            detail.extend({"domain": domain, "first": a, "second": b} for a, b in bad)
        passed = not detail
        if not passed:
            logger.error("%d characteristic interval pairs overlap without nesting", len(detail))
        return CheckResult("nested_intervals", EXACT, passed, measured, detail=detail)

    def check_nested_decay(self) -> CheckResult:
        """Geometric shrinking along inclusion chains and counts of large nested intervals."""
        name = "nested_decay"
        rng = self.rng(name)
        measured: Dict[str, float] = {}
        detail: List[dict] = []
        for domain in DOMAINS:
            J_list = self.intervals(domain)
            kappas, constants = [], []
            for pos, chain in enumerate(maximal_chains(J_list)):
                if len(chain) < 3:
                    continue
                C, kappa = nested_decay_ratio(chain)
                kappas.append(kappa)
                constants.append(C)
                detail.append({"domain": domain, "chain": pos, "length": len(chain), "C": C, "kappa": kappa})
            measured[f"{domain}_kappa_max"] = max(kappas, default=None)
            measured[f"{domain}_C_max"] = max(constants, default=None)
            counts = []
            for _ in range(self.config.random_cases):
                a, b = np.sort(rng.random(2))
                if b > a:
                    counts.append(count_large_nested(J_list, (float(a), float(b)), LARGE_FRACTION))
            measured[f"{domain}_large_nested_max"] = float(max(counts, default=0))
        return CheckResult(name, TRACKED, None, measured, detail=detail)

    def enclosure_fit(self) -> Optional[DecayFit]:
        """``|g(x)| |C(x)|`` against the point count of the enclosure, fitted once per run."""
        if not hasattr(self, "_enclosure_fit"):
            dists, mags = [], []
            for fn in self.selected_functions(TORUS):
                d, m = enclosure_samples(fn)
                dists.append(d)
                mags.append(m / fn.norm2)
            self._enclosure_fit = (
                fit_geometric_envelope(np.concatenate(dists), np.concatenate(mags))
                if dists else None
            )
        return self._enclosure_fit

    def check_enclosure_decay(self) -> CheckResult:
        fit = self.enclosure_fit()
        if fit is None:
            return CheckResult("enclosure_decay", TRACKED, None, {})
        return CheckResult(
            "enclosure_decay", TRACKED, None,
            {"q": fit.q, "C": fit.C, "residual": fit.residual}, fit=fit,
        )

    def check_union_integrals(self) -> CheckResult:
        """``int_U |f|^p`` against the enclosure sum for random unions of intervals."""
        name = "union_integrals"
        rng = self.rng(name)
        fit = self.enclosure_fit()
        q_hat = fit.q if fit is not None else None
        measured: Dict[str, float] = {"q_hat": q_hat}
        if q_hat is None or not 0.0 < q_hat < 1.0:
            logger.warning("Enclosure fit q=%s is outside (0, 1); union bound not evaluated", q_hat)
            return CheckResult(name, TRACKED, None, measured)
        for p in self.config.p_list:
            ratios = []
            for fn in self.selected_functions(TORUS):
                U = random_union(rng, UNION_SIZE)
                ratio = union_integral_ratio(fn, U, p, q_hat)
                if math.isfinite(ratio):
                    ratios.append(ratio)
            measured[f"p{p:g}_max"] = max(ratios, default=None)
        return CheckResult(name, TRACKED, None, measured)
