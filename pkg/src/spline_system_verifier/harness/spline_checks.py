import logging
import zlib
from typing import Dict, List

import numpy as np

from ..bspline import (
    SplineBasis,
    coarsened_partition,
    local_coefficient_ratio,
    refinement_matrix,
    stability_ratio,
)
from ..gram import (
    GramSystem,
    decay_samples,
    dual_stability_ratio,
    fit_decay,
    projection_infinity_norm,
)
from ..knots import insert_point, partition_for
from ..models import (
    EXACT,
    INTERVAL,
    TORUS,
    TRACKED,
    CheckResult,
    ExperimentConfig,
    KnotSequence,
    OrthoSystem,
)
from ..ortho import build_system
from .generators import generate_sequence

logger = logging.getLogger(__name__)

DOMAINS = (INTERVAL, TORUS)
BOEHM_POINTS = 1000
BOEHM_TOL = 1e-12
# local ratios visit every basis function; a couple of vectors is enough
LOCAL_CASES = 2


class SplineChecksMixin:
    """Shared experiment state and the B-spline and Gram matrix checks."""

    config: ExperimentConfig

    def _init_state(self) -> None:
        self._sequences: Dict[str, KnotSequence] = {}
        self._systems: Dict[str, OrthoSystem] = {}
        self._grams: Dict[str, GramSystem] = {}

    def rng(self, name: str) -> np.random.Generator:
        """Generator owned by one check, so checks do not depend on run order."""
        return np.random.default_rng([self.config.seed, zlib.crc32(name.encode("utf-8"))])

    def sequence(self, domain: str) -> KnotSequence:
        if domain not in self._sequences:
            cfg = self.config
            self._sequences[domain] = generate_sequence(
                cfg.family, cfg.n, cfg.seed, cfg.k, domain, cfg.sequence_file
            )
        return self._sequences[domain]

    def system(self, domain: str) -> OrthoSystem:
        if domain not in self._systems:
            self._systems[domain] = build_system(self.sequence(domain))
        return self._systems[domain]

    def final_gram(self, domain: str) -> GramSystem:
        if domain not in self._grams:
            self._grams[domain] = GramSystem(SplineBasis(partition_for(self.sequence(domain))))
        return self._grams[domain]

    def check_boehm_identity(self) -> CheckResult:
        """Coarse B-splines against the refinement table applied to the fine ones."""
        name = "boehm_identity"
        rng = self.rng(name)
        detail: List[dict] = []
        worst = 0.0
        for domain in DOMAINS:
            seq = self.sequence(domain)
            lowest = seq.order_k + 2 if domain == TORUS else 1
            if len(seq) < lowest:
                continue
            for case in range(self.config.random_cases):
                m = int(rng.integers(lowest, len(seq) + 1))
                _, i0 = insert_point(seq.prefix(m - 1), seq.points[m - 1])
                fine = SplineBasis(partition_for(seq.prefix(m)))
                coarse = SplineBasis(coarsened_partition(fine.partition, i0))
                x = rng.random(BOEHM_POINTS)
                R = refinement_matrix(fine, i0)
                direct = coarse.collocation(x).toarray()
                refined = fine.collocation(x).toarray() @ R.T
                error = float(np.abs(direct - refined).max())
                worst = max(worst, error)
                detail.append({"domain": domain, "case": case, "m": m, "i0": i0, "error": error})
        passed = worst <= BOEHM_TOL
        if not passed:
            logger.error("Boehm identity violated: max error %.3e", worst)
        return CheckResult(name, EXACT, passed, {"max_error": worst}, detail=detail)

    def check_bspline_stability(self) -> CheckResult:
        """``||sum a_j N_j||_p`` against the weighted coefficient norm, random ``a``."""
        name = "bspline_stability"
        rng = self.rng(name)
        measured: Dict[str, float] = {}
        detail: List[dict] = []
        for domain in DOMAINS:
            basis = self.final_gram(domain).basis
            for p in self.config.p_list:
                ratios, local = [], []
                for case in range(self.config.random_cases):
                    a = rng.standard_normal(basis.dimension)
                    ratios.append(stability_ratio(basis, a, p))
                    if case < LOCAL_CASES:
                        local.append(local_coefficient_ratio(basis, a, p))
                    detail.append(
                        {"domain": domain, "p": p, "case": case,
                         "ratio": ratios[-1]}
                    )
                measured[f"{domain}_p{p:g}_min"] = min(ratios)
                measured[f"{domain}_p{p:g}_max"] = max(ratios)
                measured[f"{domain}_p{p:g}_local_max"] = max(local)
        return CheckResult(name, TRACKED, None, measured, detail=detail)

    def check_dual_stability(self) -> CheckResult:
        name = "dual_stability"
        rng = self.rng(name)
        measured: Dict[str, float] = {}
        for domain in DOMAINS:
            gram = self.final_gram(domain)
            for p in self.config.p_list:
                ratios = [
                    dual_stability_ratio(gram, rng.standard_normal(gram.dimension), p)
                    for _ in range(self.config.random_cases)
                ]
                measured[f"{domain}_p{p:g}_min"] = min(ratios)
                measured[f"{domain}_p{p:g}_max"] = max(ratios)
        return CheckResult(name, TRACKED, None, measured)

    def check_gram_decay(self, domain: str) -> CheckResult:
        """Geometric decay of the scaled inverse Gram entries."""
        gram = self.final_gram(domain)
        fit = fit_decay(gram)
        dist, mags = decay_samples(gram)
        detail = [
            {"distance": int(d), "max_scaled_entry": float(mags[dist == d].max())}
            for d in np.unique(dist)
        ]
        return CheckResult(
            f"gram_decay_{domain}", TRACKED, None,
            {"q": fit.q, "C": fit.C, "residual": fit.residual, "mode_dense": float(gram.mode == "dense")},
            fit=fit, detail=detail,
        )

    def check_projection_norm(self) -> CheckResult:
        measured = {
            domain: projection_infinity_norm(self.final_gram(domain), self.config.projection_points)
            for domain in DOMAINS
        }
        return CheckResult("projection_norm", TRACKED, None, measured)
