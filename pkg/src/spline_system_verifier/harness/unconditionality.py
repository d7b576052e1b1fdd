"""Random sign changes of orthonormal spline expansions."""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from ..analysis import SystemSampler, cell_nodes
from ..analysis.operators import CELL_ORDER
from ..models import OrthoSystem, UnconditionalityReport

logger = logging.getLogger(__name__)

TRIAL_CHUNK = 64


def sign_pattern(seed: int, trial: int, size: int) -> np.ndarray:
    """Signs of one trial; a Philox stream keyed by the seed, counter set by the trial.

    Trials therefore do not depend on each other or on evaluation order.
    """
    bitgen = np.random.Philox(key=seed, counter=[0, trial, 0, 0])
    bits = np.random.Generator(bitgen).integers(0, 2, size=size)
    return 2.0 * bits - 1.0


def unconditionality_trial(
    system: OrthoSystem,
    coeffs: np.ndarray,
    p: float,
    trials: int,
    seed: int,
    m: int = 8,
    sampler: Optional[SystemSampler] = None,
) -> UnconditionalityReport:
    """``max/min ||sum e_n a_n f_n||_p / ||f||_p`` over random signs and ``||Sf||_p / ||f||_p``.

    Integrals use Gauss rules of order ``max(4, k)`` on every analysis cell,
    exact for ``p = 2``.
    """
    if not 1.0 < p < math.inf:
        raise ValueError(f"Exponent must lie in (1, inf), got {p}")
    if trials < 1:
        raise ValueError(f"At least one trial is needed, got {trials}")
    coeffs = np.asarray(coeffs, dtype=float)
    sampler = sampler or SystemSampler(system, m)
    x, w = cell_nodes(sampler.grid, max(CELL_ORDER, system.sequence.order_k))
    x, w = x.ravel(), w.ravel()
    signs = np.stack([sign_pattern(seed, t, len(coeffs)) for t in range(trials)])
    flipped = np.zeros(trials)
    base = 0.0
    square = 0.0
    for sl, F in sampler.chunks(x):
        terms = coeffs[:, None] * F
        base += float(np.abs(terms.sum(axis=0)) ** p @ w[sl])
        square += float(np.sqrt((terms ** 2).sum(axis=0)) ** p @ w[sl])
        for t0 in range(0, trials, TRIAL_CHUNK):
            rows = slice(t0, min(t0 + TRIAL_CHUNK, trials))
            values = (signs[rows] * coeffs[None, :]) @ F
            flipped[rows] += np.abs(values) ** p @ w[sl]
    if base <= 0.0:
        raise ValueError("The expansion vanishes; ratios are undefined")
    norm_f = base ** (1.0 / p)
    ratios = flipped ** (1.0 / p) / norm_f
    report = UnconditionalityReport(
        p=p,
        r_max=float(ratios.max()),
        r_min=float(ratios.min()),
        r_S=square ** (1.0 / p) / norm_f,
        norm_f=norm_f,
        trials=trials,
    )
    logger.debug(
        "Sign changes p=%g: r_max=%.6g r_min=%.6g r_S=%.6g",
        p, report.r_max, report.r_min, report.r_S,
    )
    return report
