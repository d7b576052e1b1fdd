"""Both sides of the localisation inequalities used in the unconditionality argument.

Only ratios are reported; the inequalities hold up to constants that depend
on ``k`` and ``p`` and have no target values.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from numpy.polynomial import legendre

from ..bspline.quadrature import mapped_nodes, pieces_from_breaks
from ..charint import contains, distance_to_set
from ..models import Expansion, TechnicalReport
from .operators import SystemSampler, level_sets

logger = logging.getLogger(__name__)

FAR_FACTORS = (1.05, 1.1, 1.2)
LEVEL_R = 0.5


def default_test_function(t: np.ndarray) -> np.ndarray:
    return np.cos(6.0 * np.pi * t) + 0.5 * np.sin(2.0 * np.pi * t) + 0.25


def tripled(V: Tuple[float, float]) -> Tuple[float, float]:
    """Interval with the centre of ``V`` and three times its length."""
    a, b = V
    centre = 0.5 * (a + b)
    half = 1.5 * (b - a)
    return centre - half, centre + half


def polynomial_projection(
    values: np.ndarray, x: np.ndarray, w: np.ndarray, V: Tuple[float, float], k: int
) -> np.ndarray:
    """Discrete L2 projection onto polynomials of order ``k`` on ``V`` (values at ``x``)."""
    a, b = V
    t = 2.0 * (x - a) / (b - a) - 1.0
    root = np.sqrt(w)
    A = root[:, None] * legendre.legvander(t, k - 1)
    Q, _ = np.linalg.qr(A)
    return Q @ (Q.T @ (root * values)) / root


def _complement_weights(
    x: np.ndarray, Vt: Tuple[float, float], periodic: bool
) -> np.ndarray:
    lo, hi = Vt
    if hi - lo >= 1.0:
        return np.zeros(len(x), dtype=bool)
    if not periodic:
        return (x < lo) | (x > hi)
    lo_m, hi_m = lo % 1.0, hi % 1.0
    if lo_m <= hi_m:
        return (x < lo_m) | (x > hi_m)
    return (x > hi_m) & (x < lo_m)


def _cells_of(grid: np.ndarray, J: Tuple[float, float]) -> np.ndarray:
    c, d = J
    left, right = grid[:-1], grid[1:]
    if d >= c:
        return (left >= c) & (right <= d)
    return (left >= c) | (right <= d)


def _v_nodes(sampler: SystemSampler, V: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
    pieces = pieces_from_breaks(list(sampler.grid) + list(V), sub=V)
    x, w = mapped_nodes(pieces[:, 0], pieces[:, 1], sampler.partition.k + 7)
    return x.ravel(), w.ravel()


def _tail_ratio(sampler, coeffs, rows, V) -> Optional[float]:
    if not rows:
        return None
    a, b = V
    masked = np.zeros_like(coeffs)
    masked[rows] = coeffs[rows]
    x = sampler.nodes.ravel()
    w = sampler.weights.ravel()
    inside = (x >= a) & (x <= b)
    outside_mass = sampler.reduce(masked, x, lambda T: np.abs(T).sum(axis=0))
    square = sampler.reduce(masked, x, lambda T: np.sqrt((T ** 2).sum(axis=0)))
    rhs = float(np.sum((w * square)[inside]))
    lhs = float(np.sum((w * outside_mass)[~inside]))
    return lhs / rhs if rhs > 0.0 else None


def _level_ratio(sampler, coeffs, late, intervals) -> Optional[float]:
    if not late:
        return None
    masked = np.zeros_like(coeffs)
    masked[late] = coeffs[late]
    S = sampler.grid_function(masked, lambda T: np.sqrt((T ** 2).sum(axis=0)))
    top = float(S.values.max())
    if top <= 0.0:
        return None
    sets = level_sets(S, 0.5 * top, LEVEL_R, sampler.periodic)
    chosen = [
        row for row in late
        if not np.all(sets.B_lambda_r[_cells_of(sampler.grid, intervals[row])])
    ]
    if not chosen:
        return None
    masked = np.zeros_like(coeffs)
    masked[chosen] = coeffs[chosen]
    x = sampler.nodes.ravel()
    w = sampler.weights.ravel()
    sq = sampler.reduce(masked, x, lambda T: (T ** 2).sum(axis=0))
    cell = np.repeat(np.arange(len(sampler.grid) - 1), sampler.nodes.shape[1])
    in_E = sets.E_lambda[cell]
    rhs = float(np.sum((w * sq)[~in_E]))
    lhs = float(np.sum((w * sq)[in_E]))
    return lhs / rhs if rhs > 0.0 else None


def _far_ratios(sampler, V, p, factors, h, with_interval) -> Dict[float, Optional[float]]:
    system = sampler.system
    Vt = tripled(V)
    vx, vw = _v_nodes(sampler, V)
    hv = np.asarray(h(vx), dtype=float)
    norm_p = float(np.sum(vw * np.abs(hv) ** p))
    if norm_p <= 0.0:
        return {R: None for R in factors}
    coeffs = np.zeros(len(sampler.splines))
    for sl, F in sampler.chunks(vx):
        coeffs += F @ (hv[sl] * vw[sl])
    x = sampler.nodes.ravel()
    w = sampler.weights.ravel() * _complement_weights(x, Vt, sampler.periodic)
    tails = np.zeros(len(sampler.splines))
    for sl, F in sampler.chunks(x):
        tails += (np.abs(F) ** p) @ w[sl]
    block = sampler.block
    dists = {}
    for row in with_interval:
        fn = system.functions[row - block]
        dists[row] = distance_to_set(fn.basis.partition, fn.J, V)
    out = {}
    for R in factors:
        lhs = sum(
            R ** (p * d) * abs(coeffs[row]) ** p * tails[row] for row, d in dists.items()
        )
        out[R] = lhs / norm_p
    return out


def _vanishing_residual(sampler, V, h) -> float:
    a, b = V
    vx, vw = _v_nodes(sampler, V)
    hv = np.asarray(h(vx), dtype=float)
    g = hv - polynomial_projection(hv, vx, vw, V, sampler.partition.k)
    g_norm = math.sqrt(float(np.sum(vw * g * g)))
    if g_norm == 0.0:
        return 0.0
    polynomial_rows = [
        r for r, s in enumerate(sampler.splines)
        if not any(a < t < b for t in s.basis.partition.interior())
    ]
    if not polynomial_rows:
        return 0.0
    F = sampler.values(vx)[polynomial_rows]
    return float(np.max(np.abs(F @ (vw * g))) / g_norm)


def lemma_techn_inequalities(
    e: Expansion,
    V: Tuple[float, float],
    p: float = 1.5,
    N_k: Optional[int] = None,
    factors: Iterable[float] = FAR_FACTORS,
    h: Optional[Callable] = None,
    m: int = 8,
) -> TechnicalReport:
    """Ratios of both sides of the three localisation inequalities on ``V``.

    * tail mass outside ``V`` against the square function inside, for the
      functions whose characteristic interval lies in ``V``;
    * ``int_E Sg^2`` against ``int_{E^c} Sg^2`` for the level set
      ``E = [Sf > max Sf / 2]`` and ``r = 1/2``;
    * the weighted far-field sum against ``||f||_p^p`` for ``f = h 1_V``,
      one value per factor ``R``.

    Also reports the largest ``<g_V, f_n>`` over the functions that are
    polynomials on ``V``, where ``g_V`` is ``h`` minus its polynomial
    projection on ``V``.
    """
    factors = tuple(factors)
    a, b = float(V[0]), float(V[1])
    if not 0.0 <= a < b <= 1.0:
        logger.info("Skipping technical estimates on degenerate interval %s", V)
        return TechnicalReport(None, None, {R: None for R in factors}, math.nan, 0, skipped=True)
    V = (a, b)
    system = e.system
    k = system.sequence.order_k
    if N_k is None:
        N_k = max(2 * k + 2, 4 * k)
    h = h or default_test_function
    Vt = tripled(V)
    sampler = SystemSampler(system, m, extra=[a, b, Vt[0] % 1.0, Vt[1] % 1.0])
    block = sampler.block
    periodic = system.periodic
    with_interval = [
        block + i for i, fn in enumerate(system.functions) if fn.J is not None
    ]
    intervals = {row: system.functions[row - block].J.J for row in with_interval}
    late = [
        row for row in with_interval if system.functions[row - block].index_n >= N_k
    ]
    gamma = [row for row in late if contains(V, intervals[row], periodic)]

    report = TechnicalReport(
        lemma_tail_ratio=_tail_ratio(sampler, e.coeffs, gamma, V),
        lemma_level_ratio=_level_ratio(sampler, e.coeffs, late, intervals),
        lemma_far_ratios=_far_ratios(sampler, V, p, factors, h, with_interval),
        vanishing_residual=_vanishing_residual(sampler, V, h),
        gamma_size=len(gamma),
    )
    logger.debug("Technical estimates on %s: %s", V, report)
    return report
