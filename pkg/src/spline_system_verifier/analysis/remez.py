"""Measure of the set where a polynomial stays above a fraction of its maximum."""

from __future__ import annotations

import logging
from typing import List, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-12
IMAG_TOL = 1e-9


def _real_roots(poly: Polynomial, a: float, b: float) -> List[float]:
    if poly.degree() < 1:
        return []
    roots = poly.roots()
    real = roots[np.abs(roots.imag) <= IMAG_TOL * max(1.0, np.abs(roots).max())].real
    return sorted(float(r) for r in real if a < r < b)


def sup_norm(poly: Polynomial, V: Tuple[float, float]) -> float:
    a, b = V
    points = [a, b] + _real_roots(poly.deriv(), a, b)
    return float(np.max(np.abs(poly(np.array(points)))))


def remez_check(
    coeffs: Sequence[float], V: Tuple[float, float], k: int
) -> Tuple[float, bool]:
    """Measure of ``{x in V : |p(x)| >= 8^{-k+1} ||p||_{L^inf(V)}}`` and whether it is ``>= |V|/2``.

    ``coeffs`` are in increasing powers of ``x``. Between consecutive critical
    points ``p`` is monotone, so each of ``p -+ threshold`` has at most one
    root there; roots are located with Brent's method.
    """
    a, b = float(V[0]), float(V[1])
    if not b > a:
        raise ValueError(f"Degenerate interval {V}")
    poly = Polynomial(np.asarray(coeffs, dtype=float)).trim()
    if not np.any(poly.coef):
        return b - a, True
    if poly.degree() > k - 1:
        raise ValueError(f"Polynomial of degree {poly.degree()} exceeds order k={k}")
    top = sup_norm(poly, (a, b))
    threshold = 8.0 ** (-k + 1) * top
    knots = [a] + _real_roots(poly.deriv(), a, b) + [b]
    cuts = [a, b]
    for lo, hi in zip(knots, knots[1:]):
        for shift in (threshold, -threshold):
            f_lo = poly(lo) - shift
            f_hi = poly(hi) - shift
            if f_lo * f_hi < 0.0:
                cuts.append(brentq(lambda x: poly(x) - shift, lo, hi, xtol=ROOT_XTOL))
    cuts = np.unique(cuts)
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    above = np.abs(poly(mids)) >= threshold
    measure = float(np.sum(np.diff(cuts)[above]))
    return measure, measure >= 0.5 * (b - a)


def remez_random_trials(
    rng: np.random.Generator, trials: int, k_max: int = 6
) -> Tuple[int, float]:
    """Random polynomials of order up to ``k_max`` on random intervals.

    Returns the number of failures and the smallest ``measure / |V|`` seen.
    """
    failures = 0
    worst = np.inf
    for _ in range(trials):
        k = int(rng.integers(1, k_max + 1))
        a, b = np.sort(rng.random(2))
        if b - a < 1e-6:
            b = a + 1e-3
        # roots inside V make the check harder than generic coefficients
        roots = a + (b - a) * rng.random(k - 1)
        poly = Polynomial.fromroots(roots) if k > 1 else Polynomial([1.0])
        coeffs = poly.coef * rng.normal()
        measure, passed = remez_check(coeffs, (a, b), k)
        failures += not passed
        worst = min(worst, measure / (b - a))
    if failures:
        logger.error("Remez check failed on %d of %d random polynomials", failures, trials)
    return failures, float(worst)
