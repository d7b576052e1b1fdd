"""Vectorized helpers for polynomials on the unit interval.

Coefficients are stored in increasing powers of the local variable
``t in [0, 1]``, one polynomial per row.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def interpolation_nodes(count: int) -> np.ndarray:
    """Chebyshev points of the first kind mapped to [0, 1]."""
    j = np.arange(count)
    t = 0.5 - 0.5 * np.cos((2 * j + 1) * np.pi / (2 * count))
    t.flags.writeable = False
    return t


@lru_cache(maxsize=None)
def monomial_map(count: int) -> np.ndarray:
    """Matrix sending values at ``interpolation_nodes(count)`` to coefficients."""
    t = interpolation_nodes(count)
    vander = t[:, None] ** np.arange(count)[None, :]
    inv = np.linalg.inv(vander)
    inv.flags.writeable = False
    return inv


def antiderivative(coeffs: np.ndarray) -> np.ndarray:
    rows, width = coeffs.shape
    out = np.zeros((rows, width + 1))
    out[:, 1:] = coeffs / np.arange(1, width + 1)[None, :]
    return out


def unit_roots(coeffs: np.ndarray, rel_tol: float = 1e-14) -> np.ndarray:
    """Real parts of the roots of every row polynomial that fall in (0, 1).

    Rows are grouped by effective degree and solved through batched companion
    matrices. The result has one column per possible root; unused slots are NaN.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    rows, width = coeffs.shape
    out = np.full((rows, max(width - 1, 0)), np.nan)
    if width < 2:
        return out
    scale = np.abs(coeffs).max(axis=1)
    significant = np.abs(coeffs) > rel_tol * scale[:, None]
    degree = np.where(
        significant.any(axis=1), width - 1 - np.argmax(significant[:, ::-1], axis=1), 0
    )
    for d in range(1, width):
        idx = np.nonzero(degree == d)[0]
        if idx.size == 0:
            continue
        c = coeffs[idx, : d + 1]
        companion = np.zeros((idx.size, d, d))
        companion[:, 1:, :-1] = np.eye(d - 1)
        companion[:, :, -1] = -c[:, :d] / c[:, d : d + 1]
        roots = np.linalg.eigvals(companion).real
        out[idx, :d] = np.where((roots > 0.0) & (roots < 1.0), roots, np.nan)
    return out


def abs_integral_unit(coeffs: np.ndarray) -> np.ndarray:
    """Integral of ``|p|`` over [0, 1] for every row polynomial.

    [0, 1] is split at every root found by :func:`unit_roots`; on each piece
    the signed integral comes from the exact antiderivative. A split point
    without a sign change leaves the sum unchanged.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    rows, width = coeffs.shape
    anti = antiderivative(coeffs)
    breaks = np.concatenate(
        [np.zeros((rows, 1)), unit_roots(coeffs), np.ones((rows, 1))], axis=1
    )
    breaks = np.sort(breaks, axis=1)
    breaks = np.where(np.isnan(breaks), 1.0, breaks)
    powers = breaks[:, :, None] ** np.arange(width + 1)[None, None, :]
    prim = np.einsum("rj,rmj->rm", anti, powers)
    return np.abs(np.diff(prim, axis=1)).sum(axis=1)
