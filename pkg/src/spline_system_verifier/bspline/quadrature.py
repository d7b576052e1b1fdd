"""Gauss-Legendre rules mapped onto collections of intervals."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Optional, Tuple

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point rule on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def mapped_nodes(
    a: np.ndarray, b: np.ndarray, order: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Map the rule onto every ``[a_i, b_i]``.

    Returns arrays of shape ``(len(a), order)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return mid[:, None] + half[:, None] * x[None, :], half[:, None] * w[None, :]


def pieces_from_breaks(
    breaks: Iterable[float],
    sub: Optional[Tuple[float, float]] = None,
    periodic: bool = False,
) -> np.ndarray:
    """Positive-length intervals between consecutive breakpoints.

    ``sub`` restricts the result to ``[a, b]``; on the torus ``a > b`` selects
    the arc through 0, that is ``[a, 1] ∪ [0, b]``.
    """
    brk = np.unique(np.asarray(list(breaks), dtype=float))
    if sub is None:
        spans = [(brk[0], brk[-1])]
    else:
        a, b = float(sub[0]), float(sub[1])
        if periodic and a > b:
            spans = [(a, 1.0), (0.0, b)]
        else:
            spans = [(a, b)]
    out = []
    for lo, hi in spans:
        if hi <= lo:
            continue
        inner = brk[(brk > lo) & (brk < hi)]
        pts = np.concatenate(([lo], inner, [hi]))
        out.append(np.column_stack((pts[:-1], pts[1:])))
    if not out:
        return np.zeros((0, 2))
    pieces = np.vstack(out)
    return pieces[pieces[:, 1] > pieces[:, 0]]
