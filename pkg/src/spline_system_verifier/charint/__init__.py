"""Characteristic intervals and the counting functions built on them.

Intervals on the torus are arcs ``(start, end)`` with both endpoints in
``[0, 1)``; an arc wraps through 0 when ``end < start``. All containment
tests compare raw knot values, never shifted copies, so they are exact.
"""

from __future__ import annotations

import bisect
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..gram import fit_geometric_envelope
from ..models import CharInterval, EnclosureInfo, Partition

logger = logging.getLogger(__name__)

SUPPORT_SLACK = 1e-12

Interval = Tuple[float, float]


class NotNestedError(ValueError):
    """Raised when a chain of intervals is not decreasing under inclusion."""


class DegenerateIntervalError(ValueError):
    """Raised when no positive-length characteristic interval exists."""


def arc_length(arc: Interval, periodic: bool = True) -> float:
    a, b = arc
    if not periodic or b >= a:
        return b - a
    return b + 1.0 - a


def _key(start: float, x: float) -> Tuple[int, float]:
    return (0, x) if x >= start else (1, x)


def contains(outer: Interval, inner: Interval, periodic: bool = False) -> bool:
    """Closed inclusion ``inner ⊆ outer``."""
    a, b = outer
    c, d = inner
    if not periodic:
        return a <= c and d <= b
    end = _key(a, b)
    kc = _key(a, c)
    kd = _key(a, d)
    if c == d:
        return kc <= end
    return kc <= kd <= end


def contains_point(outer: Interval, x: float, periodic: bool = False) -> bool:
    return contains(outer, (x, x), periodic)


def interiors_disjoint(first: Interval, second: Interval, periodic: bool = False) -> bool:
    a, b = first
    c, d = second
    if not periodic:
        return d <= a or b <= c
    # the closed complement of an arc is the arc from its end back to its start
    return contains((b, a), second, True)


def nested_or_disjoint(first: Interval, second: Interval, periodic: bool = False) -> bool:
    return (
        contains(first, second, periodic)
        or contains(second, first, periodic)
        or interiors_disjoint(first, second, periodic)
    )


def _grid_interval(p: Partition, ell: int) -> Interval:
    if p.periodic:
        return p.tau[ell % p.n], p.tau[(ell + 1) % p.n]
    return p.knot(ell), p.knot(ell + 1)


def characteristic_interval(
    p: Partition, i0: int, alpha: Sequence[float]
) -> CharInterval:
    """Characteristic interval of the knot ``i0``.

    ``alpha`` holds the k+1 dual coefficients for the indices
    ``i0-k, ..., i0``. Ties go to the smallest index in the argmax set and
    to the leftmost among the longest grid intervals.
    """
    k = p.k
    if p.periodic and p.n < 2 * k:
        raise DegenerateIntervalError(
            f"Periodic characteristic intervals need n >= 2k, got n={p.n}, k={k}"
        )
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (k + 1,):
        raise ValueError(f"Expected {k + 1} coefficients, got {alpha.shape}")
    window = list(range(i0 - k, i0 + 1))
    supports = [p.knot(j + k) - p.knot(j) for j in window]
    bound = 2.0 * min(supports) * (1.0 + SUPPORT_SLACK)
    lambda0 = tuple(j for j, s in zip(window, supports) if s <= bound)
    top = max(abs(alpha[j - window[0]]) for j in lambda0)
    lambda1 = tuple(
        j for j in lambda0 if abs(alpha[j - window[0]]) >= top * (1.0 - SUPPORT_SLACK)
    )
    j0 = lambda1[0]
    lengths = [p.knot(j0 + r + 1) - p.knot(j0 + r) for r in range(k)]
    r = int(np.argmax(lengths))
    if lengths[r] <= 0.0:
        raise DegenerateIntervalError(
            f"All grid intervals of [tau_{j0}, tau_{j0 + k}] have zero length"
        )
    ell = j0 + r
    if p.periodic:
        J0 = (p.tau[j0 % p.n], p.tau[(j0 + k) % p.n])
        grid_index = ell % p.n
    else:
        J0 = (p.knot(j0), p.knot(j0 + k))
        grid_index = ell
    return CharInterval(
        J=_grid_interval(p, ell),
        J0=J0,
        j0=j0,
        Lambda0=lambda0,
        Lambda1=lambda1,
        length=lengths[r],
        grid_index=grid_index,
        periodic=p.periodic,
    )


def _count_in(p: Partition, arc: Interval) -> int:
    """Partition entries with multiplicity inside a closed interval or arc."""
    arr = p.array
    a, b = arc
    if not p.periodic or b >= a:
        return int(np.count_nonzero((arr >= a) & (arr <= b)))
    return int(np.count_nonzero((arr >= a) | (arr <= b)))


def distance_count(p: Partition, z: float, J: CharInterval) -> int:
    """Grid points between ``J`` and ``z``, counting ``z`` and the endpoints of ``J``.

    On the torus the count is taken inside the minimal enclosure of ``J`` and
    the grid interval holding ``z``.
    """
    if p.periodic:
        return periodic_distance_count(p, J, z)
    lo, hi = J.J
    if lo <= z <= hi:
        return 0
    if z > hi:
        return _count_in(p, (hi, z))
    return _count_in(p, (z, lo))


def locate(p: Partition, x: float) -> int:
    """Index ``ell`` of the grid interval ``[sigma_ell, sigma_ell+1)`` holding ``x``."""
    pos = bisect.bisect_right(p.tau, x) - 1
    return pos % p.n


def minimal_enclosure(p: Partition, J: CharInterval, ell: int) -> EnclosureInfo:
    """Shortest torus arc containing ``J`` and the grid interval ``ell``."""
    if not p.periodic:
        raise ValueError("minimal_enclosure needs a periodic partition")
    if p.n < 2 * p.k:
        raise DegenerateIntervalError(f"Enclosures need n >= 2k, got n={p.n}, k={p.k}")
    a, b = J.J
    grid = _grid_interval(p, ell)
    c, d = grid
    best: Optional[Interval] = None
    for cand in ((a, b), (c, d), (a, d), (c, b)):
        if not (contains(cand, J.J, True) and contains(cand, grid, True)):
            continue
        length = arc_length(cand)
        if length <= 0.0:
            continue
        if best is None:
            best = cand
            continue
        best_len = arc_length(best)
        if length < best_len or (length == best_len and cand[0] < best[0]):
            best = cand
    if best is None:
        raise DegenerateIntervalError(
            f"No arc contains both {J.J} and grid interval {grid}"
        )
    return EnclosureInfo(
        C=best,
        K=_count_in(p, best),
        d_hat_n=_gap_count(p, J, best, grid),
        length=arc_length(best),
    )


def _gap_count(p: Partition, J: CharInterval, C: Interval, target: Interval) -> int:
    if contains(J.J, target, True) or not interiors_disjoint(J.J, target, True):
        return 0
    if C[0] == J.J[0]:
        return _count_in(p, (J.J[1], target[0]))
    return _count_in(p, (target[1], J.J[0]))


def periodic_distance_count(p: Partition, J: CharInterval, x: float) -> int:
    """Grid points of the torus between ``J`` and ``x`` inside the enclosure ``C(x)``."""
    if contains_point(J.J, x, True):
        return 0
    info = minimal_enclosure(p, J, locate(p, x))
    if info.C[0] == J.J[0]:
        return _count_in(p, (J.J[1], x))
    return _count_in(p, (x, J.J[0]))


def distance_to_set(p: Partition, J: CharInterval, V: Interval) -> int:
    """Minimum of the distance count over ``V``.

    The count is piecewise constant, so the endpoints of ``V`` and the grid
    points inside it are enough.
    """
    candidates = [V[0], V[1]]
    candidates.extend(float(s) for s in p.interior() if contains_point(V, s, p.periodic))
    return min(distance_count(p, x, J) for x in candidates)


def count_large_nested(
    J_list: Sequence[Optional[CharInterval]], V: Interval, beta: float
) -> int:
    """Number of intervals ``J ⊆ V`` with ``|J| >= beta |V|``."""
    if beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    count = 0
    for J in J_list:
        if J is None:
            continue
        if contains(V, J.J, J.periodic) and J.length >= beta * arc_length(V, J.periodic):
            count += 1
    return count


def nested_check(J_list: Sequence[Optional[CharInterval]]) -> List[Tuple[int, int]]:
    """Pairs of positions whose intervals are neither nested nor disjoint."""
    items = [(pos, J) for pos, J in enumerate(J_list) if J is not None]
    bad = []
    for a in range(len(items)):
        pa, Ja = items[a]
        for b in range(a + 1, len(items)):
            pb, Jb = items[b]
            if not nested_or_disjoint(Ja.J, Jb.J, Ja.periodic):
                bad.append((pa, pb))
    if bad:
        logger.warning("%d characteristic interval pairs are not nested", len(bad))
    return bad


def nested_decay_ratio(J_chain: Sequence[CharInterval]) -> Tuple[float, float]:
    """Fit ``|J_i| <= C kappa^i |J_1|`` along a decreasing chain."""
    chain = list(J_chain)
    if not chain:
        raise NotNestedError("Empty chain")
    for prev, cur in zip(chain, chain[1:]):
        if not contains(prev.J, cur.J, prev.periodic):
            raise NotNestedError(f"{cur.J} is not contained in {prev.J}")
    if len(chain) == 1:
        return 1.0, math.nan
    first = chain[0].length
    steps = np.arange(len(chain))
    ratios = np.array([J.length / first for J in chain])
    fit = fit_geometric_envelope(steps, ratios)
    return fit.C, fit.q


def maximal_chains(J_list: Sequence[Optional[CharInterval]]) -> List[List[CharInterval]]:
    """Root-to-leaf chains of the inclusion forest.

    Each interval hangs below the latest earlier interval that contains it.
    """
    items = [J for J in J_list if J is not None]
    parent: Dict[int, int] = {}
    children: Dict[int, List[int]] = {}
    for pos, J in enumerate(items):
        for prev in range(pos - 1, -1, -1):
            if contains(items[prev].J, J.J, J.periodic):
                parent[pos] = prev
                children.setdefault(prev, []).append(pos)
                break
    chains = []
    for pos in range(len(items)):
        if pos in children:
            continue
        path = [pos]
        while path[-1] in parent:
            path.append(parent[path[-1]])
        chains.append([items[i] for i in reversed(path)])
    return chains


__all__ = [
    "NotNestedError",
    "DegenerateIntervalError",
    "arc_length",
    "contains",
    "contains_point",
    "interiors_disjoint",
    "nested_or_disjoint",
    "characteristic_interval",
    "distance_count",
    "periodic_distance_count",
    "distance_to_set",
    "locate",
    "minimal_enclosure",
    "count_large_nested",
    "nested_check",
    "nested_decay_ratio",
    "maximal_chains",
]
