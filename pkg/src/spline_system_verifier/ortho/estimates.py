"""Measured profiles of single orthonormal spline functions.

Each helper returns raw samples ``(distance, magnitude)`` or ratios; decay
rates are fitted by the caller with ``gram.fit_geometric_envelope``.
"""

from __future__ import annotations

import math
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..bspline import evaluate, lp_norm
from ..charint import distance_count, minimal_enclosure
from ..gram import fit_geometric_envelope
from ..knots import index_distance
from ..models import PRIMAL, DecayFit, OrthoFunction, Spline

NORM_EXPONENTS = (1.0, 2.0, math.inf)


def _g(fn: OrthoFunction) -> Spline:
    return Spline(fn.basis, PRIMAL, fn.w)


def _f(fn: OrthoFunction) -> Spline:
    return Spline(fn.basis, PRIMAL, fn.coefficients)


def _scale(length: float, p: float) -> float:
    """``length^(1 - 1/p)``."""
    return length if math.isinf(p) else length ** (1.0 - 1.0 / p)


def norm_profile(
    fn: OrthoFunction, exponents: Iterable[float] = NORM_EXPONENTS
) -> Dict[float, Tuple[float, float]]:
    """``(||g||_p |J|^{1-1/p}, ||g||_{L^p(J)} |J|^{1-1/p})`` per exponent."""
    if fn.J is None:
        raise ValueError("Norm profile needs a characteristic interval")
    g = _g(fn)
    out = {}
    for p in exponents:
        s = _scale(fn.J.length, p)
        out[p] = (lp_norm(g, p) * s, lp_norm(g, p, fn.J.J) * s)
    return out


def coefficient_decay_samples(fn: OrthoFunction) -> Tuple[np.ndarray, np.ndarray]:
    """``d(tau_j)`` against ``|w_j| (|J| + dist(supp N_j, J) + nu_j)`` (clamped)."""
    basis = fn.basis
    p = basis.partition
    if p.periodic:
        raise ValueError("Use periodic_coefficient_samples on the torus")
    lo, hi = fn.J.J
    dists, mags = [], []
    for st, w in enumerate(fn.w):
        j = basis.basis_index(st)
        left, right = p.knot(j), p.knot(j + p.k)
        gap = max(0.0, lo - right, left - hi)
        dists.append(distance_count(p, left, fn.J))
        mags.append(abs(w) * (fn.J.length + gap + (right - left)))
    return np.array(dists), np.array(mags)


def periodic_coefficient_samples(fn: OrthoFunction) -> Tuple[np.ndarray, np.ndarray]:
    """Periodic distance ``d(i, i0)`` against ``|w_i| min_j max(nu_i, nu_j)``."""
    basis = fn.basis
    p = basis.partition
    if not p.periodic:
        raise ValueError("Use coefficient_decay_samples on the interval")
    nu = basis.supports
    window = [(j % p.n) for j in range(fn.i0 - p.k, fn.i0 + 1)]
    dists, mags = [], []
    for i, w in enumerate(fn.w):
        weight = min(max(nu[i], nu[j]) for j in window)
        dists.append(index_distance(i, fn.i0, p.n))
        mags.append(abs(w) * weight)
    return np.array(dists), np.array(mags)


def _piece_powers(f: Spline, pieces: np.ndarray, p: float) -> np.ndarray:
    if math.isinf(p):
        return np.array([lp_norm(f, p, (a, b)) for a, b in pieces])
    return np.array([lp_norm(f, p, (a, b)) ** p for a, b in pieces])


def tail_samples(fn: OrthoFunction, p: float) -> Tuple[np.ndarray, np.ndarray]:
    """Tail norms of ``f`` outside ``J`` at every grid point.

    For ``x < inf J`` the magnitude is ``||f||_{L^p(0,x)}`` and for
    ``x > sup J`` it is ``||f||_{L^p(x,1)}``, both scaled by
    ``(|J| + dist(x, J))^{1-1/p} / |J|^{1/2}``.
    """
    basis = fn.basis
    part = basis.partition
    if part.periodic:
        raise ValueError("Tail estimates are stated on the interval")
    f = _f(fn)
    pieces = basis.pieces()
    local = _piece_powers(f, pieces, p)
    if math.isinf(p):
        head = np.maximum.accumulate(local)
        tail = np.maximum.accumulate(local[::-1])[::-1]
    else:
        head = np.cumsum(local)
        tail = np.cumsum(local[::-1])[::-1]
    lo, hi = fn.J.J
    root = fn.J.length ** 0.5
    dists, mags = [], []
    for r, (a, b) in enumerate(pieces):
        if b <= lo:
            x, norm = b, head[r]
            gap = lo - x
        elif a >= hi:
            x, norm = a, tail[r]
            gap = x - hi
        else:
            continue
        if not math.isinf(p):
            norm = norm ** (1.0 / p)
        dists.append(distance_count(part, x, fn.J))
        mags.append(norm * _scale(fn.J.length + gap, p) / root)
    return np.array(dists, dtype=int), np.array(mags)


def enclosure_samples(
    fn: OrthoFunction, points_per_interval: int = 4
) -> Tuple[np.ndarray, np.ndarray]:
    """``K(C(x))`` against ``|g(x)| |C(x)|`` for sample points of every grid interval."""
    basis = fn.basis
    part = basis.partition
    if not part.periodic or fn.J is None:
        raise ValueError("Enclosure profile needs a periodic function with an interval")
    g = _g(fn)
    t = (np.arange(points_per_interval) + 0.5) / points_per_interval
    counts, mags = [], []
    for ell in range(part.n):
        a = part.knot(ell)
        b = part.knot(ell + 1)
        if b <= a:
            continue
        info = minimal_enclosure(part, fn.J, ell)
        xs = np.mod(a + (b - a) * t, 1.0)
        values = np.abs(evaluate(g, xs))
        counts.extend([info.K] * len(xs))
        mags.extend(values * info.length)
    return np.array(counts, dtype=int), np.array(mags)


def enclosure_fit(fn: OrthoFunction, points_per_interval: int = 4) -> DecayFit:
    return fit_geometric_envelope(*enclosure_samples(fn, points_per_interval))


def random_union(rng: np.random.Generator, count: int) -> List[Tuple[float, float]]:
    """``count`` disjoint subintervals of [0, 1) with random endpoints."""
    ends = np.sort(rng.random(2 * count))
    return [(float(ends[2 * i]), float(ends[2 * i + 1])) for i in range(count)]


def union_integral_ratio(
    fn: OrthoFunction,
    U: Sequence[Tuple[float, float]],
    p: float,
    q_hat: float,
) -> float:
    """Left side over the sum bound for ``int_U |f|^p`` on the torus.

    The bound is ``|J|^{p/2} sum_ell q^{p K(C_ell)} |C_ell|^{-p} |U ∩ I_ell|``
    over the grid intervals ``I_ell`` meeting ``U``.
    """
    basis = fn.basis
    part = basis.partition
    f = _f(fn)
    lhs = sum(lp_norm(f, p, (a, b)) ** p for a, b in U if b > a)
    rhs = 0.0
    for ell in range(part.n):
        a = part.knot(ell)
        b = part.knot(ell + 1)
        if b <= a:
            continue
        overlap = _overlap_on_torus(a, b, U)
        if overlap <= 0.0:
            continue
        info = minimal_enclosure(part, fn.J, ell)
        rhs += q_hat ** (p * info.K) / info.length ** p * overlap
    rhs *= fn.J.length ** (p / 2.0)
    if rhs == 0.0:
        return 0.0 if lhs == 0.0 else math.inf
    return lhs / rhs


def _overlap_on_torus(a: float, b: float, U: Sequence[Tuple[float, float]]) -> float:
    # [a, b] may run past 1 in the periodic extension
    total = 0.0
    for shift in (0.0, 1.0):
        for lo, hi in U:
            total += max(0.0, min(b, hi + shift) - max(a, lo + shift))
    return total


__all__ = [
    "NORM_EXPONENTS",
    "norm_profile",
    "coefficient_decay_samples",
    "periodic_coefficient_samples",
    "tail_samples",
    "enclosure_samples",
    "enclosure_fit",
    "random_union",
    "union_integral_ratio",
]
