"""Clamped and periodic B-spline bases, knot insertion and spline integrals."""

from __future__ import annotations

import logging
import math
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import minimize_scalar

from ..models import CLAMPED, DUAL, PERIODIC, PRIMAL, Partition, Spline
from .quadrature import mapped_nodes, pieces_from_breaks

logger = logging.getLogger(__name__)

SUP_SAMPLES = 256
ADAPTIVE_TOL = 1e-10
ADAPTIVE_MAX_DEPTH = 20


class BasisIndexError(IndexError):
    """Raised for a basis or knot index outside the valid range."""


class PartitionMismatchError(ValueError):
    """Raised when splines on different partitions are combined."""


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature does not converge."""


class InvalidExponentError(ValueError):
    """Raised for an exponent p outside [1, inf]."""


class SplineBasis:
    """B-spline basis of order ``k`` over a clamped or periodic partition.

    Basis functions are addressed by their mathematical index (clamped ``-k..n-1``,
    periodic ``0..n-1``); arrays are indexed by storage position.
    """

    def __init__(self, partition: Partition):
        self.partition = partition
        self.k = partition.k
        self.dimension = partition.dimension
        self.periodic = partition.periodic
        first = partition.first_index
        idx = np.arange(first, first + self.dimension)
        self.supports = partition.knots(idx + self.k) - partition.knots(idx)
        if self.periodic:
            self._ext = partition.knots(np.arange(-self.k, partition.n + self.k + 1))
        else:
            self._ext = partition.array

    def __repr__(self) -> str:
        return (
            f"SplineBasis(kind={self.partition.kind}, k={self.k}, "
            f"dimension={self.dimension})"
        )

    def storage_index(self, i: int) -> int:
        first = self.partition.first_index
        if not first <= i < first + self.dimension:
            raise BasisIndexError(
                f"Basis index {i} outside {first}..{first + self.dimension - 1}"
            )
        return i - first

    def basis_index(self, storage: int) -> int:
        return storage + self.partition.first_index

    def breakpoints(self) -> np.ndarray:
        p = self.partition
        if self.periodic:
            return np.unique(np.concatenate(([0.0, 1.0], p.array)))
        return np.unique(p.array)

    def pieces(self, sub: Optional[Tuple[float, float]] = None) -> np.ndarray:
        return pieces_from_breaks(self.breakpoints(), sub, self.periodic)

    def _spans(self, x: np.ndarray, side: str) -> Tuple[np.ndarray, np.ndarray]:
        k = self.k
        n = self.partition.n
        if self.periodic:
            s0 = self.partition.tau[0]
            xs = np.mod(x, 1.0)
            if side == "right":
                xp = np.where(xs >= s0, xs, xs + 1.0)
            else:
                xp = np.where(xs > s0, xs, xs + 1.0)
            lo, hi = k, n + k - 1
        else:
            xp = x
            lo, hi = k - 1, n + k - 1
        s = np.searchsorted(self._ext, xp, side=side) - 1
        return xp, np.clip(s, lo, hi)

    def _bsplvb(self, xp: np.ndarray, s: np.ndarray) -> np.ndarray:
        k = self.k
        t = self._ext
        m = xp.shape[0]
        vals = np.zeros((m, k))
        vals[:, 0] = 1.0
        left = np.zeros((m, k))
        right = np.zeros((m, k))
        for j in range(1, k):
            left[:, j] = xp - t[s + 1 - j]
            right[:, j] = t[s + j] - xp
            saved = np.zeros(m)
            for r in range(j):
                temp = vals[:, r] / (right[:, r + 1] + left[:, j - r])
                vals[:, r] = saved + right[:, r + 1] * temp
                saved = left[:, j - r] * temp
            vals[:, j] = saved
        return vals

    def basis_values(
        self, x, side: str = "right"
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Storage indices and values of the ``k`` basis functions active at ``x``.

        ``side="right"`` gives right limits at knots (left limit at the right
        end of the interval); ``side="left"`` gives left limits.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
        xp, s = self._spans(x, side)
        vals = self._bsplvb(xp, s)
        idx = (s - self.k + 1)[:, None] + np.arange(self.k)[None, :]
        if self.periodic:
            idx = (idx - self.k) % self.partition.n
        return idx, vals

    def collocation(self, x, side: str = "right") -> sparse.csr_matrix:
        """Sparse matrix of all basis values, one row per point."""
        idx, vals = self.basis_values(x, side)
        rows = np.repeat(np.arange(idx.shape[0]), self.k)
        return sparse.csr_matrix(
            (vals.ravel(), (rows, idx.ravel())),
            shape=(idx.shape[0], self.dimension),
        )


def eval_basis(basis: SplineBasis, i: int, x):
    """Value of ``N_i`` at ``x`` (scalar or array)."""
    st = basis.storage_index(i)
    idx, vals = basis.basis_values(x)
    out = np.sum(np.where(idx == st, vals, 0.0), axis=1)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def _as_primal(f: Spline) -> Spline:
    if f.repr == DUAL:
        from ..gram import dual_to_primal

        return dual_to_primal(f)
    return f


def evaluate(f: Spline, x, side: str = "right"):
    f = _as_primal(f)
    idx, vals = f.basis.basis_values(x, side)
    out = np.sum(f.coeffs[idx] * vals, axis=1)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def coarsened_partition(p: Partition, i0: int) -> Partition:
    """The partition with the knot of sorted position ``i0`` removed."""
    if not 0 <= i0 < p.n:
        raise BasisIndexError(f"Knot index {i0} outside 0..{p.n - 1}")
    if p.periodic:
        tau = p.tau[:i0] + p.tau[i0 + 1:]
        return Partition(PERIODIC, tau, p.n - 1, p.k, 0)
    st = i0 + p.offset
    tau = p.tau[:st] + p.tau[st + 1:]
    return Partition(CLAMPED, tau, p.n - 1, p.k, p.offset)


def boehm_coarsen(
    fine: SplineBasis, i0: int
) -> Dict[int, Tuple[Tuple[int, float], ...]]:
    """Express each coarse B-spline through the fine ones (Böhm's relation).

    Keys are coarse basis indices, values ``(fine index, weight)`` pairs. On
    the torus both index sets are reduced modulo their dimensions.
    """
    p = fine.partition
    k = p.k
    n = p.n
    if not 0 <= i0 < n:
        raise BasisIndexError(f"Inserted knot index {i0} outside 0..{n - 1}")
    t = p.knot
    table: Dict[int, Tuple[Tuple[int, float], ...]] = {}
    if p.periodic:
        if n - 1 < k:
            raise BasisIndexError(
                f"Periodic coarsening needs n - 1 >= k, got n={n}, k={k}"
            )
        for i in range(i0 - k, i0 + n - k - 1):
            coarse = i % (n - 1)
            if i <= i0 - 1:
                c1 = (t(i0) - t(i)) / (t(i + k) - t(i))
                c2 = (t(i + k + 1) - t(i0)) / (t(i + k + 1) - t(i + 1))
                table[coarse] = ((i % n, c1), ((i + 1) % n, c2))
            else:
                table[coarse] = (((i + 1) % n, 1.0),)
        return table
    for i in range(-k, n - 1):
        if i <= i0 - k - 1:
            table[i] = ((i, 1.0),)
        elif i <= i0 - 1:
            c1 = (t(i0) - t(i)) / (t(i + k) - t(i))
            c2 = (t(i + k + 1) - t(i0)) / (t(i + k + 1) - t(i + 1))
            table[i] = ((i, c1), (i + 1, c2))
        else:
            table[i] = ((i + 1, 1.0),)
    return table


def refinement_matrix(fine: SplineBasis, i0: int) -> np.ndarray:
    """Dense form ``R`` of the Böhm table: ``Ñ = R N`` in storage indices."""
    table = boehm_coarsen(fine, i0)
    p = fine.partition
    coarse_dim = fine.dimension - 1
    R = np.zeros((coarse_dim, fine.dimension))
    for i, terms in table.items():
        row = i if p.periodic else i + p.k
        for j, weight in terms:
            col = j if p.periodic else j + p.k
            R[row, col] += weight
    return R


def _check_same_partition(f: Spline, g: Spline) -> None:
    if f.basis.partition != g.basis.partition:
        raise PartitionMismatchError("Splines live on different partitions")


def inner_product(f: Spline, g: Spline) -> float:
    """Exact L2 inner product of two splines on the same partition."""
    _check_same_partition(f, g)
    f = _as_primal(f)
    g = _as_primal(g)
    pieces = f.basis.pieces()
    x, w = mapped_nodes(pieces[:, 0], pieces[:, 1], f.basis.k)
    return float(np.sum(w.ravel() * evaluate(f, x.ravel()) * evaluate(g, x.ravel())))


def inner_products_with_basis(f: Spline, basis: SplineBasis) -> np.ndarray:
    """Vector of ``<f, N_j>`` for a basis on a possibly different partition.

    Both factors are piecewise polynomials on the union of breakpoints, so
    the result is exact.
    """
    f = _as_primal(f)
    breaks = np.concatenate((f.basis.breakpoints(), basis.breakpoints()))
    pieces = pieces_from_breaks(breaks)
    order = max(f.basis.k, basis.k)
    x, w = mapped_nodes(pieces[:, 0], pieces[:, 1], order)
    fx = evaluate(f, x.ravel()) * w.ravel()
    idx, vals = basis.basis_values(x.ravel())
    out = np.zeros(basis.dimension)
    np.add.at(out, idx, vals * fx[:, None])
    return out


def _local_moments(
    basis: SplineBasis, h: Callable, a: np.ndarray, b: np.ndarray, order: int
) -> Tuple[np.ndarray, np.ndarray]:
    x, w = mapped_nodes(a, b, order)
    idx, vals = basis.basis_values(x.ravel())
    hx = np.asarray(h(x.ravel()), dtype=float) * w.ravel()
    local = (vals * hx[:, None]).reshape(len(a), order, basis.k).sum(axis=1)
    return idx.reshape(len(a), order, basis.k)[:, 0, :], local


def basis_moments(
    basis: SplineBasis,
    h: Callable,
    breakpoints: Optional[Iterable[float]] = None,
    tol: float = ADAPTIVE_TOL,
    max_depth: int = ADAPTIVE_MAX_DEPTH,
) -> np.ndarray:
    """Adaptive Gauss quadrature of ``<h, N_j>`` for every basis index.

    ``h`` must accept an array of points. Discontinuities of ``h`` should be
    passed as ``breakpoints``; otherwise the refinement may run out of depth
    and :class:`QuadratureError` is raised.
    """
    breaks = basis.breakpoints()
    if breakpoints is not None:
        extra = np.asarray(list(breakpoints), dtype=float)
        extra = extra[(extra > 0.0) & (extra < 1.0)]
        breaks = np.concatenate((breaks, extra))
    pieces = pieces_from_breaks(breaks)
    a, b = pieces[:, 0], pieces[:, 1]
    out = np.zeros(basis.dimension)
    floor = None
    for depth in range(max_depth + 1):
        idx8, coarse = _local_moments(basis, h, a, b, 8)
        idx16, fine = _local_moments(basis, h, a, b, 16)
        if floor is None:
            floor = np.abs(fine).max(initial=0.0)
        diff = np.abs(coarse - fine).max(axis=1)
        scale = np.maximum(np.abs(fine).max(axis=1), floor * 1e-6)
        done = diff <= tol * scale
        np.add.at(out, idx16[done], fine[done])
        if done.all():
            return out
        a, b = a[~done], b[~done]
        mid = 0.5 * (a + b)
        a, b = np.concatenate((a, mid)), np.concatenate((mid, b))
    raise QuadratureError(
        f"Basis moments did not converge within depth {max_depth} "
        f"({len(a)} pieces left)"
    )


def _sup_norm(f: Spline, pieces: np.ndarray) -> float:
    if len(pieces) == 0:
        return 0.0
    t = np.linspace(0.0, 1.0, SUP_SAMPLES)
    a, b = pieces[:, 0], pieces[:, 1]
    x = a[:, None] + (b - a)[:, None] * t[None, :]
    inner = np.abs(evaluate(f, x[:, :-1].ravel())).reshape(len(a), -1)
    ends = np.abs(evaluate(f, x[:, -1], side="left"))
    best = max(float(inner.max()), float(ends.max()))
    piece, pos = np.unravel_index(int(np.argmax(inner)), inner.shape)
    lo = x[piece, max(pos - 1, 0)]
    hi = x[piece, min(pos + 1, SUP_SAMPLES - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda s: -abs(evaluate(f, s)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-13},
        )
        best = max(best, float(-res.fun))
    return best


def _power_integral(f: Spline, pieces: np.ndarray, p: float) -> float:
    k = f.basis.k
    if p.is_integer() and int(p) % 2 == 0:
        order = max(1, math.ceil((p * (k - 1) + 1) / 2))
        x, w = mapped_nodes(pieces[:, 0], pieces[:, 1], order)
        return float(np.sum(w.ravel() * evaluate(f, x.ravel()) ** p))
    a, b = pieces[:, 0], pieces[:, 1]
    total = 0.0
    floor = None
    for depth in range(ADAPTIVE_MAX_DEPTH + 1):
        x8, w8 = mapped_nodes(a, b, 8)
        x16, w16 = mapped_nodes(a, b, 16)
        r8 = np.sum(w8 * np.abs(evaluate(f, x8.ravel())).reshape(x8.shape) ** p, axis=1)
        r16 = np.sum(w16 * np.abs(evaluate(f, x16.ravel())).reshape(x16.shape) ** p, axis=1)
        if floor is None:
            floor = 1e-3 * float(np.sum(r16))
        done = np.abs(r8 - r16) <= ADAPTIVE_TOL * (np.abs(r16) + floor)
        total += float(np.sum(r16[done]))
        if done.all():
            return total
        a, b = a[~done], b[~done]
        if depth == ADAPTIVE_MAX_DEPTH:
            logger.warning(
                "L^%s quadrature stopped at depth %d with %d open pieces",
                p, depth, len(a),
            )
            return total + float(np.sum(r16[~done]))
        mid = 0.5 * (a + b)
        a, b = np.concatenate((a, mid)), np.concatenate((mid, b))
    return total


def lp_norm(
    f: Spline, p: float, sub: Optional[Tuple[float, float]] = None
) -> float:
    """``||f||_{L^p(sub)}`` for ``1 <= p <= inf``.

    ``sub`` is an interval ``(a, b)``; on the torus ``a > b`` denotes the arc
    through 0.
    """
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise InvalidExponentError(f"Exponent must lie in [1, inf], got {p}")
    f = _as_primal(f)
    pieces = f.basis.pieces(sub)
    if math.isinf(p):
        return _sup_norm(f, pieces)
    if len(pieces) == 0:
        return 0.0
    return _power_integral(f, pieces, p) ** (1.0 / p)


def sequence_norm(values: np.ndarray, p: float) -> float:
    values = np.abs(np.asarray(values, dtype=float))
    if math.isinf(p):
        return float(values.max(initial=0.0))
    return float(np.sum(values ** p) ** (1.0 / p))


def _weight_power(supports: np.ndarray, exponent: float) -> np.ndarray:
    return supports ** exponent


def stability_ratio(basis: SplineBasis, coeffs: np.ndarray, p: float) -> float:
    """``||sum a_j N_j||_p / ||(a_j nu_j^{1/p})||_{l^p}``."""
    g = Spline(basis, PRIMAL, coeffs)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    denom = sequence_norm(g.coeffs * _weight_power(basis.supports, inv_p), p)
    return lp_norm(g, p) / denom


def largest_piece(basis: SplineBasis, i: int) -> Tuple[float, float]:
    """Largest grid interval inside ``supp N_i`` as an interval of [0, 1]."""
    p = basis.partition
    lengths = [p.knot(i + r + 1) - p.knot(i + r) for r in range(basis.k)]
    r = int(np.argmax(lengths))
    ell = i + r
    if p.periodic:
        return p.tau[ell % p.n], p.tau[(ell + 1) % p.n]
    return p.knot(ell), p.knot(ell + 1)


def local_coefficient_ratio(
    basis: SplineBasis, coeffs: np.ndarray, p: float
) -> float:
    """``max_j |a_j| |L_j|^{1/p} / ||g||_{L^p(L_j)}``."""
    g = Spline(basis, PRIMAL, coeffs)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    worst = 0.0
    for st in range(basis.dimension):
        i = basis.basis_index(st)
        lo, hi = largest_piece(basis, i)
        length = hi - lo if hi > lo else hi + 1.0 - lo
        local = lp_norm(g, p, (lo, hi))
        if local > 0.0:
            worst = max(worst, abs(g.coeffs[st]) * length ** inv_p / local)
    return worst


__all__ = [
    "SplineBasis",
    "BasisIndexError",
    "PartitionMismatchError",
    "QuadratureError",
    "InvalidExponentError",
    "eval_basis",
    "evaluate",
    "boehm_coarsen",
    "refinement_matrix",
    "coarsened_partition",
    "inner_product",
    "inner_products_with_basis",
    "basis_moments",
    "lp_norm",
    "sequence_norm",
    "stability_ratio",
    "local_coefficient_ratio",
    "largest_piece",
]
