"""Gram matrices of B-spline bases, their inverses and related measurements."""

from __future__ import annotations

import io
import logging
import math
import threading
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional, TextIO, Union

import numpy as np
from scipy import linalg

from ..bspline import (
    SplineBasis,
    basis_moments,
    lp_norm,
    sequence_norm,
)
from ..bspline.polynomial import abs_integral_unit, interpolation_nodes, monomial_map
from ..bspline.quadrature import mapped_nodes
from ..knots import index_distance
from ..models import DUAL, PRIMAL, DecayFit, Spline

logger = logging.getLogger(__name__)

FIT_THRESHOLD = 1e-14
KERNEL_CHUNK = 2048


class GramFactorizationError(RuntimeError):
    """Raised when the Gram matrix cannot be factorized."""


def assemble_gram(basis: SplineBasis) -> np.ndarray:
    """Dense Gram matrix via ``k``-point Gauss rules on every knot interval."""
    pieces = basis.pieces()
    k = basis.k
    x, w = mapped_nodes(pieces[:, 0], pieces[:, 1], k)
    idx, vals = basis.basis_values(x.ravel())
    P = len(pieces)
    vals = vals.reshape(P, k, k)
    idx = idx.reshape(P, k, k)[:, 0, :]
    local = np.einsum("pqi,pq,pqj->pij", vals, w, vals)
    G = np.zeros((basis.dimension, basis.dimension))
    rows = np.repeat(idx, k, axis=1)
    cols = np.tile(idx, (1, k))
    np.add.at(G, (rows.ravel(), cols.ravel()), local.reshape(P, k * k).ravel())
    return 0.5 * (G + G.T)


class GramSystem:
    """Factorized Gram matrix of a :class:`SplineBasis`.

    Clamped bases use a banded Cholesky factor. Periodic bases eliminate the
    wrap-around border through a Schur complement of the banded interior,
    falling back to a dense factor for small ``n``.
    """

    def __init__(self, basis: SplineBasis):
        self.basis = basis
        self.k = basis.k
        self.dimension = basis.dimension
        self.periodic = basis.periodic
        self.matrix = assemble_gram(basis)
        self._columns: Dict[int, np.ndarray] = {}
        self._lock = threading.Lock()
        try:
            self._factorize()
        except (linalg.LinAlgError, ValueError) as e:
            raise GramFactorizationError(
                f"Gram matrix of {basis!r} is not positive definite: {e}"
            ) from e
        logger.debug("Gram system factorized (%s, mode=%s)", basis, self.mode)

    @staticmethod
    def _upper_band(M: np.ndarray, u: int) -> np.ndarray:
        d = M.shape[0]
        ab = np.zeros((u + 1, d))
        for off in range(u + 1):
            ab[u - off, off:] = np.diagonal(M, off)
        return ab

    def _factorize(self) -> None:
        k = self.k
        n = self.dimension
        u = k - 1
        if not self.periodic or k == 1:
            self.mode = "banded"
            self._band = linalg.cholesky_banded(self._upper_band(self.matrix, u))
            return
        if n < 4 * k:
            self.mode = "dense"
            self._dense = linalg.cho_factor(self.matrix)
            return
        self.mode = "bordered"
        m = k - 1
        inner = n - m
        A = self.matrix[:inner, :inner]
        self._border = self.matrix[:inner, inner:]
        D = self.matrix[inner:, inner:]
        self._band = linalg.cholesky_banded(self._upper_band(A, u))
        self._Z = linalg.cho_solve_banded((self._band, False), self._border)
        S = D - self._border.T @ self._Z
        self._schur = linalg.cho_factor(S)
        self._inner = inner

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Apply ``G^{-1}`` to a vector or to the columns of a matrix."""
        rhs = np.asarray(rhs, dtype=float)
        if self.mode == "banded":
            return linalg.cho_solve_banded((self._band, False), rhs)
        if self.mode == "dense":
            return linalg.cho_solve(self._dense, rhs)
        inner = self._inner
        r1, r2 = rhs[:inner], rhs[inner:]
        y1 = linalg.cho_solve_banded((self._band, False), r1)
        x2 = linalg.cho_solve(self._schur, r2 - self._border.T @ y1)
        x1 = y1 - self._Z @ x2
        return np.concatenate((x1, x2), axis=0)

    def storage_index(self, i: int) -> int:
        if self.periodic:
            return i % self.dimension
        return self.basis.storage_index(i)

    def inverse_column(self, j: int) -> np.ndarray:
        st = self.storage_index(j)
        col = self._columns.get(st)
        if col is None:
            e = np.zeros(self.dimension)
            e[st] = 1.0
            col = self.solve(e)
            col.flags.writeable = False
            with self._lock:
                col = self._columns.setdefault(st, col)
        return col

    def inverse_matrix(self) -> np.ndarray:
        inv = self.solve(np.eye(self.dimension))
        return 0.5 * (inv + inv.T)

    def distance(self, st_i: int, st_j: int) -> int:
        if self.periodic:
            return index_distance(st_i, st_j, self.dimension)
        return abs(st_i - st_j)

    def denominators(self) -> np.ndarray:
        """Pairwise ``h_ij`` (clamped) or ``max(nu_i, nu_j)`` (periodic)."""
        nu = self.basis.supports
        if self.periodic:
            return np.maximum(nu[:, None], nu[None, :])
        p = self.basis.partition
        first = p.first_index
        idx = np.arange(first, first + self.dimension)
        left = p.knots(idx)
        right = p.knots(idx + self.k)
        return np.maximum(right[:, None], right[None, :]) - np.minimum(
            left[:, None], left[None, :]
        )


def build_gram(basis: SplineBasis) -> GramSystem:
    return GramSystem(basis)


def inverse_entry(g: GramSystem, i: int, j: int) -> float:
    """Entry ``a_ij`` of the inverse Gram matrix (basis indices)."""
    return float(g.inverse_column(j)[g.storage_index(i)])


def dual_to_primal(f: Spline, gram: Optional[GramSystem] = None) -> Spline:
    if f.repr == PRIMAL:
        return f
    gram = gram or GramSystem(f.basis)
    return Spline(f.basis, PRIMAL, gram.solve(f.coeffs))


def primal_to_dual(f: Spline, gram: Optional[GramSystem] = None) -> Spline:
    if f.repr == DUAL:
        return f
    gram = gram or GramSystem(f.basis)
    return Spline(f.basis, DUAL, gram.matrix @ f.coeffs)


def project(
    g: GramSystem,
    h: Callable,
    breakpoints: Optional[Iterable[float]] = None,
) -> Spline:
    """Orthogonal projection of ``h`` onto the spline space, primal form."""
    b = basis_moments(g.basis, h, breakpoints)
    return Spline(g.basis, PRIMAL, g.solve(b))


def projection_infinity_norm(g: GramSystem, points_per_interval: int = 256) -> float:
    """Grid maximum of ``x -> ∫ |K(x, y)| dy`` for the projection kernel.

    For each grid point ``x`` the kernel ``K(x, .)`` is the spline with
    coefficients ``G^{-1} N(x)``; its absolute integral is taken piece by
    piece from exact local polynomial representations.
    """
    basis = g.basis
    k = basis.k
    pieces = basis.pieces()
    widths = pieces[:, 1] - pieces[:, 0]
    t = np.linspace(0.0, 1.0, points_per_interval, endpoint=False)
    xs = (pieces[:, :1] + widths[:, None] * t[None, :]).ravel()
    xs = np.append(xs, 1.0)

    nodes = interpolation_nodes(k)
    node_x = pieces[:, :1] + widths[:, None] * nodes[None, :]
    node_idx, node_vals = basis.basis_values(node_x.ravel())
    P = len(pieces)
    node_idx = node_idx.reshape(P, k, k)
    node_vals = node_vals.reshape(P, k, k)
    to_monomial = monomial_map(k)

    best = 0.0
    for start in range(0, len(xs), KERNEL_CHUNK):
        chunk = xs[start:start + KERNEL_CHUNK]
        V = basis.collocation(chunk).toarray().T
        C = g.solve(V)
        total = np.zeros(len(chunk))
        for piece in range(P):
            # values of K(x, .) at the interpolation nodes of this piece
            local = np.einsum("qr,qrc->cq", node_vals[piece], C[node_idx[piece]])
            coeffs = local @ to_monomial.T
            total += widths[piece] * abs_integral_unit(coeffs)
        best = max(best, float(total.max()))
    return best


def fit_geometric_envelope(distances: np.ndarray, magnitudes: np.ndarray) -> DecayFit:
    """Fit ``magnitude <= C q^distance`` on the per-distance maxima.

    A least-squares line through ``log max_d`` gives ``q``; ``C`` is then the
    smallest constant for which the bound covers every observed maximum.
    """
    distances = np.asarray(distances, dtype=int)
    magnitudes = np.asarray(magnitudes, dtype=float)
    keep = magnitudes > 0.0
    distances, magnitudes = distances[keep], magnitudes[keep]
    if len(distances) == 0:
        return DecayFit(0.0, 0.0, 0.0)
    levels = np.unique(distances)
    env = np.array([magnitudes[distances == d].max() for d in levels])
    if len(levels) < 2:
        return DecayFit(float(env.max()), 0.0, 0.0)
    slope, intercept = np.polyfit(levels, np.log(env), 1)
    q = float(math.exp(slope))
    fitted = intercept + slope * levels
    residual = float(np.sqrt(np.mean((np.log(env) - fitted) ** 2)))
    C = float(np.max(env / q ** levels)) if q > 0.0 else float(env.max())
    return DecayFit(C, q, residual)


def decay_samples(g: GramSystem):
    """Distances and scaled magnitudes ``|a_ij| D_ij`` above the noise floor."""
    inv = g.inverse_matrix()
    scaled = np.abs(inv) * g.denominators()
    threshold = FIT_THRESHOLD * np.abs(inv).max()
    rows, cols = np.nonzero(np.abs(inv) > threshold)
    if g.periodic:
        d = np.abs(rows - cols)
        dist = np.minimum(d, g.dimension - d)
    else:
        dist = np.abs(rows - cols)
    return dist, scaled[rows, cols]


def fit_decay(g: GramSystem) -> DecayFit:
    dist, mags = decay_samples(g)
    fit = fit_geometric_envelope(dist, mags)
    logger.debug("Gram decay fit: C=%.4g q=%.4g residual=%.3g", fit.C, fit.q, fit.residual)
    return fit


def dual_stability_ratio(g: GramSystem, b: np.ndarray, p: float) -> float:
    """``||sum b_j N_j*||_p / ||(b_j nu_j^{1/p - 1})||_{l^p}``."""
    h = dual_to_primal(Spline(g.basis, DUAL, b), g)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    weights = g.basis.supports ** (inv_p - 1.0)
    return lp_norm(h, p) / sequence_norm(np.asarray(b) * weights, p)


def write_dense(matrix: np.ndarray, stream: TextIO) -> None:
    for row in np.atleast_2d(matrix):
        stream.write(" ".join(format(v, ".17g") for v in row))
        stream.write("\n")


def export_dense(g: GramSystem, path: Union[str, Path, None] = None) -> str:
    """Row-major whitespace-separated text of the Gram matrix."""
    buf = io.StringIO()
    write_dense(g.matrix, buf)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_dense(text: str) -> np.ndarray:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    return np.array([[float(v) for v in row] for row in rows])


__all__ = [
    "GramSystem",
    "GramFactorizationError",
    "assemble_gram",
    "build_gram",
    "inverse_entry",
    "dual_to_primal",
    "primal_to_dual",
    "project",
    "projection_infinity_norm",
    "fit_decay",
    "fit_geometric_envelope",
    "decay_samples",
    "dual_stability_ratio",
    "export_dense",
    "read_dense",
]
