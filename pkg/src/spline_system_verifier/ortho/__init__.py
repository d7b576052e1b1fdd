"""Orthonormal spline functions built from one knot insertion at a time.

For a partition with inserted knot ``i0`` the function

    g = sum_{j=i0-k}^{i0} alpha_j N_j*

is orthogonal to the coarse space, and ``f = g / ||g||_2``. The dual
coefficients ``alpha`` come from an explicit product formula or an equivalent
two-term recursion; the primal coefficients are ``w = G^{-1} alpha``.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from ..bspline import (
    SplineBasis,
    evaluate,
    inner_products_with_basis,
    refinement_matrix,
)
from ..bspline.quadrature import mapped_nodes
from ..charint import characteristic_interval
from ..gram import GramSystem
from ..knots import (
    clamped_partition,
    insert_point,
    maximal_splitting,
    partition_for,
    rotated_index,
    rotated_periodic,
)
from ..models import (
    INTERVAL,
    PRIMAL,
    ComparisonReport,
    KnotSequence,
    OrthoFunction,
    OrthoSystem,
    Partition,
    Spline,
)

logger = logging.getLogger(__name__)

COMPARISON_TOL = 1e-10


class UnsupportedPartitionError(ValueError):
    """Raised when a construction is asked for outside its valid range."""


class DegenerateRecursionError(RuntimeError):
    """Raised when the alpha recursion meets a vanishing denominator."""


class OrthogonalityLossError(RuntimeError):
    """Raised when the Gram-Schmidt oracle loses orthogonality."""


def _check_index(p: Partition, i0: int) -> None:
    if not 0 <= i0 < p.n:
        raise UnsupportedPartitionError(f"Inserted knot index {i0} outside 0..{p.n - 1}")
    if p.periodic and p.n < 2 * p.k:
        raise UnsupportedPartitionError(
            f"Periodic construction needs n >= 2k, got n={p.n}, k={p.k}"
        )


def alpha_closed_form(p: Partition, i0: int) -> np.ndarray:
    """``alpha_j`` for ``j = i0-k, ..., i0`` from the product formula."""
    _check_index(p, i0)
    k = p.k
    t = p.knot
    t0 = t(i0)
    out = np.empty(k + 1)
    for pos, j in enumerate(range(i0 - k, i0 + 1)):
        value = 1.0
        for ell in range(i0 - k + 1, j):
            value *= (t0 - t(ell)) / (t(ell + k) - t(ell))
        for ell in range(j + 1, i0):
            value *= (t(ell + k) - t0) / (t(ell + k) - t(ell))
        out[pos] = value if (j - i0 + k) % 2 == 0 else -value
    return out


def alpha_recursion(p: Partition, i0: int) -> np.ndarray:
    """Same vector as :func:`alpha_closed_form`, by the two-term recursion."""
    _check_index(p, i0)
    k = p.k
    t = p.knot
    t0 = t(i0)
    start = 1.0
    for ell in range(i0 - k + 1, i0):
        start *= (t(ell + k) - t0) / (t(ell + k) - t(ell))
    out = np.empty(k + 1)
    out[0] = start
    for pos, i in enumerate(range(i0 - k, i0)):
        right = (t(i + k + 1) - t0) / (t(i + k + 1) - t(i + 1))
        if right == 0.0:
            raise DegenerateRecursionError(
                f"Vanishing recursion weight at index {i + 1} (i0={i0})"
            )
        left = (t0 - t(i)) / (t(i + k) - t(i))
        out[pos + 1] = -out[pos] * left / right
    return out


def window_storage(p: Partition, i0: int) -> np.ndarray:
    """Storage positions of the indices ``i0-k, ..., i0``."""
    idx = np.arange(i0 - p.k, i0 + 1)
    if p.periodic:
        return idx % p.n
    return idx + p.offset


def _finish(
    p: Partition,
    i0: int,
    alpha_full: np.ndarray,
    gram: GramSystem,
    index_n: int,
    with_interval: bool,
) -> OrthoFunction:
    w = gram.solve(alpha_full)
    norm2 = math.sqrt(float(w @ alpha_full))
    J = None
    if with_interval:
        window = alpha_full[window_storage(p, i0)]
        J = characteristic_interval(p, i0, window)
    return OrthoFunction(
        index_n=index_n,
        i0=i0,
        alpha=alpha_full,
        w=w,
        norm2=norm2,
        J=J,
        kind=p.kind,
        basis=gram.basis,
    )


def build_g(
    p: Partition,
    i0: int,
    index_n: Optional[int] = None,
    gram: Optional[GramSystem] = None,
) -> OrthoFunction:
    """Orthogonal function of a clamped partition with inserted knot ``i0``."""
    if p.periodic:
        raise UnsupportedPartitionError("build_g needs a clamped partition")
    alpha = alpha_closed_form(p, i0)
    gram = gram or GramSystem(SplineBasis(p))
    full = np.zeros(gram.dimension)
    full[window_storage(p, i0)] = alpha
    return _finish(p, i0, full, gram, p.n if index_n is None else index_n, True)


def build_g_periodic(
    p: Partition,
    i0: int,
    index_n: Optional[int] = None,
    gram: Optional[GramSystem] = None,
) -> OrthoFunction:
    if not p.periodic:
        raise UnsupportedPartitionError("build_g_periodic needs a periodic partition")
    alpha = alpha_closed_form(p, i0)
    gram = gram or GramSystem(SplineBasis(p))
    full = np.zeros(gram.dimension)
    full[window_storage(p, i0)] = alpha
    return _finish(p, i0, full, gram, p.n if index_n is None else index_n, True)


def _orientation(alpha: np.ndarray, anchor: int) -> float:
    """+1 or -1 so that ``alpha[anchor]`` becomes positive."""
    ref = alpha[anchor]
    if abs(ref) < 1e-12 * np.abs(alpha).max():
        ref = alpha[int(np.argmax(np.abs(alpha)))]
    return 1.0 if ref > 0 else -1.0


def build_g_small_periodic(
    p: Partition, i0: int, index_n: Optional[int] = None
) -> OrthoFunction:
    """Periodic step with ``k < n < 2k``: ``alpha`` spans the null space of Böhm's map."""
    if not p.periodic or not p.k < p.n:
        raise UnsupportedPartitionError("Null-space construction needs k < n (periodic)")
    basis = SplineBasis(p)
    gram = GramSystem(basis)
    kernel = linalg.null_space(refinement_matrix(basis, i0))
    if kernel.shape[1] != 1:
        raise UnsupportedPartitionError(
            f"Refinement map has a {kernel.shape[1]}-dimensional kernel"
        )
    alpha = kernel[:, 0] * _orientation(kernel[:, 0], (i0 - p.k) % p.n)
    return _finish(p, i0, alpha, gram, p.n if index_n is None else index_n, False)


def lowdin(gram: GramSystem) -> np.ndarray:
    """Symmetric orthonormalization matrix ``G^{-1/2}``."""
    lam, vec = linalg.eigh(gram.matrix)
    return (vec * lam ** -0.5) @ vec.T


def _initial_partition(seq: KnotSequence) -> Partition:
    if seq.periodic:
        if len(seq) < seq.order_k:
            raise UnsupportedPartitionError(
                f"A torus system of order {seq.order_k} needs at least {seq.order_k} knots"
            )
        return partition_for(seq.prefix(seq.order_k))
    return partition_for(seq.prefix(0))


def _initial_count(seq: KnotSequence) -> int:
    return seq.order_k if seq.periodic else 0


def build_system(seq: KnotSequence) -> OrthoSystem:
    """Orthonormal system of the sequence: initial block plus one function per step."""
    k = seq.order_k
    first = _initial_partition(seq)
    gram0 = GramSystem(SplineBasis(first))
    C = lowdin(gram0)
    initial = [Spline(gram0.basis, PRIMAL, C[r]) for r in range(gram0.dimension)]
    functions: List[OrthoFunction] = []
    for m in range(_initial_count(seq) + 1, len(seq) + 1):
        _, i0 = insert_point(seq.prefix(m - 1), seq.points[m - 1])
        part = partition_for(seq.prefix(m))
        if not part.periodic:
            fn = build_g(part, i0, index_n=m)
        elif part.n >= 2 * k:
            fn = build_g_periodic(part, i0, index_n=m)
        else:
            fn = build_g_small_periodic(part, i0, index_n=m)
        functions.append(fn)
    logger.info(
        "Built %s system: k=%d, %d initial + %d step functions",
        seq.domain, k, len(initial), len(functions),
    )
    return OrthoSystem(sequence=seq, functions=functions, initial_block=initial)


def function_spline(fn: OrthoFunction) -> Spline:
    """``f = g / ||g||_2`` as a primal spline on its own partition."""
    return Spline(fn.basis, PRIMAL, fn.coefficients)


def system_splines(system: OrthoSystem) -> List[Spline]:
    return list(system.initial_block) + [function_spline(fn) for fn in system.functions]


def evaluate_system(system: OrthoSystem, x: np.ndarray) -> np.ndarray:
    """Values of every system function at ``x``, one row per function."""
    x = np.asarray(x, dtype=float).ravel()
    splines = system_splines(system)
    out = np.empty((len(splines), len(x)))
    for r, s in enumerate(splines):
        out[r] = evaluate(s, x)
    return out


def final_basis(system: OrthoSystem) -> SplineBasis:
    """B-spline basis of the finest partition; every system function lives in its span."""
    return SplineBasis(partition_for(system.sequence))


def system_gram(system: OrthoSystem) -> np.ndarray:
    """Exact Gram matrix of the whole system on the finest partition."""
    basis = final_basis(system)
    pieces = basis.pieces()
    x, w = mapped_nodes(pieces[:, 0], pieces[:, 1], basis.k)
    F = evaluate_system(system, x.ravel())
    return (F * w.ravel()[None, :]) @ F.T


def _sampled_basis(basis: SplineBasis, x: np.ndarray, sqrt_w: np.ndarray) -> np.ndarray:
    return basis.collocation(x).toarray().T * sqrt_w[None, :]


def _mgs(vectors: np.ndarray, v: np.ndarray) -> np.ndarray:
    for _ in range(2):
        for q in vectors:
            v = v - (q @ v) * q
    return v


def gram_schmidt_oracle(seq: KnotSequence, tol: float = 1e-8) -> OrthoSystem:
    """Independent system by modified Gram-Schmidt on nested B-spline bases.

    Functions are represented by their values at the Gauss nodes of the
    finest partition, scaled by the square roots of the weights, so that
    Euclidean products are exact L2 products.
    """
    k = seq.order_k
    fine = SplineBasis(partition_for(seq))
    pieces = fine.pieces()
    x, w = mapped_nodes(pieces[:, 0], pieces[:, 1], k)
    x = x.ravel()
    sqrt_w = np.sqrt(w.ravel())

    first = _initial_partition(seq)
    basis0 = SplineBasis(first)
    B0 = _sampled_basis(basis0, x, sqrt_w)
    lam, vec = linalg.eigh(B0 @ B0.T)
    C0 = (vec * lam ** -0.5) @ vec.T
    initial = [Spline(basis0, PRIMAL, C0[r]) for r in range(basis0.dimension)]
    ortho_rows = list(C0 @ B0)

    functions: List[OrthoFunction] = []
    for m in range(_initial_count(seq) + 1, len(seq) + 1):
        _, i0 = insert_point(seq.prefix(m - 1), seq.points[m - 1])
        part = partition_for(seq.prefix(m))
        basis = SplineBasis(part)
        Bm = _sampled_basis(basis, x, sqrt_w)
        best = None
        for st in np.unique(window_storage(part, i0)):
            residual = _mgs(ortho_rows, Bm[st].copy())
            norm = float(np.linalg.norm(residual))
            if best is None or norm > best[0]:
                best = (norm, residual)
        f = best[1] / best[0]
        leak = max((abs(float(q @ f)) for q in ortho_rows), default=0.0)
        if leak > tol:
            raise OrthogonalityLossError(
                f"Step {m}: new function has inner product {leak:.3e} with the previous ones"
            )
        alpha = Bm @ f
        sign = _orientation(alpha, window_storage(part, i0)[0])
        f = sign * f
        alpha = sign * alpha
        coeffs, *_ = np.linalg.lstsq(Bm.T, f, rcond=None)
        ortho_rows.append(f)
        functions.append(
            OrthoFunction(
                index_n=m, i0=i0, alpha=alpha, w=coeffs, norm2=1.0,
                J=None, kind=part.kind, basis=basis,
            )
        )
    return OrthoSystem(sequence=seq, functions=functions, initial_block=initial)


def boundary_indices(n: int, k: int) -> tuple:
    return tuple(range(-k, 0)) + tuple(range(n - k, n))


def compare_periodic_nonperiodic(p: Partition, i0: int) -> ComparisonReport:
    """Compare the periodic function of ``p`` with the clamped one after splitting.

    The clamped partition comes from :func:`maximal_splitting`; the ratio
    ``alpha_j / alpha_hat_j`` must be one constant ``c`` off the boundary
    indices, and ``g - c g_hat`` must pair to zero with every interior
    B-spline.
    """
    if not p.periodic:
        raise UnsupportedPartitionError("Comparison needs a periodic partition")
    k, n = p.k, p.n
    if n < 2 * k + 2:
        raise UnsupportedPartitionError(f"Comparison needs n >= 2k+2, got n={n}, k={k}")
    clamped, rotation = maximal_splitting(p)
    rotated = rotated_periodic(p, rotation)
    j0 = rotated_index(p, i0, rotation)
    g = build_g(clamped, j0)
    g_hat = build_g_periodic(rotated, j0)

    boundary = set(boundary_indices(n, k))
    window = list(range(j0 - k, j0 + 1))
    a = alpha_closed_form(clamped, j0)
    a_hat = alpha_closed_form(rotated, j0)
    interior = [pos for pos, j in enumerate(window) if j not in boundary]
    usable = [pos for pos in interior if a_hat[pos] != 0.0] or [
        int(np.argmax(np.abs(a_hat)))
    ]
    anchor = max(usable, key=lambda pos: abs(a_hat[pos]))
    c = float(a[anchor] / a_hat[anchor])
    scale = float(np.abs(a).max())
    spread = max(abs(a[pos] - c * a_hat[pos]) for pos in interior) / scale if interior else 0.0

    # <g, N_j> is alpha by construction; <g_hat, N_j> needs quadrature
    hat_moments = inner_products_with_basis(
        Spline(g_hat.basis, PRIMAL, g_hat.w), g.basis
    )
    beta_all = g.alpha - c * hat_moments
    beta = {}
    off = 0.0
    for st, value in enumerate(beta_all):
        j = st - k
        if j in boundary:
            beta[j] = float(value)
        else:
            off = max(off, abs(float(value)))
    ratio_J = g.J.length / g_hat.J.length
    logger.debug(
        "Comparison n=%d i0=%d: c=%.6g spread=%.2e offB=%.2e", n, i0, c, spread, off
    )
    return ComparisonReport(
        c=c,
        ratio_J=ratio_J,
        beta=beta,
        max_offB_residual=off,
        norm_g=g.norm2,
        ratio_spread=spread,
        boundary_indices=tuple(sorted(boundary)),
        rotation=rotation,
    )


def centred_partitions(p: Partition, i0: int) -> Tuple[Partition, Partition, int]:
    """Rotate so that the inserted knot sits at ``floor(n/2)`` with ``sigma_0 > 0``.

    Returns the clamped partition with the rotated knots as interior knots,
    the rotated periodic partition and the rotated index.
    """
    if not p.periodic:
        raise UnsupportedPartitionError("Centring needs a periodic partition")
    n, k = p.n, p.k
    if n < 2 * k + 2:
        raise UnsupportedPartitionError(f"Centring needs n >= 2k+2, got n={n}, k={k}")
    s = (i0 - n // 2) % n
    prev = p.tau[s - 1] if s > 0 else p.tau[n - 1] - 1.0
    if not prev < p.tau[s]:
        raise UnsupportedPartitionError(
            f"No gap in front of knot {s}; the rotation would land on a repeated knot"
        )
    rotation = 0.5 * (prev + p.tau[s])
    if rotation < 0.0:
        rotation += 1.0
    rotated = rotated_periodic(p, rotation)
    clamped = clamped_partition(KnotSequence(INTERVAL, rotated.tau, k))
    return clamped, rotated, rotated_index(p, i0, rotation)


def centred_alpha_identity(p: Partition, i0: int) -> Tuple[float, float]:
    """``max |alpha_j - alpha_hat_j|`` and ``|J| / |J_hat|`` in the centred position."""
    clamped, rotated, j0 = centred_partitions(p, i0)
    a = alpha_closed_form(clamped, j0)
    a_hat = alpha_closed_form(rotated, j0)
    J = characteristic_interval(clamped, j0, a)
    J_hat = characteristic_interval(rotated, j0, a_hat)
    return float(np.abs(a - a_hat).max()), J.length / J_hat.length


def comparison_passes(report: ComparisonReport, tol: float = COMPARISON_TOL) -> bool:
    return (
        report.c > 0.0
        and report.ratio_spread <= tol
        and report.max_offB_residual <= tol * report.norm_g
    )


EXPORT_HEADER = "# n i0 norm2 J_start J_end alpha(i0-k..i0) w"


def export_system(system: OrthoSystem) -> str:
    """Line records ``n i0 norm2 J_start J_end | alpha | w`` per step function."""
    lines = [EXPORT_HEADER]
    for fn in system.functions:
        p = fn.basis.partition
        window = fn.alpha[window_storage(p, fn.i0)]
        J = fn.J.J if fn.J is not None else (float("nan"), float("nan"))
        head = [str(fn.index_n), str(fn.i0), format(fn.norm2, ".17g"),
                format(J[0], ".17g"), format(J[1], ".17g")]
        lines.append(
            " ".join(head)
            + " | " + " ".join(format(v, ".17g") for v in window)
            + " | " + " ".join(format(v, ".17g") for v in fn.w)
        )
    return "\n".join(lines) + "\n"


__all__ = [
    "UnsupportedPartitionError",
    "DegenerateRecursionError",
    "OrthogonalityLossError",
    "alpha_closed_form",
    "alpha_recursion",
    "build_g",
    "build_g_periodic",
    "build_g_small_periodic",
    "build_system",
    "gram_schmidt_oracle",
    "compare_periodic_nonperiodic",
    "centred_partitions",
    "centred_alpha_identity",
    "comparison_passes",
    "evaluate_system",
    "system_gram",
    "system_splines",
    "function_spline",
    "final_basis",
    "boundary_indices",
    "export_system",
    "window_storage",
    "lowdin",
]
