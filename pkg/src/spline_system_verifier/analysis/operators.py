"""Square function, maximal functions and level sets of orthonormal spline expansions.

Everything is evaluated on a grid made of the knot intervals of the finest
partition, each subdivided ``m`` times. Maximal-function suprema run over
intervals with grid endpoints only, so reported values are lower bounds of
the true suprema.
"""

from __future__ import annotations

import logging
from typing import Callable, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from ..bspline import evaluate
from ..bspline.quadrature import mapped_nodes, pieces_from_breaks
from ..knots import partition_for
from ..models import (
    DominationReport,
    Expansion,
    GridFunction,
    LevelSets,
    OrthoSystem,
    Partition,
)
from ..ortho import system_splines

logger = logging.getLogger(__name__)

DEFAULT_SUBDIVISION = 8
CELL_ORDER = 4
POINT_CHUNK = 4096
ROW_CHUNK = 256
DIVISION_GUARD = 1e-12
LAMBDA_POINTS = 32


def analysis_grid(
    partition: Partition,
    m: int = DEFAULT_SUBDIVISION,
    extra: Optional[Iterable[float]] = None,
) -> np.ndarray:
    """Knot intervals of ``partition`` (plus ``extra`` breakpoints) split ``m``-fold."""
    breaks = np.concatenate(([0.0, 1.0], partition.array))
    if extra is not None:
        more = np.asarray(list(extra), dtype=float)
        breaks = np.concatenate((breaks, more[(more > 0.0) & (more < 1.0)]))
    pieces = pieces_from_breaks(breaks)
    t = np.arange(m) / m
    inner = (pieces[:, :1] + (pieces[:, 1] - pieces[:, 0])[:, None] * t[None, :]).ravel()
    return np.append(inner, 1.0)


def cell_nodes(grid: np.ndarray, order: int = CELL_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    return mapped_nodes(grid[:-1], grid[1:], order)


def _prefix(weights: np.ndarray, node_values: np.ndarray) -> np.ndarray:
    cells = np.sum(weights * np.abs(node_values), axis=1)
    return np.concatenate(([0.0], np.cumsum(cells)))


def sample_function(
    h: Callable, grid: np.ndarray, order: int = CELL_ORDER
) -> GridFunction:
    """Values of ``h`` on the grid with cell integrals of ``|h|`` by Gauss rules."""
    x, w = cell_nodes(grid, order)
    node_values = np.asarray(h(x.ravel()), dtype=float).reshape(x.shape)
    values = np.asarray(h(grid), dtype=float)
    return GridFunction(grid=grid, values=values, prefix_integral=_prefix(w, node_values))


class SystemSampler:
    """Evaluates every function of a system on the analysis grid, chunk by chunk."""

    def __init__(
        self,
        system: OrthoSystem,
        m: int = DEFAULT_SUBDIVISION,
        extra: Optional[Iterable[float]] = None,
        grid: Optional[np.ndarray] = None,
    ):
        self.system = system
        self.partition = partition_for(system.sequence)
        self.grid = analysis_grid(self.partition, m, extra) if grid is None else np.asarray(grid)
        self.nodes, self.weights = cell_nodes(self.grid)
        self.splines = system_splines(system)
        self.block = len(system.initial_block)

    @property
    def periodic(self) -> bool:
        return self.system.periodic

    def values(self, x: np.ndarray) -> np.ndarray:
        out = np.empty((len(self.splines), len(x)))
        for r, s in enumerate(self.splines):
            out[r] = evaluate(s, x)
        return out

    def chunks(self, x: np.ndarray) -> Iterator[Tuple[slice, np.ndarray]]:
        for start in range(0, len(x), POINT_CHUNK):
            sl = slice(start, min(start + POINT_CHUNK, len(x)))
            yield sl, self.values(x[sl])

    def reduce(self, coeffs: np.ndarray, x: np.ndarray, reducer: Callable) -> np.ndarray:
        """Apply ``reducer`` to the term matrix ``a_n f_n(x)`` over chunks of ``x``."""
        out = np.empty(len(x))
        for sl, F in self.chunks(x):
            out[sl] = reducer(coeffs[:, None] * F)
        return out

    def grid_function(self, coeffs: np.ndarray, reducer: Callable) -> GridFunction:
        values = self.reduce(coeffs, self.grid, reducer)
        nodes = self.reduce(coeffs, self.nodes.ravel(), reducer).reshape(self.nodes.shape)
        return GridFunction(self.grid, values, _prefix(self.weights, nodes))

    def projection_coefficients(
        self, h: Callable, breakpoints: Optional[Iterable[float]] = None
    ) -> np.ndarray:
        """``<h, f_n>`` by composite Gauss rules of order ``k + 7``."""
        breaks = list(self.grid)
        if breakpoints is not None:
            breaks.extend(b for b in breakpoints if 0.0 < b < 1.0)
        pieces = pieces_from_breaks(breaks)
        x, w = mapped_nodes(pieces[:, 0], pieces[:, 1], self.partition.k + 7)
        x = x.ravel()
        hw = np.asarray(h(x), dtype=float) * w.ravel()
        out = np.zeros(len(self.splines))
        for sl, F in self.chunks(x):
            out += F @ hw[sl]
        return out


def _sampler(e: Expansion, grid: Optional[np.ndarray]) -> SystemSampler:
    return SystemSampler(e.system, grid=grid)


def _square(terms: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(terms ** 2, axis=0))


def partial_max(block: int) -> Callable:
    start = max(block - 1, 0)

    def reducer(terms: np.ndarray) -> np.ndarray:
        sums = np.cumsum(terms, axis=0)
        return np.abs(sums[start:]).max(axis=0)

    return reducer


def _final_sum(terms: np.ndarray) -> np.ndarray:
    return np.sum(terms, axis=0)


def square_function(
    e: Expansion, grid: Optional[np.ndarray] = None, sampler: Optional[SystemSampler] = None
) -> GridFunction:
    """``Sf(t) = (sum_n |a_n f_n(t)|^2)^{1/2}`` on the grid."""
    sampler = sampler or _sampler(e, grid)
    return sampler.grid_function(e.coeffs, _square)


def maximal_partial_sum(
    e: Expansion, grid: Optional[np.ndarray] = None, sampler: Optional[SystemSampler] = None
) -> GridFunction:
    """``Mf(t) = sup_m |sum_{n<=m} a_n f_n(t)|``; the initial block counts as one step."""
    sampler = sampler or _sampler(e, grid)
    return sampler.grid_function(e.coeffs, partial_max(sampler.block))


def expansion_values(
    e: Expansion, grid: Optional[np.ndarray] = None, sampler: Optional[SystemSampler] = None
) -> GridFunction:
    sampler = sampler or _sampler(e, grid)
    return sampler.grid_function(e.coeffs, _final_sum)


def _trapezoid_prefix(grid: np.ndarray, values: np.ndarray) -> np.ndarray:
    cells = 0.5 * (values[:-1] + values[1:]) * np.diff(grid)
    return np.concatenate(([0.0], np.cumsum(cells)))


def hardy_littlewood(g: GridFunction, periodic: bool = False) -> GridFunction:
    """``sup |I|^{-1} int_I |g|`` over grid-endpoint intervals ``I`` containing each grid point.

    On the torus intervals are arcs of length at most one, handled on the
    doubled grid.
    """
    x = np.asarray(g.grid, dtype=float)
    P = np.asarray(g.prefix_integral, dtype=float)
    G0 = len(x)
    if periodic:
        xe = np.concatenate((x, x[1:] + 1.0))
        Pe = np.concatenate((P, P[-1] + P[1:]))
    else:
        xe, Pe = x, P
    G = len(xe)
    cols = np.arange(G)
    best = np.zeros(G)
    for a0 in range(0, G0 - 1, ROW_CHUNK):
        a = np.arange(a0, min(a0 + ROW_CHUNK, G0 - 1))
        width = xe[None, :] - xe[a][:, None]
        valid = (cols[None, :] > a[:, None]) & (width > 0.0)
        if periodic:
            valid &= width <= 1.0
        avg = np.where(
            valid,
            (Pe[None, :] - Pe[a][:, None]) / np.where(valid, width, 1.0),
            -np.inf,
        )
        # best average over right endpoints b >= i
        suffix = np.maximum.accumulate(avg[:, ::-1], axis=1)[:, ::-1]
        covered = np.where(cols[None, :] >= a[:, None], suffix, -np.inf)
        best = np.maximum(best, covered.max(axis=0))
    if periodic:
        values = np.maximum(best[:G0], best[G0 - 1:])
    else:
        values = best
    return GridFunction(x, values, _trapezoid_prefix(x, values))


def level_sets(
    s: GridFunction, lam: float, r: float = 0.5, periodic: bool = False
) -> LevelSets:
    """Cells of ``[Sf > lam]`` and of ``[M 1_E > r]``.

    A cell belongs to ``E`` when ``Sf`` exceeds ``lam`` at its left endpoint
    and to ``B`` when the maximal function of ``1_E`` exceeds ``r`` at both
    endpoints.
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    widths = np.diff(s.grid)
    E = s.values[:-1] > lam
    indicator = GridFunction(
        s.grid,
        np.append(E.astype(float), float(E[-1]) if len(E) else 0.0),
        np.concatenate(([0.0], np.cumsum(widths * E))),
    )
    M = hardy_littlewood(indicator, periodic).values
    B = (M[:-1] > r) & (M[1:] > r)
    return LevelSets(
        lam=lam,
        r=r,
        E_lambda=E,
        B_lambda_r=B,
        measure_E=float(widths[E].sum()),
        measure_B=float(widths[B].sum()),
    )


def lambda_sweep(
    s: GridFunction, r: float = 0.5, periodic: bool = False, count: int = LAMBDA_POINTS
) -> List[LevelSets]:
    """Level sets at ``count`` log-spaced thresholds from ``1e-3 max Sf`` to ``max Sf``."""
    top = float(np.max(s.values))
    if top <= 0.0:
        return []
    return [
        level_sets(s, float(lam), r, periodic)
        for lam in np.geomspace(1e-3 * top, top, count)
    ]


def guarded_ratio(num: np.ndarray, den: np.ndarray) -> Tuple[float, int]:
    """``max num/den`` where ``den`` is above the guard; also the excluded count."""
    scale = float(np.max(np.abs(num), initial=0.0))
    keep = den > DIVISION_GUARD * max(scale, DIVISION_GUARD)
    excluded = int(np.count_nonzero(~keep))
    if not keep.any():
        return 0.0, excluded
    return float(np.max(num[keep] / den[keep])), excluded


def domination_check(
    system: OrthoSystem,
    h: Callable,
    breakpoints: Optional[Iterable[float]] = None,
    m: int = DEFAULT_SUBDIVISION,
) -> DominationReport:
    """Compare the partial-sum maximal function and the projection with Hardy-Littlewood.

    ``f`` is the expansion of ``h`` in the system; the report holds
    ``sup Mf / HL f`` and ``sup |P h| / HL h`` over the grid.
    """
    brk = list(breakpoints) if breakpoints is not None else None
    sampler = SystemSampler(system, m, extra=brk)
    coeffs = sampler.projection_coefficients(h, brk)
    e = Expansion(system, coeffs)
    Mf = maximal_partial_sum(e, sampler=sampler)
    f = expansion_values(e, sampler=sampler)
    HLf = hardy_littlewood(f, system.periodic)
    HLh = hardy_littlewood(sample_function(h, sampler.grid), system.periodic)
    ratio_max, ex1 = guarded_ratio(Mf.values, HLf.values)
    ratio_proj, ex2 = guarded_ratio(np.abs(f.values), HLh.values)
    logger.debug(
        "Domination: sup Mf/HLf=%.4g, sup |Ph|/HLh=%.4g", ratio_max, ratio_proj
    )
    return DominationReport(
        ratio_maximal=ratio_max,
        ratio_projection=ratio_proj,
        excluded=ex1 + ex2,
        evaluated=2 * len(sampler.grid),
    )

