# src/spline_system_verifier/models.py
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

INTERVAL = "interval"
TORUS = "torus"
CLAMPED = "clamped"
PERIODIC = "periodic"
PRIMAL = "primal"
DUAL = "dual"
EXACT = "exact"
TRACKED = "tracked"


@dataclass(frozen=True)
class KnotSequence:
    """Admissible knots in insertion order.

    ``points`` keeps the order in which knots were inserted; sorting happens
    only when a partition is built.
    """

    domain: str
    points: Tuple[float, ...]
    order_k: int

    @property
    def periodic(self) -> bool:
        return self.domain == TORUS

    def __len__(self) -> int:
        return len(self.points)

    def prefix(self, count: int) -> "KnotSequence":
        return KnotSequence(self.domain, self.points[:count], self.order_k)


@dataclass(frozen=True)
class Partition:
    """Sorted knots of a clamped or periodic spline space.

    ``tau`` holds every stored knot. For clamped partitions the basis index
    ``i`` lives at storage position ``i + offset`` with ``offset == k``; for
    periodic partitions ``tau`` is ``sigma_0 .. sigma_{n-1}`` and indices
    outside ``0..n-1`` are read through the periodic extension
    ``sigma_{rn+j} = r + sigma_j``.
    """

    kind: str
    tau: Tuple[float, ...]
    n: int
    k: int
    offset: int

    @property
    def periodic(self) -> bool:
        return self.kind == PERIODIC

    @property
    def dimension(self) -> int:
        return self.n if self.periodic else self.n + self.k

    @property
    def first_index(self) -> int:
        """Index of the first basis function."""
        return 0 if self.periodic else -self.k

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.tau, dtype=float)
        arr.flags.writeable = False
        return arr

    def knot(self, i: int) -> float:
        if self.periodic:
            r, j = divmod(i, self.n)
            return self.tau[j] + r
        return self.tau[i + self.offset]

    def knots(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx, dtype=int)
        if self.periodic:
            r, j = np.divmod(idx, self.n)
            return self.array[j] + r
        return self.array[idx + self.offset]

    def support(self, i: int) -> float:
        """Length nu_i of supp N_i."""
        return self.knot(i + self.k) - self.knot(i)

    def interior(self) -> Tuple[float, ...]:
        if self.periodic:
            return self.tau
        return self.tau[self.k:self.k + self.n]


@dataclass(frozen=True)
class PeriodicIndex:
    n: int
    value: int


@dataclass
class Spline:
    """Coefficients of a spline in the B-spline basis (primal) or its dual."""

    basis: Any
    repr: str
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.basis.dimension,):
            raise ValueError(
                f"Coefficient vector of length {self.coeffs.shape} does not "
                f"match basis dimension {self.basis.dimension}"
            )
        if self.repr not in (PRIMAL, DUAL):
            raise ValueError(f"Unknown spline representation '{self.repr}'")


@dataclass(frozen=True)
class DecayFit:
    C: float
    q: float
    residual: float

    @property
    def accepted(self) -> bool:
        return self.q < 1.0


@dataclass(frozen=True)
class CharInterval:
    """Characteristic interval of one orthonormal spline function.

    Periodic intervals are arcs stored by their two endpoints in ``[0, 1)``;
    an arc wraps through 0 when its end is smaller than its start.
    """

    J: Tuple[float, float]
    J0: Tuple[float, float]
    j0: int
    Lambda0: Tuple[int, ...]
    Lambda1: Tuple[int, ...]
    length: float
    grid_index: int
    periodic: bool = False


@dataclass(frozen=True)
class EnclosureInfo:
    C: Tuple[float, float]
    K: int
    d_hat_n: int
    length: float


@dataclass
class OrthoFunction:
    index_n: int
    i0: int
    alpha: np.ndarray
    w: np.ndarray
    norm2: float
    J: Optional[CharInterval]
    kind: str
    basis: Any = field(repr=False, default=None)

    @property
    def coefficients(self) -> np.ndarray:
        """Primal coefficients of the normalized function f = g / ||g||_2."""
        return self.w / self.norm2


@dataclass
class OrthoSystem:
    sequence: KnotSequence
    functions: List[OrthoFunction] = field(default_factory=list)
    initial_block: List[Spline] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.initial_block) + len(self.functions)

    @property
    def periodic(self) -> bool:
        return self.sequence.periodic


@dataclass
class ComparisonReport:
    c: float
    ratio_J: float
    beta: Dict[int, float]
    max_offB_residual: float
    norm_g: float
    ratio_spread: float
    boundary_indices: Tuple[int, ...] = ()
    rotation: float = 0.0

    @property
    def max_boundary_beta(self) -> float:
        return max((abs(v) for v in self.beta.values()), default=0.0)


@dataclass
class GridFunction:
    grid: np.ndarray
    values: np.ndarray
    prefix_integral: np.ndarray

    @property
    def cells(self) -> int:
        return len(self.grid) - 1

    def cell_integrals(self) -> np.ndarray:
        return np.diff(self.prefix_integral)


@dataclass
class Expansion:
    system: OrthoSystem
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.system.size,):
            raise ValueError(
                f"Expansion has {self.coeffs.shape[0]} coefficients for a "
                f"system of size {self.system.size}"
            )


@dataclass
class LevelSets:
    lam: float
    r: float
    E_lambda: np.ndarray
    B_lambda_r: np.ndarray
    measure_E: float
    measure_B: float

    @property
    def inclusion_holds(self) -> bool:
        return bool(np.all(self.B_lambda_r[self.E_lambda]))


@dataclass
class DominationReport:
    ratio_maximal: float
    ratio_projection: float
    excluded: int
    evaluated: int


@dataclass
class TechnicalReport:
    lemma_tail_ratio: Optional[float]
    lemma_level_ratio: Optional[float]
    lemma_far_ratios: Dict[float, Optional[float]]
    vanishing_residual: float
    gamma_size: int
    skipped: bool = False


@dataclass
class UnconditionalityReport:
    p: float
    r_max: float
    r_min: float
    r_S: float
    norm_f: float
    trials: int


@dataclass
class ExperimentConfig:
    k: int = 2
    family: str = "dyadic"
    n: int = 16
    p_list: Tuple[float, ...] = (1.5,)
    seed: int = 0
    trials: int = 10
    m: int = 8
    N_k_override: Optional[int] = None
    output_dir: str = "data/experiments/run"
    sequence_file: Optional[str] = None
    remez_trials: int = 2000
    random_cases: int = 20
    projection_points: int = 256
    technical_p: float = 1.5
    batch_workers: Optional[int] = None

    @property
    def N_k(self) -> int:
        if self.N_k_override is not None:
            return self.N_k_override
        return max(2 * self.k + 2, 4 * self.k)

    @property
    def experiment_id(self) -> str:
        return f"k{self.k}-{self.family}-n{self.n}-seed{self.seed}"


@dataclass
class CheckResult:
    name: str
    tier: str
    passed: Optional[bool]
    measured: Dict[str, Optional[float]] = field(default_factory=dict)
    fit: Optional[DecayFit] = None
    detail: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.passed is None:
            return "skipped" if self.tier == EXACT else "tracked"
        return "pass" if self.passed else "fail"


@dataclass
class VerificationReport:
    experiment_id: str
    environment: Dict[str, Any]
    checks: List[CheckResult] = field(default_factory=list)
    io_errors: List[str] = field(default_factory=list, compare=False)

    @property
    def failed_exact(self) -> List[str]:
        return [
            c.name for c in self.checks if c.tier == EXACT and c.passed is False
        ]

    @property
    def exit_code(self) -> int:
        return 1 if self.failed_exact or self.io_errors else 0
