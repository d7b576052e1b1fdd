"""Admissible knot sequences, their partitions and periodic index arithmetic."""

from __future__ import annotations

import bisect
import logging
from collections import Counter
from pathlib import Path
from typing import Iterable, Tuple, Union

from ..models import (
    CLAMPED,
    INTERVAL,
    PERIODIC,
    TORUS,
    KnotSequence,
    Partition,
    PeriodicIndex,
)

logger = logging.getLogger(__name__)

KNOT_FORMAT = ".17g"


class AdmissibilityError(ValueError):
    """Raised when a knot sequence would violate admissibility."""


class ModulusMismatchError(ValueError):
    """Raised when periodic indices with different moduli are combined."""


class KnotFileError(ValueError):
    """Raised for malformed knot sequence files."""


def _check_point(domain: str, x: float) -> None:
    if domain == TORUS:
        if not 0.0 <= x < 1.0:
            raise AdmissibilityError(f"Torus knot {x!r} outside [0, 1)")
    elif domain == INTERVAL:
        if not 0.0 <= x <= 1.0:
            raise AdmissibilityError(f"Interval knot {x!r} outside [0, 1]")
        if x in (0.0, 1.0):
            # the clamped boundary already carries multiplicity k
            raise AdmissibilityError(
                f"Interval knot {x!r} would raise the boundary multiplicity above k"
            )
    else:
        raise AdmissibilityError(f"Unknown domain '{domain}'")


def make_sequence(
    domain: str, points: Iterable[float], k: int
) -> KnotSequence:
    """Build a sequence by inserting ``points`` one at a time."""
    if k < 1:
        raise AdmissibilityError(f"Spline order must be positive, got {k}")
    seq = KnotSequence(domain, (), k)
    for x in points:
        seq, _ = insert_point(seq, float(x))
    return seq


def insert_point(seq: KnotSequence, x: float) -> Tuple[KnotSequence, int]:
    """Append ``x`` to the sequence.

    Returns
    -------
    tuple
        The extended sequence and the insertion position ``i0`` of ``x`` in
        the sorted partition. Equal knots are ordered by insertion, so the new
        knot is the rightmost copy of its value.
    """
    x = float(x)
    _check_point(seq.domain, x)
    multiplicity = sum(1 for t in seq.points if t == x)
    if multiplicity + 1 > seq.order_k:
        raise AdmissibilityError(
            f"Knot {x!r} would occur {multiplicity + 1} times (k={seq.order_k})"
        )
    i0 = bisect.bisect_right(sorted(seq.points), x)
    extended = KnotSequence(seq.domain, seq.points + (x,), seq.order_k)
    logger.debug("Inserted knot %r at sorted position %d", x, i0)
    return extended, i0


def clamped_partition(seq: KnotSequence) -> Partition:
    if seq.domain != INTERVAL:
        raise AdmissibilityError("Clamped partitions need an interval sequence")
    k = seq.order_k
    interior = tuple(sorted(seq.points))
    tau = (0.0,) * k + interior + (1.0,) * k
    partition = Partition(CLAMPED, tau, len(interior), k, k)
    _validate_partition(partition)
    return partition


def periodic_partition(seq: KnotSequence) -> Partition:
    if seq.domain != TORUS:
        raise AdmissibilityError("Periodic partitions need a torus sequence")
    k = seq.order_k
    sigma = tuple(sorted(seq.points))
    if len(sigma) < k:
        raise AdmissibilityError(
            f"A periodic space of order {k} needs at least {k} knots, got {len(sigma)}"
        )
    partition = Partition(PERIODIC, sigma, len(sigma), k, 0)
    _validate_partition(partition)
    return partition


def partition_for(seq: KnotSequence) -> Partition:
    return periodic_partition(seq) if seq.periodic else clamped_partition(seq)


def _validate_partition(p: Partition) -> None:
    counts = Counter(p.interior())
    worst = max(counts.values(), default=0)
    if worst > p.k:
        raise AdmissibilityError(f"Knot multiplicity {worst} exceeds k={p.k}")
    start = p.first_index
    for i in range(start, start + p.dimension):
        if not p.knot(i) < p.knot(i + p.k):
            raise AdmissibilityError(
                f"Degenerate support at index {i}: tau_i = tau_(i+k) = {p.knot(i)!r}"
            )


def maximal_splitting(p: Partition) -> Tuple[Partition, float]:
    """Cut the torus in the middle of a largest gap and clamp it.

    The returned clamped partition has the rotated knots as interior knots,
    so that the two boundary gaps both equal half of the largest periodic gap.
    Ties between equal gaps go to the gap with the smallest left endpoint.
    """
    if not p.periodic or p.n < 1:
        raise AdmissibilityError("maximal_splitting needs a periodic partition")
    sigma = p.tau
    n = p.n
    # gap j runs from sigma_{j-1} to sigma_j; gap 0 wraps through 0
    best_len = -1.0
    best_left = 0.0
    best_right = 0.0
    for j in range(n):
        left = sigma[j - 1] if j > 0 else sigma[n - 1]
        right = sigma[j] if j > 0 else sigma[0] + 1.0
        length = right - left
        if length > best_len or (length == best_len and left < best_left):
            best_len, best_left, best_right = length, left, right
    rotation = 0.5 * (best_left + best_right)
    if rotation >= 1.0:
        rotation -= 1.0
    interior = rotated_periodic(p, rotation).tau
    k = p.k
    tau = (0.0,) * k + interior + (1.0,) * k
    clamped = Partition(CLAMPED, tau, n, k, k)
    _validate_partition(clamped)
    logger.debug("Maximal splitting: gap %.6g, rotation %.17g", best_len, rotation)
    return clamped, rotation


def rotation_shift(p: Partition, rotation: float) -> int:
    """Number of knots that move from the front to the back under rotation."""
    return bisect.bisect_left(p.tau, rotation)


def rotated_periodic(p: Partition, rotation: float) -> Partition:
    """The periodic partition expressed in rotated coordinates."""
    shift = rotation_shift(p, rotation)
    values = []
    for s in p.tau[shift:] + p.tau[:shift]:
        r = s - rotation
        if r < 0.0:
            r += 1.0
        values.append(r)
    return Partition(PERIODIC, tuple(values), p.n, p.k, 0)


def rotated_index(p: Partition, i0: int, rotation: float) -> int:
    return (i0 - rotation_shift(p, rotation)) % p.n


def periodic_distance(i: PeriodicIndex, j: PeriodicIndex) -> int:
    if i.n != j.n:
        raise ModulusMismatchError(f"Moduli differ: {i.n} != {j.n}")
    d = abs(i.value - j.value) % i.n
    return min(d, i.n - d)


def index_distance(i: int, j: int, n: int) -> int:
    return periodic_distance(PeriodicIndex(n, i), PeriodicIndex(n, j))


def dump_sequence(seq: KnotSequence) -> str:
    lines = [f"k={seq.order_k} domain={seq.domain}"]
    lines.extend(format(x, KNOT_FORMAT) for x in seq.points)
    return "\n".join(lines) + "\n"


def load_sequence(text: str) -> KnotSequence:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise KnotFileError("Knot file is empty")
    header = dict(
        part.split("=", 1) for part in lines[0].split() if "=" in part
    )
    try:
        k = int(header["k"])
        domain = header["domain"]
    except (KeyError, ValueError) as e:
        raise KnotFileError(f"Invalid knot file header '{lines[0]}': {e}")
    try:
        points = [float(ln) for ln in lines[1:]]
    except ValueError as e:
        raise KnotFileError(f"Invalid knot value: {e}")
    return make_sequence(domain, points, k)


def read_sequence_file(path: Union[str, Path]) -> KnotSequence:
    return load_sequence(Path(path).read_text(encoding="utf-8"))


def write_sequence_file(seq: KnotSequence, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_sequence(seq), encoding="utf-8")
