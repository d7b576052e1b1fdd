"""Knot sequence families used by the experiments."""

from __future__ import annotations

import logging
from typing import Callable, Dict, List, Optional

import numpy as np

from ..knots import make_sequence, read_sequence_file
from ..models import INTERVAL, KnotSequence

logger = logging.getLogger(__name__)

DYADIC = "dyadic"
UNIFORM_RANDOM = "uniform-random"
CLUSTERED = "clustered"
REPEATED_KNOT = "repeated-knot"
CUSTOM_FILE = "custom-file"

FAMILIES = (DYADIC, UNIFORM_RANDOM, CLUSTERED, REPEATED_KNOT, CUSTOM_FILE)

# finest cluster scale is 2**-CLUSTER_DEPTH
CLUSTER_DEPTH = 20
CLUSTER_LEVEL_SIZE = 4


def dyadic_points(n: int) -> List[float]:
    """``1/2, 1/4, 3/4, 1/8, 3/8, 5/8, 7/8, ...`` cut after ``n`` points."""
    out: List[float] = []
    level = 1
    while len(out) < n:
        denom = 2 ** level
        for num in range(1, denom, 2):
            out.append(num / denom)
            if len(out) == n:
                break
        level += 1
    return out


def _open_unit(rng: np.random.Generator) -> float:
    x = float(rng.random())
    while x == 0.0:
        x = float(rng.random())
    return x


def uniform_points(n: int, rng: np.random.Generator, k: int) -> List[float]:
    out: List[float] = []
    seen: Dict[float, int] = {}
    while len(out) < n:
        x = _open_unit(rng)
        if seen.get(x, 0) >= k:
            continue
        seen[x] = seen.get(x, 0) + 1
        out.append(x)
    return out


def clustered_points(n: int, rng: np.random.Generator, k: int) -> List[float]:
    """Points ``c +- U 2^-g`` around a random centre, ``g`` growing every few points."""
    centre = 0.25 + 0.5 * float(rng.random())
    out: List[float] = []
    seen: Dict[float, int] = {}
    while len(out) < n:
        level = min(1 + len(out) // CLUSTER_LEVEL_SIZE, CLUSTER_DEPTH)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        x = centre + sign * float(rng.random()) * 2.0 ** -level
        if not 0.0 < x < 1.0 or seen.get(x, 0) >= k:
            continue
        seen[x] = seen.get(x, 0) + 1
        out.append(x)
    return out


def repeated_points(n: int, rng: np.random.Generator, k: int) -> List[float]:
    """Random points, each inserted a random number ``1..k`` of times in a row."""
    out: List[float] = []
    while len(out) < n:
        x = _open_unit(rng)
        if x in out:
            continue
        copies = int(rng.integers(1, k + 1))
        out.extend([x] * min(copies, n - len(out)))
    return out


_RANDOM_FAMILIES: Dict[str, Callable[[int, np.random.Generator, int], List[float]]] = {
    UNIFORM_RANDOM: uniform_points,
    CLUSTERED: clustered_points,
    REPEATED_KNOT: repeated_points,
}


def generate_sequence(
    family: str,
    n: int,
    seed: int,
    k: int,
    domain: str = INTERVAL,
    sequence_file: Optional[str] = None,
) -> KnotSequence:
    """Admissible sequence of ``n`` points of the given family.

    Every family produces points in the open interval (0, 1), so the same
    points serve both the interval and the torus.
    """
    if n < 1:
        raise ValueError(f"Sequence length must be positive, got {n}")
    if family == DYADIC:
        points = dyadic_points(n)
    elif family in _RANDOM_FAMILIES:
        rng = np.random.default_rng(seed)
        points = _RANDOM_FAMILIES[family](n, rng, k)
    elif family == CUSTOM_FILE:
        if not sequence_file:
            raise ValueError("The custom-file family needs a sequence file")
        loaded = read_sequence_file(sequence_file)
        if loaded.order_k != k:
            raise ValueError(
                f"Sequence file {sequence_file} has k={loaded.order_k}, expected k={k}"
            )
        points = list(loaded.points[:n])
        if len(points) < n:
            logger.warning(
                "Sequence file %s holds %d points, fewer than n=%d",
                sequence_file, len(points), n,
            )
    else:
        raise ValueError(f"Unknown sequence family '{family}'")
    logger.debug("Generated %d %s points (k=%d, seed=%d)", len(points), family, k, seed)
    return make_sequence(domain, points, k)
