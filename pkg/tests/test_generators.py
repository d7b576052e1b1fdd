from collections import Counter

import pytest

from spline_system_verifier.config import KNOWN_FAMILIES
from spline_system_verifier.harness.generators import (
    FAMILIES,
    clustered_points,
    dyadic_points,
    generate_sequence,
)
from spline_system_verifier.knots import make_sequence, write_sequence_file
from spline_system_verifier.models import INTERVAL, TORUS

import numpy as np


def test_dyadic_points():
    assert dyadic_points(3) == [0.5, 0.25, 0.75]
    assert dyadic_points(7) == [0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875]


def test_config_knows_every_family():
    assert tuple(KNOWN_FAMILIES) == FAMILIES


@pytest.mark.parametrize("family", ["uniform-random", "clustered", "repeated-knot"])
@pytest.mark.parametrize("k", [1, 3])
def test_random_families_are_admissible_and_seeded(family, k):
    seq = generate_sequence(family, 40, 5, k)
    assert len(seq) == 40
    assert all(0.0 < x < 1.0 for x in seq.points)
    assert max(Counter(seq.points).values()) <= k
    assert generate_sequence(family, 40, 5, k) == seq
    assert generate_sequence(family, 40, 6, k) != seq


def test_same_points_on_both_domains():
    interval = generate_sequence("clustered", 12, 3, 2, INTERVAL)
    torus = generate_sequence("clustered", 12, 3, 2, TORUS)
    assert interval.points == torus.points
    assert torus.domain == TORUS


def test_clustered_points_shrink_towards_centre():
    points = clustered_points(40, np.random.default_rng(1), 2)
    last = points[-8:]
    assert max(last) - min(last) < 2.0 ** -8


def test_custom_file_family(tmp_path):
    path = tmp_path / "knots.txt"
    write_sequence_file(make_sequence(INTERVAL, [0.3, 0.6, 0.9], 2), path)
    seq = generate_sequence("custom-file", 2, 0, 2, TORUS, str(path))
    assert seq.points == (0.3, 0.6)
    assert seq.domain == TORUS
    with pytest.raises(ValueError):
        generate_sequence("custom-file", 2, 0, 3, INTERVAL, str(path))
    with pytest.raises(ValueError):
        generate_sequence("custom-file", 2, 0, 2, INTERVAL)


def test_unknown_family():
    with pytest.raises(ValueError):
        generate_sequence("fibonacci", 4, 0, 2)
