import pytest

from spline_system_verifier.knots import (
    AdmissibilityError,
    KnotFileError,
    ModulusMismatchError,
    clamped_partition,
    dump_sequence,
    insert_point,
    load_sequence,
    make_sequence,
    partition_for,
    maximal_splitting,
    periodic_distance,
    periodic_partition,
    rotated_index,
)
from spline_system_verifier.harness.generators import generate_sequence
from spline_system_verifier.models import INTERVAL, TORUS, KnotSequence, PeriodicIndex


def test_insert_point_returns_sorted_position():
    seq = make_sequence(INTERVAL, [0.5, 0.25], 2)
    extended, i0 = insert_point(seq, 0.75)
    assert i0 == 2
    assert extended.points == (0.5, 0.25, 0.75)
    _, i0 = insert_point(seq, 0.1)
    assert i0 == 0


def test_repeated_knot_is_rightmost_copy():
    seq = make_sequence(INTERVAL, [0.5], 2)
    _, i0 = insert_point(seq, 0.5)
    assert i0 == 1


def test_multiplicity_above_k_rejected():
    with pytest.raises(AdmissibilityError):
        make_sequence(INTERVAL, [0.5, 0.5, 0.5], 2)
    make_sequence(INTERVAL, [0.5, 0.5, 0.5], 3)


@pytest.mark.parametrize("x", [0.0, 1.0, -0.1, 1.5])
def test_interval_rejects_boundary_and_outside(x):
    with pytest.raises(AdmissibilityError):
        make_sequence(INTERVAL, [x], 2)


def test_torus_accepts_zero_rejects_one():
    seq = make_sequence(TORUS, [0.0, 0.5], 2)
    assert seq.points == (0.0, 0.5)
    with pytest.raises(AdmissibilityError):
        make_sequence(TORUS, [1.0], 2)


def test_clamped_partition_layout():
    p = clamped_partition(make_sequence(INTERVAL, [0.5, 0.25], 2))
    assert p.tau == (0.0, 0.0, 0.25, 0.5, 1.0, 1.0)
    assert p.n == 2
    assert p.dimension == 4
    assert p.first_index == -2
    assert p.knot(-2) == 0.0
    assert p.knot(1) == 0.5
    assert p.support(-1) == pytest.approx(0.5)
    assert p.support(0) == pytest.approx(0.75)


def test_periodic_partition_extension():
    p = periodic_partition(make_sequence(TORUS, [0.75, 0.25, 0.5], 2))
    assert p.tau == (0.25, 0.5, 0.75)
    assert p.dimension == 3
    assert p.knot(-1) == pytest.approx(-0.25)
    assert p.knot(3) == pytest.approx(1.25)
    assert p.support(2) == pytest.approx(0.75)


def test_periodic_partition_needs_k_knots():
    with pytest.raises(AdmissibilityError):
        periodic_partition(make_sequence(TORUS, [0.5], 2))


def test_maximal_splitting_centres_largest_gap():
    p = periodic_partition(make_sequence(TORUS, [0.1, 0.2, 0.3, 0.4], 2))
    clamped, rotation = maximal_splitting(p)
    assert rotation == pytest.approx(0.75)
    interior = clamped.interior()
    assert interior[0] == pytest.approx(0.35)
    assert 1.0 - interior[-1] == pytest.approx(0.35)
    assert clamped.n == 4
    assert rotated_index(p, 0, rotation) == 0


def test_periodic_distance():
    assert periodic_distance(PeriodicIndex(10, 1), PeriodicIndex(10, 9)) == 2
    assert periodic_distance(PeriodicIndex(10, 3), PeriodicIndex(10, 3)) == 0
    with pytest.raises(ModulusMismatchError):
        periodic_distance(PeriodicIndex(10, 1), PeriodicIndex(11, 1))


def test_knot_file_text():
    seq = make_sequence(TORUS, [0.1, 0.7, 0.1], 3)
    text = dump_sequence(seq)
    assert text.splitlines()[0] == "k=3 domain=torus"
    assert load_sequence(text) == seq


@pytest.mark.parametrize("text", ["", "k=x domain=torus\n0.5\n", "k=2\n0.5\n", "k=2 domain=interval\nabc\n"])
def test_malformed_knot_files(text):
    with pytest.raises(KnotFileError):
        load_sequence(text)


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
@pytest.mark.parametrize("family", ["uniform-random", "clustered", "repeated-knot"])
@pytest.mark.parametrize("seed", [0, 1])
def test_insertion_commutes_with_partition(domain, family, seed):
    k = 3
    points = generate_sequence(family, 14, seed, k, domain).points
    seq = make_sequence(domain, points[:k], k)
    for x in points[k:]:
        before = partition_for(seq)
        seq, i0 = insert_point(seq, x)
        after = partition_for(seq)
        assert after == partition_for(KnotSequence(domain, tuple(sorted(seq.points)), k))
        sigma = after.tau[after.offset:after.offset + after.n]
        assert sigma[i0] == x
        assert i0 == after.n - 1 or sigma[i0 + 1] > x
        assert sigma[:i0] + sigma[i0 + 1:] == before.tau[before.offset:before.offset + before.n]
