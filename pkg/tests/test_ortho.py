import numpy as np
import pytest
from numpy.testing import assert_allclose

from spline_system_verifier.bspline import evaluate
from spline_system_verifier.gram import fit_geometric_envelope
from spline_system_verifier.harness.generators import generate_sequence
from spline_system_verifier.knots import insert_point, make_sequence, partition_for, rotated_index
from spline_system_verifier.models import INTERVAL, PRIMAL, TORUS, Spline
from spline_system_verifier.ortho import (
    EXPORT_HEADER,
    UnsupportedPartitionError,
    alpha_closed_form,
    alpha_recursion,
    build_g,
    build_g_periodic,
    build_system,
    compare_periodic_nonperiodic,
    comparison_passes,
    evaluate_system,
    export_system,
    gram_schmidt_oracle,
    system_gram,
)

POINTS = [0.5, 0.21, 0.77, 0.33, 0.9, 0.05, 0.61, 0.44, 0.12, 0.68, 0.27, 0.83]


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_system_is_orthonormal(domain, k):
    system = build_system(make_sequence(domain, POINTS, k))
    G = system_gram(system)
    assert_allclose(G, np.eye(system.size), atol=1e-8)


def test_system_sizes():
    interval = build_system(make_sequence(INTERVAL, POINTS, 3))
    torus = build_system(make_sequence(TORUS, POINTS, 3))
    assert interval.size == len(POINTS) + 3
    assert torus.size == len(POINTS)
    assert len(torus.initial_block) == 3


def test_small_periodic_steps_have_no_interval():
    system = build_system(make_sequence(TORUS, POINTS, 3))
    small = [fn for fn in system.functions if fn.index_n < 6]
    assert small and all(fn.J is None for fn in small)
    assert all(fn.J is not None for fn in system.functions if fn.index_n >= 6)


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
@pytest.mark.parametrize("k", [2, 3, 5])
def test_alpha_recursion_matches_closed_form(domain, k):
    p = partition_for(make_sequence(domain, POINTS, k))
    for i0 in range(p.n):
        assert_allclose(alpha_recursion(p, i0), alpha_closed_form(p, i0), rtol=1e-12, atol=1e-14)


def test_alpha_ends_are_positive_and_alternating():
    p = partition_for(make_sequence(INTERVAL, POINTS, 3))
    alpha = alpha_closed_form(p, 5)
    assert alpha[0] > 0
    assert np.all(np.sign(alpha[:-1]) == -np.sign(alpha[1:]))


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_oracle_agrees_with_construction(domain):
    seq = make_sequence(domain, POINTS, 2)
    system = build_system(seq)
    oracle = gram_schmidt_oracle(seq)
    assert len(oracle.functions) == len(system.functions)
    for fn, ref in zip(system.functions, oracle.functions):
        diff = min(
            np.abs(fn.coefficients - ref.w).max(),
            np.abs(fn.coefficients + ref.w).max(),
        )
        assert diff < 1e-8


@pytest.mark.parametrize("k", [2, 3])
def test_periodic_and_clamped_functions_agree(k):
    p = partition_for(make_sequence(TORUS, POINTS, k))
    for i0 in (0, 4, p.n - 1):
        report = compare_periodic_nonperiodic(p, i0)
        assert comparison_passes(report)
        assert report.c > 0.0


def test_wrong_partition_kinds_rejected():
    clamped = partition_for(make_sequence(INTERVAL, POINTS, 2))
    periodic = partition_for(make_sequence(TORUS, POINTS, 2))
    with pytest.raises(UnsupportedPartitionError):
        build_g(periodic, 0)
    with pytest.raises(UnsupportedPartitionError):
        build_g_periodic(clamped, 0)
    with pytest.raises(UnsupportedPartitionError):
        compare_periodic_nonperiodic(clamped, 0)
    with pytest.raises(UnsupportedPartitionError):
        alpha_closed_form(clamped, clamped.n)


def test_comparison_needs_enough_knots():
    p = partition_for(make_sequence(TORUS, POINTS[:5], 2))
    with pytest.raises(UnsupportedPartitionError):
        compare_periodic_nonperiodic(p, 0)


def test_export_system_lines():
    system = build_system(make_sequence(INTERVAL, POINTS[:4], 2))
    lines = export_system(system).splitlines()
    assert lines[0] == EXPORT_HEADER
    assert len(lines) == 1 + len(system.functions)
    assert lines[1].split()[0] == "1"


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_evaluate_system_rows(domain):
    system = build_system(make_sequence(domain, POINTS[:6], 2))
    x = np.linspace(0.0, 1.0, 33)[:-1]
    values = evaluate_system(system, x)
    assert values.shape == (system.size, 32)
    assert np.all(np.isfinite(values))


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_piecewise_constant_function_is_haar(domain):
    seq, i0 = insert_point(make_sequence(domain, [0.25, 0.5, 0.75], 1), 0.375)
    p = partition_for(seq)
    fn = (build_g(p, i0) if domain == INTERVAL else build_g_periodic(p, i0))
    window = fn.alpha[np.nonzero(fn.alpha)]
    assert window[0] > 0.0
    assert window[1] == pytest.approx(-window[0])
    f = Spline(fn.basis, PRIMAL, fn.coefficients)
    x = np.array([0.1, 0.3, 0.36, 0.4, 0.49, 0.6, 0.9])
    assert_allclose(evaluate(f, x), [0.0, 2.0, 2.0, -2.0, -2.0, 0.0, 0.0], atol=1e-12)
    assert fn.J.length == pytest.approx(0.125)


@pytest.mark.parametrize("k", [2, 3])
def test_boundary_coefficients_decay_away_from_inserted_knot(k):
    p = partition_for(generate_sequence("dyadic", 24, 0, k, TORUS))
    distances, magnitudes = [], []
    for i0 in range(p.n):
        report = compare_periodic_nonperiodic(p, i0)
        j0 = rotated_index(p, i0, report.rotation)
        for j, value in report.beta.items():
            d = min(min((j - m) % p.n, (m - j) % p.n) for m in range(j0 - k, j0 + 1))
            distances.append(d)
            magnitudes.append(abs(value))
    distances = np.array(distances)
    magnitudes = np.array(magnitudes)
    fit = fit_geometric_envelope(distances, magnitudes)
    assert fit.accepted
    assert magnitudes[distances >= 9].max() < 1e-2 * magnitudes.max()
