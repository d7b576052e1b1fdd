import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from spline_system_verifier.analysis import (
    SystemSampler,
    analysis_grid,
    domination_check,
    expansion_values,
    guarded_ratio,
    hardy_littlewood,
    lambda_sweep,
    lemma_techn_inequalities,
    level_sets,
    maximal_partial_sum,
    polynomial_projection,
    remez_check,
    remez_random_trials,
    sample_function,
    square_function,
    tripled,
)
from spline_system_verifier.analysis.operators import cell_nodes
from spline_system_verifier.knots import make_sequence, partition_for
from spline_system_verifier.models import INTERVAL, TORUS, Expansion, GridFunction
from spline_system_verifier.ortho import build_system

POINTS = [0.5, 0.21, 0.77, 0.33, 0.9, 0.05, 0.61, 0.44]


def _expansion(domain, k=2, seed=0):
    system = build_system(make_sequence(domain, POINTS, k))
    coeffs = np.random.default_rng(seed).standard_normal(system.size)
    return Expansion(system, coeffs)


def test_remez_linear_polynomial():
    measure, passed = remez_check([0.0, 1.0], (0.0, 1.0), 2)
    assert measure == pytest.approx(7 / 8)
    assert passed


def test_remez_constant_and_zero():
    assert remez_check([3.0], (0.2, 0.7), 1) == (pytest.approx(0.5), True)
    assert remez_check([0.0, 0.0], (0.0, 2.0), 3) == (2.0, True)


def test_remez_rejects_bad_input():
    with pytest.raises(ValueError):
        remez_check([0.0, 0.0, 1.0], (0.0, 1.0), 2)
    with pytest.raises(ValueError):
        remez_check([1.0], (0.5, 0.5), 1)


def test_remez_random_polynomials():
    failures, worst = remez_random_trials(np.random.default_rng(0), 200)
    assert failures == 0
    assert worst >= 0.5


def test_analysis_grid_contains_knots():
    p = partition_for(make_sequence(INTERVAL, POINTS, 2))
    grid = analysis_grid(p, m=4, extra=[0.3])
    assert grid[0] == 0.0 and grid[-1] == 1.0
    assert np.all(np.diff(grid) > 0)
    for x in POINTS + [0.3]:
        assert np.any(np.isclose(grid, x, rtol=0, atol=0))


def test_hardy_littlewood_of_constant():
    grid = np.linspace(0.0, 1.0, 21)
    g = GridFunction(grid, np.full(21, 2.0), 2.0 * grid)
    assert_allclose(hardy_littlewood(g).values, 2.0)
    assert_allclose(hardy_littlewood(g, periodic=True).values, 2.0)


def test_hardy_littlewood_of_bump():
    grid = np.linspace(0.0, 1.0, 11)
    values = np.zeros(11)
    g = sample_function(lambda t: ((t >= 0.4) & (t < 0.5)).astype(float), grid)
    HL = hardy_littlewood(GridFunction(grid, values, g.prefix_integral))
    # the bump cell itself attains the supremum 1 at its endpoints
    assert HL.values[4] == pytest.approx(1.0)
    assert HL.values[0] == pytest.approx(0.2)


def test_level_sets_inclusion_and_validation():
    grid = np.linspace(0.0, 1.0, 65)
    values = np.abs(np.sin(7 * grid)) + 0.1 * grid
    s = GridFunction(grid, values, np.zeros(65))
    for sets in lambda_sweep(s, periodic=True):
        assert sets.inclusion_holds
        assert sets.measure_E <= sets.measure_B + 1e-12
    assert len(lambda_sweep(s, count=5)) == 5
    with pytest.raises(ValueError):
        level_sets(s, 0.1, r=1.0)


def test_lambda_sweep_of_zero_function():
    grid = np.linspace(0.0, 1.0, 5)
    assert lambda_sweep(GridFunction(grid, np.zeros(5), np.zeros(5))) == []


def test_guarded_ratio():
    ratio, excluded = guarded_ratio(np.array([1.0, 2.0]), np.array([1.0, 0.0]))
    assert ratio == 1.0
    assert excluded == 1


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_maximal_function_dominates_expansion(domain):
    e = _expansion(domain)
    sampler = SystemSampler(e.system, m=4)
    f = expansion_values(e, sampler=sampler)
    Mf = maximal_partial_sum(e, sampler=sampler)
    assert np.all(Mf.values >= np.abs(f.values) - 1e-12)


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_square_function_parseval(domain):
    e = _expansion(domain, k=3)
    sampler = SystemSampler(e.system, m=2)
    x, w = cell_nodes(sampler.grid, 4)
    square = sampler.reduce(e.coeffs, x.ravel(), lambda T: (T ** 2).sum(axis=0))
    assert float(square @ w.ravel()) == pytest.approx(float(e.coeffs @ e.coeffs), rel=1e-8)
    S = square_function(e, sampler=sampler)
    assert S.values.shape == sampler.grid.shape
    assert np.all(S.values >= 0.0)


def test_domination_report():
    system = build_system(make_sequence(TORUS, POINTS, 2))
    report = domination_check(system, lambda t: np.where(t < 0.3, 1.0, 0.0), breakpoints=[0.3], m=4)
    assert report.ratio_maximal > 0.0
    assert report.ratio_projection > 0.0
    assert 0 <= report.excluded <= report.evaluated


def test_tripled():
    assert tripled((0.2, 0.4)) == pytest.approx((0.1, 0.5))


def test_polynomial_projection_reproduces_polynomials():
    x, w = cell_nodes(np.linspace(0.2, 0.6, 5), 4)
    x, w = x.ravel(), w.ravel()
    values = 1.0 + 3.0 * x
    assert_allclose(polynomial_projection(values, x, w, (0.2, 0.6), 2), values, atol=1e-12)
    residual = x ** 2 - polynomial_projection(x ** 2, x, w, (0.2, 0.6), 2)
    assert float(np.sum(w * residual)) == pytest.approx(0.0, abs=1e-12)
    assert float(np.sum(w * residual * x)) == pytest.approx(0.0, abs=1e-12)


def test_technical_inequalities_skip_degenerate_interval():
    report = lemma_techn_inequalities(_expansion(INTERVAL), (0.5, 0.5))
    assert report.skipped
    assert report.lemma_tail_ratio is None
    assert math.isnan(report.vanishing_residual)


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_technical_inequalities_report(domain):
    report = lemma_techn_inequalities(_expansion(domain), (0.3, 0.55), N_k=4, m=4)
    assert not report.skipped
    assert set(report.lemma_far_ratios) == {1.05, 1.1, 1.2}
    assert report.vanishing_residual >= 0.0
    assert report.gamma_size >= 0
