import numpy as np
import pytest
from numpy.testing import assert_array_equal

from spline_system_verifier.harness.unconditionality import sign_pattern, unconditionality_trial
from spline_system_verifier.knots import make_sequence
from spline_system_verifier.models import INTERVAL, TORUS
from spline_system_verifier.ortho import build_system

POINTS = [0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875, 0.3]


def test_sign_pattern_is_deterministic_per_trial():
    first = sign_pattern(7, 3, 50)
    assert set(np.unique(first)) <= {-1.0, 1.0}
    assert_array_equal(first, sign_pattern(7, 3, 50))
    assert not np.array_equal(first, sign_pattern(7, 4, 50))
    assert not np.array_equal(first, sign_pattern(8, 3, 50))


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
@pytest.mark.parametrize("k", [2, 3])
def test_signs_preserve_l2_norm(domain, k):
    system = build_system(make_sequence(domain, POINTS, k))
    coeffs = np.random.default_rng(0).standard_normal(system.size)
    report = unconditionality_trial(system, coeffs, 2.0, trials=6, seed=1, m=2)
    assert report.r_max == pytest.approx(1.0, abs=1e-8)
    assert report.r_min == pytest.approx(1.0, abs=1e-8)
    assert report.r_S == pytest.approx(1.0, abs=1e-8)
    assert report.norm_f == pytest.approx(float(np.linalg.norm(coeffs)), rel=1e-8)
    assert report.trials == 6


def test_sign_changes_bounded_for_other_exponents():
    system = build_system(make_sequence(INTERVAL, POINTS, 2))
    coeffs = np.random.default_rng(2).standard_normal(system.size)
    report = unconditionality_trial(system, coeffs, 1.5, trials=10, seed=3, m=2)
    assert 0.0 < report.r_min <= report.r_max
    assert report.r_S > 0.0


def test_invalid_arguments():
    system = build_system(make_sequence(INTERVAL, POINTS[:3], 2))
    coeffs = np.ones(system.size)
    with pytest.raises(ValueError):
        unconditionality_trial(system, coeffs, 1.0, trials=2, seed=0)
    with pytest.raises(ValueError):
        unconditionality_trial(system, coeffs, 2.0, trials=0, seed=0)
    with pytest.raises(ValueError):
        unconditionality_trial(system, np.zeros(system.size), 2.0, trials=2, seed=0)
