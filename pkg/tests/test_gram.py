import numpy as np
import pytest
from numpy.testing import assert_allclose

from spline_system_verifier.bspline import SplineBasis, evaluate
from spline_system_verifier.gram import (
    GramSystem,
    dual_stability_ratio,
    dual_to_primal,
    export_dense,
    fit_decay,
    fit_geometric_envelope,
    inverse_entry,
    primal_to_dual,
    project,
    projection_infinity_norm,
    read_dense,
)
from spline_system_verifier.knots import make_sequence, partition_for
from spline_system_verifier.models import DUAL, INTERVAL, PRIMAL, TORUS, Spline


def _gram(domain, k, n, seed=1):
    points = np.random.default_rng(seed).random(n) * 0.98 + 0.01
    return GramSystem(SplineBasis(partition_for(make_sequence(domain, points, k))))


@pytest.mark.parametrize(
    "domain,k,n,mode",
    [
        (INTERVAL, 3, 12, "banded"),
        (TORUS, 1, 12, "banded"),
        (TORUS, 2, 5, "dense"),
        (TORUS, 3, 20, "bordered"),
    ],
)
def test_solve_inverts_gram(domain, k, n, mode):
    g = _gram(domain, k, n)
    assert g.mode == mode
    rhs = np.random.default_rng(2).standard_normal(g.dimension)
    assert_allclose(g.matrix @ g.solve(rhs), rhs, atol=1e-9)
    assert_allclose(g.inverse_matrix() @ g.matrix, np.eye(g.dimension), atol=1e-8)


def test_inverse_entry_is_symmetric():
    g = _gram(INTERVAL, 2, 10)
    assert inverse_entry(g, -2, 3) == pytest.approx(inverse_entry(g, 3, -2))


def test_dual_and_primal_conversions_are_inverse():
    g = _gram(TORUS, 3, 16)
    f = Spline(g.basis, PRIMAL, np.random.default_rng(4).standard_normal(g.dimension))
    dual = primal_to_dual(f, g)
    assert dual.repr == DUAL
    assert_allclose(dual_to_primal(dual, g).coeffs, f.coeffs, atol=1e-9)


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_projection_reproduces_splines(domain):
    g = _gram(domain, 3, 12)
    f = Spline(g.basis, PRIMAL, np.random.default_rng(5).standard_normal(g.dimension))
    projected = project(g, lambda t: evaluate(f, t))
    assert_allclose(projected.coeffs, f.coeffs, atol=1e-8)


def _smooth(t):
    return np.cos(7.0 * t) * np.exp(t) + t ** 5


@pytest.mark.parametrize("domain,k", [(INTERVAL, 2), (INTERVAL, 4), (TORUS, 3)])
def test_projection_residual_is_orthogonal_to_the_space(domain, k):
    g = _gram(domain, k, 10)
    projected = project(g, _smooth)
    pieces = g.basis.pieces()
    nodes, weights = np.polynomial.legendre.leggauss(30)
    half = 0.5 * (pieces[:, 1] - pieces[:, 0])
    x = (pieces[:, :1] + half[:, None] * (nodes[None, :] + 1.0)).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    residual = _smooth(x) - evaluate(projected, x)
    B = g.basis.collocation(x).toarray()
    assert_allclose(B.T @ (w * residual), 0.0, atol=1e-11)
    s = np.random.default_rng(9).standard_normal(g.dimension)
    assert abs(np.sum(w * residual * (B @ s))) < 1e-10


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_projection_is_idempotent(domain):
    g = _gram(domain, 3, 10)
    once = project(g, _smooth)
    twice = project(g, lambda t: evaluate(once, t))
    assert_allclose(twice.coeffs, once.coeffs, atol=1e-9)


def test_projection_norm_is_at_least_one():
    g = _gram(INTERVAL, 2, 8)
    assert projection_infinity_norm(g, points_per_interval=16) >= 1.0 - 1e-9


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_piecewise_constant_projection_has_norm_one(domain):
    # the kernel of the L2 projection onto step functions is nonnegative with unit mass
    g = _gram(domain, 1, 10)
    assert projection_infinity_norm(g, points_per_interval=8) == pytest.approx(1.0, abs=1e-12)


def _dense_kernel_norm(g, points_per_interval, per_piece=4000):
    pieces = g.basis.pieces()
    widths = pieces[:, 1] - pieces[:, 0]
    t = np.linspace(0.0, 1.0, points_per_interval, endpoint=False)
    xs = np.append((pieces[:, :1] + widths[:, None] * t[None, :]).ravel(), 1.0)
    coeffs = g.solve(g.basis.collocation(xs).toarray().T)
    # midpoint rule inside every knot interval
    u = (np.arange(per_piece) + 0.5) / per_piece
    ys = (pieces[:, :1] + widths[:, None] * u[None, :]).ravel()
    weights = np.repeat(widths / per_piece, per_piece)
    kernel = g.basis.collocation(ys) @ coeffs
    return float((weights @ np.abs(kernel)).max())


@pytest.mark.parametrize("domain,k", [(INTERVAL, 2), (TORUS, 2), (INTERVAL, 3)])
def test_projection_norm_matches_dense_quadrature(domain, k):
    g = _gram(domain, k, 9, seed=3)
    got = projection_infinity_norm(g, points_per_interval=6)
    assert got == pytest.approx(_dense_kernel_norm(g, 6), rel=1e-6)
    assert got > 1.0


def test_fit_geometric_envelope_exact_decay():
    d = np.array([0, 1, 2, 3, 1, 2])
    mags = np.array([2.0, 1.0, 0.5, 0.25, 0.5, 0.1])
    fit = fit_geometric_envelope(d, mags)
    assert fit.q == pytest.approx(0.5)
    assert fit.C == pytest.approx(2.0)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.accepted


def test_fit_geometric_envelope_degenerate_inputs():
    assert fit_geometric_envelope(np.array([], dtype=int), np.array([])).C == 0.0
    single = fit_geometric_envelope(np.array([2, 2]), np.array([0.3, 0.7]))
    assert single.C == pytest.approx(0.7)
    assert single.q == 0.0


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_inverse_gram_decays(domain):
    fit = fit_decay(_gram(domain, 2, 40))
    assert 0.0 < fit.q < 1.0


def test_dense_export(tmp_path):
    g = _gram(INTERVAL, 2, 6)
    path = tmp_path / "gram.txt"
    text = export_dense(g, path)
    assert path.read_text(encoding="utf-8") == text
    assert_allclose(read_dense(text), g.matrix, rtol=0, atol=0)


@pytest.mark.parametrize("domain", [INTERVAL, TORUS])
def test_dual_stability_ratio_is_finite(domain):
    g = _gram(domain, 2, 12)
    b = np.random.default_rng(4).standard_normal(g.basis.dimension)
    for p in (1.5, 2.0, 3.0):
        ratio = dual_stability_ratio(g, b, p)
        assert 0.0 < ratio < np.inf
