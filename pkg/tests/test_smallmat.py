"""Tests for the 3x2 primitives and the finite-difference oracle."""

import math

import numpy as np
import pytest

from hyperlaw.smallmat import (numeric_derivative, rank_one_factor,
                               rank_one_residual, subdet)


def test_subdet_identity_rows():
    m = np.array([[1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    assert subdet(m, (1, 2)) == 1.0
    assert subdet(m, (1, 3)) == 5.0
    assert subdet(m, (2, 3)) == -5.0


def test_subdet_antisymmetry():
    rng = np.random.default_rng(7)
    for _ in range(50):
        m = rng.normal(size=(3, 2))
        for r, s in [(1, 2), (1, 3), (2, 3)]:
            assert subdet(m, (r, s)) == -subdet(m, (s, r))


def test_subdet_rejects_bad_row_pairs():
    m = np.zeros((3, 2))
    for rows in [(1, 1), (0, 2), (1, 4), (2, 2)]:
        with pytest.raises(ValueError):
            subdet(m, rows)


def test_subdet_vanishes_on_rankine_hugoniot_pair():
    # p-system, p(v) = -e^v: a shock from (0,0) with v_R = 1 has
    # sigma^2 = -(p_L - p_R)/(v_L - v_R) = e - 1 and u_R = u_L - sigma
    # (first jump relation).  The first two rows of G(U_L) - G(U_R) are
    # then proportional, so det_12 vanishes.
    p = lambda v: -math.exp(v)
    eta = lambda v, u: 0.5 * u * u + math.exp(v)
    vl, ul = 0.0, 0.0
    vr = 1.0
    sigma = math.sqrt(math.e - 1.0)
    ur = ul + sigma * (vl - vr)
    gl = np.array([[vl, -ul], [ul, p(vl)], [eta(vl, ul), ul * p(vl)]])
    gr = np.array([[vr, -ur], [ur, p(vr)], [eta(vr, ur), ur * p(vr)]])
    # sanity: the pair really satisfies Rankine-Hugoniot
    assert abs(sigma * (vl - vr) - (-ul - -ur)) < 1e-14
    assert abs(sigma * (ul - ur) - (p(vl) - p(vr))) < 1e-14
    assert abs(subdet(gl - gr, (1, 2))) < 1e-10


def test_rank_one_residual_outer_product():
    m = np.outer([1.0, 2.0, 3.0], [4.0, 5.0])
    assert rank_one_residual(m) < 1e-12


def test_rank_one_residual_zero_matrix():
    assert rank_one_residual(np.zeros((3, 2))) == 0.0


def test_rank_one_residual_orthonormal_rows():
    # singular values of [[1,0],[0,1],[0,0]] are (1,1): Gram is the
    # identity, so the residual equals the second singular value 1
    m = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    assert abs(rank_one_residual(m) - 1.0) < 1e-14


def test_rank_one_residual_random_outer_products():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        a = rng.normal(size=3) * 10.0 ** rng.integers(-3, 4)
        n = rng.normal(size=2)
        m = np.outer(a, n)
        scale = max(1.0, float(np.abs(m).max()))
        assert rank_one_residual(m) < 1e-12 * scale


def test_rank_one_residual_scale_equivariant():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(3, 2))
    r = rank_one_residual(m)
    for t in [-2.0, 0.5, 7.25]:
        assert abs(rank_one_residual(t * m) - abs(t) * r) < 1e-12 * max(1.0, r)


def test_rank_one_residual_matches_svd():
    rng = np.random.default_rng(13)
    for _ in range(200):
        m = rng.normal(size=(3, 2))
        s = np.linalg.svd(m, compute_uv=False)
        assert abs(rank_one_residual(m) - s[1]) < 1e-12 * max(1.0, s[0])


def test_rank_one_factor_recovers_outer_product():
    a = np.array([2.0, -1.0, 0.5])
    n = np.array([0.6, 0.8])
    fa, fn, res = rank_one_factor(np.outer(a, n))
    assert res < 1e-12
    assert abs(np.linalg.norm(fn) - 1.0) < 1e-12
    # the factorization is unique up to a joint sign flip
    sign = np.sign(fn @ n)
    assert np.max(np.abs(sign * fa - a)) < 1e-12
    assert np.max(np.abs(sign * fn - n)) < 1e-12


def test_rank_one_factor_matches_svd_on_random_input():
    rng = np.random.default_rng(17)
    for _ in range(100):
        m = rng.normal(size=(3, 2))
        a, n, res = rank_one_factor(m)
        s = np.linalg.svd(m, compute_uv=False)
        assert abs(res - s[1]) < 1e-12 * max(1.0, s[0])
        assert abs(res - rank_one_residual(m)) < 1e-12 * max(1.0, s[0])
        # outer(a, n) is the closest rank-one matrix in Frobenius norm
        assert abs(np.linalg.norm(m - np.outer(a, n)) - res) \
            < 1e-10 * max(1.0, s[0])


def test_rank_one_factor_zero_and_shape():
    a, n, res = rank_one_factor(np.zeros((3, 2)))
    assert res == 0.0
    assert np.all(a == 0.0)
    assert abs(np.linalg.norm(n) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        rank_one_factor(np.zeros((2, 2)))


def test_numeric_derivative_square_field():
    grad = numeric_derivative(lambda u: u[0] ** 2, np.array([3.0, 7.0]),
                              order=1, step=1e-5)
    assert abs(grad[0] - 6.0) < 1e-8
    assert abs(grad[1]) < 1e-8


def test_numeric_derivative_gamma_law_entropy_hessian():
    # eta(rho, m) = m^2/(2 rho) + rho^2 (gamma-law kappa=1, gamma=2);
    # closed-form Hessian at (1, 0) is [[m^2/rho^3 + 2, -m/rho^2],
    # [-m/rho^2, 1/rho]] = [[2, 0], [0, 1]]
    eta = lambda u: u[1] ** 2 / (2.0 * u[0]) + u[0] ** 2
    hess = numeric_derivative(eta, np.array([1.0, 0.0]), order=2)
    assert np.max(np.abs(hess - np.array([[2.0, 0.0], [0.0, 1.0]]))) < 1e-6


def test_numeric_derivative_constant_field():
    u = np.array([0.3, -1.2])
    assert np.max(np.abs(numeric_derivative(lambda _: 4.5, u, order=1))) < 1e-10
    assert np.max(np.abs(numeric_derivative(lambda _: 4.5, u, order=2))) < 1e-10


def test_numeric_derivative_exact_on_quadratics():
    # degree <= 2 polynomials have zero truncation error for central
    # differences; with step 1e-4 the gradient is exact to rounding
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b, c, d, e, f = rng.normal(size=6)
        poly = lambda u: (a * u[0] ** 2 + b * u[0] * u[1] + c * u[1] ** 2
                          + d * u[0] + e * u[1] + f)
        u = rng.normal(size=2)
        grad = numeric_derivative(poly, u, order=1, step=1e-4)
        exact = np.array([2 * a * u[0] + b * u[1] + d,
                          b * u[0] + 2 * c * u[1] + e])
        assert np.max(np.abs(grad - exact)) < 1e-8


def test_numeric_derivative_vector_field_jacobian():
    f = lambda u: np.array([u[0] * u[1], math.sin(u[0])])
    u = np.array([0.7, -0.4])
    jac = numeric_derivative(f, u, order=1)
    exact = np.array([[u[1], u[0]], [math.cos(u[0]), 0.0]])
    assert np.max(np.abs(jac - exact)) < 1e-8


def test_numeric_derivative_vector_field_hessians():
    f = lambda u: np.array([u[0] ** 2 * u[1], u[1] ** 3])
    u = np.array([1.3, 0.8])
    hess = numeric_derivative(f, u, order=2)
    exact0 = np.array([[2 * u[1], 2 * u[0]], [2 * u[0], 0.0]])
    exact1 = np.array([[0.0, 0.0], [0.0, 6 * u[1]]])
    assert np.max(np.abs(hess[0] - exact0)) < 1e-5
    assert np.max(np.abs(hess[1] - exact1)) < 1e-5


def test_numeric_derivative_propagates_evaluation_errors():
    def fn(u):
        if u[0] <= 0:
            raise ValueError("outside domain")
        return u[0] ** 0.5

    with pytest.raises(ValueError, match="outside domain"):
        numeric_derivative(fn, np.array([1e-9, 0.0]), order=1, step=1e-5)


def test_numeric_derivative_rejects_bad_inputs():
    with pytest.raises(ValueError):
        numeric_derivative(lambda u: u[0], np.zeros(2), order=3)
    with pytest.raises(ValueError):
        numeric_derivative(lambda u: u[0], np.zeros(2), order=1, step=0.0)
