"""Tests for the system catalog, constitutive map, and tilting."""

import math

import numpy as np
import pytest

from conftest import catalog_instances, window_samples
from hyperlaw.errors import ConfigurationError, DomainError
from hyperlaw.smallmat import numeric_derivative
from hyperlaw.systems import (SystemDef, compatibility_residual, eval_G,
                              make_system, tilt)


def test_p_system_exp_entropy_pair():
    sys = make_system("p_system", {"family": "exp"})
    for v, u in [(0.0, 0.0), (1.0, -0.5), (-2.0, 3.0)]:
        assert abs(sys.eta([v, u]) - (0.5 * u * u + math.exp(v))) < 1e-14
        assert abs(sys.q([v, u]) - u * (-math.exp(v))) < 1e-14
        assert np.allclose(sys.f([v, u]), [-u, -math.exp(v)])


def test_gamma_law_entropy():
    sys = make_system("gamma_law", {"kappa": 1.0, "gamma": 2.0})
    for r, m in [(1.0, 0.0), (2.0, 1.0), (0.5, -1.5)]:
        assert abs(sys.eta([r, m]) - (m * m / (2 * r) + r * r)) < 1e-13
        assert np.allclose(sys.f([r, m]), [m, m * m / r + r * r])


def test_two_burgers_entropy_flux():
    # q = int h' f_1' + int g' f_2' with h = g = s^2/2,
    # f_1 = u^2/2, f_2 = u^2/2 + 10u
    sys = make_system("two_burgers", {})
    for u1, u2 in [(0.0, 0.0), (1.0, 2.0), (-2.0, 0.5)]:
        expected = u1 ** 3 / 3.0 + (u2 ** 3 / 3.0 + 5.0 * u2 * u2)
        assert abs(sys.q([u1, u2]) - expected) < 1e-13


def test_make_system_rejects_bad_specs():
    with pytest.raises(ConfigurationError):
        make_system("nonsense")
    with pytest.raises(ConfigurationError):
        make_system("gamma_law", {"gamma": 1.0})
    with pytest.raises(ConfigurationError):
        make_system("p_system", {"family": "exp", "a": -1.0})
    with pytest.raises(ConfigurationError):
        make_system("p_system", {"family": "archimedean"})
    with pytest.raises(ConfigurationError):
        make_system("gradient_flux", {"form": "quadratic", "A": 1.0,
                                      "B": 2.0, "C": 1.0})


def test_make_system_accepts_spec_record():
    sys = make_system({"kind": "p_system",
                       "params": {"family": "exp", "a": 2.0, "b": 0.5},
                       "domain": None})
    assert sys.kind == "p_system"
    assert sys.params["a"] == 2.0


def test_eval_G_two_burgers_origin():
    sys = make_system("two_burgers", {})
    g = eval_G(sys, [0.0, 0.0])
    assert np.allclose(g[:, 0], 0.0)
    assert np.allclose(g, 0.0)  # all antiderivative constants are zero


def test_eval_G_p_system_origin():
    sys = make_system("p_system", {"family": "exp"})
    g = eval_G(sys, [0.0, 0.0])
    assert np.allclose(g, [[0.0, 0.0], [0.0, -1.0], [1.0, 0.0]])


def test_eval_G_domain_boundary_errors():
    sys = make_system("gamma_law", {"kappa": 1.0, "gamma": 2.0})
    with pytest.raises(DomainError):
        eval_G(sys, [1e-3, 0.0])  # rho exactly at the open boundary
    burgers = make_system("two_burgers", {})
    with pytest.raises(DomainError):
        eval_G(burgers, [4.0, 0.0])


def test_eval_G_rows_1_2_ignore_entropy():
    base = make_system("p_system", {"family": "exp"})
    tilted = tilt(base, [1.3, -0.7])
    for u in window_samples(base, 10, seed=2):
        assert np.allclose(eval_G(base, u)[:2], eval_G(tilted, u)[:2])


def test_tilt_identity():
    sys = make_system("p_system", {"family": "exp"})
    same = tilt(sys, [0.0, 0.0])
    for u in window_samples(sys, 20, seed=3):
        assert same.eta(u) == pytest.approx(sys.eta(u), abs=1e-15)
        assert same.q(u) == pytest.approx(sys.q(u), abs=1e-15)


def test_tilt_p_system_formulas():
    sys = make_system("p_system", {"family": "exp"})
    # tilt on the u-component
    tu = tilt(sys, [0.0, -2.0])
    # tilt on the v-component; its q~ is the figure-style u(2 - e^v)
    tv = tilt(sys, [-2.0, 0.0])
    for v, u in [(0.0, 0.0), (0.7, -1.2), (-1.0, 2.0)]:
        assert abs(tu.eta([v, u]) - (0.5 * u * u + math.exp(v) - 2 * u)) < 1e-13
        assert abs(tu.q([v, u]) - (u - 2.0) * (-math.exp(v))) < 1e-13
        assert abs(tv.eta([v, u]) - (0.5 * u * u + math.exp(v) - 2 * v)) < 1e-13
        assert abs(tv.q([v, u]) - u * (2.0 - math.exp(v))) < 1e-13


def test_tilt_is_row3_affine_correction():
    sys = make_system("gamma_law", {"kappa": 1.0, "gamma": 3.0})
    c = np.array([0.8, -1.1])
    tilted = tilt(sys, c)
    for u in window_samples(sys, 20, seed=4):
        g0, g1 = eval_G(sys, u), eval_G(tilted, u)
        assert np.allclose(g0[:2], g1[:2])
        assert abs(g1[2, 0] - (g0[2, 0] + c @ u)) < 1e-12
        assert abs(g1[2, 1] - (g0[2, 1] + c @ sys.f(u))) < 1e-12


def test_tilt_composes_additively():
    sys = make_system("p_system", {"family": "exp"})
    twice = tilt(tilt(sys, [1.0, 0.5]), [-0.25, 0.25])
    once = tilt(sys, [0.75, 0.75])
    for u in window_samples(sys, 10, seed=5):
        assert twice.eta(u) == pytest.approx(once.eta(u), abs=1e-13)
        assert twice.q(u) == pytest.approx(once.q(u), abs=1e-13)
    assert np.allclose(twice.extras["tilt"], [0.75, 0.75])


@pytest.mark.parametrize("sys", catalog_instances(), ids=lambda s: s.label)
def test_compatibility_residual_catalog(sys):
    worst = 0.0
    for u in window_samples(sys, 100, seed=6):
        worst = max(worst, float(np.max(np.abs(compatibility_residual(sys, u)))))
    assert worst < 1e-8


def test_compatibility_residual_perturbed_fixture():
    base = make_system("p_system", {"family": "exp"})
    fns = dict(base._fns)
    fns["q"] = lambda u: base._fns["q"](u) + u[0]
    fns["grad_q"] = lambda u: base._fns["grad_q"](u) + np.array([1.0, 0.0])
    broken = SystemDef("p_system", base.params, "perturbed", base.domain,
                       base.window, fns)
    res = compatibility_residual(broken, [0.3, -0.4])
    assert np.allclose(res, [1.0, 0.0], atol=1e-12)


def test_compatibility_residual_tilted():
    for sys in catalog_instances():
        tilted = tilt(sys, [1.7, -2.3])
        for u in window_samples(sys, 25, seed=7):
            assert np.max(np.abs(compatibility_residual(tilted, u))) < 1e-8


@pytest.mark.parametrize("sys", catalog_instances(), ids=lambda s: s.label)
def test_closed_form_derivatives_match_finite_differences(sys):
    # Df, D2f, grad eta, hess eta, grad q, hess q against the
    # central-difference oracle at 100 random window points; errors are
    # measured relative to the magnitude of the derivative itself
    def close(exact, approx, tol):
        scale = max(1.0, float(np.max(np.abs(exact))))
        return float(np.max(np.abs(exact - approx))) < tol * scale

    for u in window_samples(sys, 100, seed=8):
        assert close(sys.df(u), numeric_derivative(sys.f, u, 1), 1e-6)
        assert close(sys.d2f_tensor(u), numeric_derivative(sys.f, u, 2), 1e-5)
        assert close(sys.grad_eta(u), numeric_derivative(sys.eta, u, 1), 1e-6)
        assert close(sys.hess_eta(u), numeric_derivative(sys.eta, u, 2), 1e-5)
        assert close(sys.grad_q(u), numeric_derivative(sys.q, u, 1), 1e-6)
        assert close(sys.hess_q(u), numeric_derivative(sys.q, u, 2), 1e-5)


@pytest.mark.parametrize("sys", catalog_instances(), ids=lambda s: s.label)
def test_entropy_hessian_positive_definite(sys):
    for u in window_samples(sys, 100, seed=9):
        h = sys.hess_eta(u)
        assert h[0, 0] > 0
        assert np.linalg.det(h) > 0


def test_directional_second_derivative_is_bilinear():
    sys = make_system("gradient_flux", {"form": "exp", "c": 0.5})
    u = np.array([0.3, -0.2])
    d1, d2 = np.array([1.0, 2.0]), np.array([-0.5, 1.5])
    h = sys.d2f_tensor(u)
    expected = np.array([d1 @ h[0] @ d2, d1 @ h[1] @ d2])
    assert np.allclose(sys.d2f(u, d1, d2), expected)
    assert np.allclose(sys.d2f(u, d1, d2), sys.d2f(u, d2, d1))


def test_euler_primitive_helpers():
    sys = make_system("isentropic_euler", {"kappa": 1.0, "gamma": 2.0})
    rho, vel = sys.extras["primitive"](np.array([2.0, 3.0]))
    assert rho == 2.0 and vel == 1.5
    assert np.allclose(sys.extras["from_primitive"]((2.0, 1.5)), [2.0, 3.0])


def test_windows_inside_domains():
    for sys in catalog_instances():
        lo, hi = sys.window
        assert sys.domain.contains(lo + 1e-9)
        assert sys.domain.contains(hi - 1e-9)
        assert sys.domain.contains(0.5 * (lo + hi))
