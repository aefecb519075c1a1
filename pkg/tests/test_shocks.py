"""Hugoniot continuation, Liu/Lax checks, dissipation, rank-one scan."""

import math

import numpy as np
import pytest

from hyperlaw.systems import make_system, eval_G
from hyperlaw.eigen import eigenframe, sector_search
from hyperlaw.smallmat import subdet
from hyperlaw.shocks import (
    trace_hugoniot,
    liu_lax_check,
    dissipation_profile,
    rank_one_scan,
    star_shape_probe,
    sector_side_check,
    curve_continuity_probe,
    level_crossings,
    last_exit,
)
from conftest import catalog_instances


@pytest.mark.parametrize("sys", catalog_instances(), ids=lambda s: s.label)
@pytest.mark.parametrize("family", [1, 2])
def test_base_sample_and_rh_residual(sys, family):
    lo, hi = sys.window
    u0 = 0.5 * (np.asarray(lo) + np.asarray(hi))
    curve = trace_hugoniot(sys, u0, family, span=(-0.6, 0.6), step=0.02)
    fr = eigenframe(sys, u0)
    base = curve.sample_at(0.0)
    assert base.s == 0.0
    assert np.array_equal(base.u, u0)
    assert base.sigma == (fr.lam1 if family == 1 else fr.lam2)
    sv = curve.s_values()
    assert np.all(np.diff(sv) > 0)
    assert max(sm.rh_residual for sm in curve.samples) < 1e-8


def test_rh_and_algebraic_relation_along_curve():
    # p = -e^v: the jump conditions collapse to
    # (u - u0)^2 = -(p(v) - p(v0)) (v - v0)
    sys = make_system("p_system")
    curve = trace_hugoniot(sys, [0.0, 0.0], 1, span=(-5.0, 5.0), step=0.02)
    assert max(sm.rh_residual for sm in curve.samples) < 1e-8
    for sm in curve.samples:
        v, u = sm.u
        lhs = u * u
        rhs = -(-math.exp(v) - (-1.0)) * v
        assert abs(lhs - rhs) < 1e-8 * max(1.0, abs(lhs))
        if abs(v) > 1e-10:
            assert abs(sm.sigma * sm.sigma - rhs / (v * v)) < 1e-6


def test_gas_dynamics_closed_form_speeds():
    sys = make_system("gamma_law", {"kappa": 1.0, "gamma": 2.0})
    u0 = np.array([1.0, 0.0])
    pressure = sys.extras["pressure"]
    for family in (1, 2):
        curve = trace_hugoniot(sys, u0, family, span=(-8.0, 8.0), step=0.02)
        checked = 0
        for sm in curve.samples:
            rho, m = sm.u
            if abs(rho - 1.0) < 1e-6:
                continue
            radicand = (pressure(rho) - pressure(1.0)) * (rho - 1.0) / rho
            v_expect = -math.copysign(1.0, sm.s) * math.sqrt(radicand)
            assert abs(m / rho - v_expect) < 1e-6
            checked += 1
        assert checked > 100


def test_third_order_contact_at_base():
    sys = make_system("p_system")
    u0 = np.array([0.0, 0.0])
    fr = eigenframe(sys, u0)
    curve = trace_hugoniot(sys, u0, 1, span=(-0.5, 0.5), step=0.01)
    g = fr.gnl[0]
    for sm in curve.samples:
        assert abs(sm.sigma - fr.lam1) <= abs(g) * abs(sm.s) + 1e-12
    # tangent and linear sigma coefficient at small s
    sm = curve.sample_at(0.01)
    assert np.linalg.norm(sm.u - u0 - sm.s * (-fr.r1)) < 5e-4
    assert abs((sm.sigma - fr.lam1) / sm.s - (-0.5 * g)) < 0.1 * abs(g)


def test_liu_lax_for_concave_pressure():
    sys = make_system("p_system")
    for family in (1, 2):
        curve = trace_hugoniot(sys, [0.0, 0.0], family, span=(-3.0, 3.0),
                               step=0.02)
        rep = liu_lax_check(sys, curve)
        assert rep.liu_ok and rep.lax_ok
        assert not rep.liu_violations and not rep.lax_failures
        # speed strictly decreasing through the base point
        assert rep.sigma_slope_pos < 0 and rep.sigma_slope_neg < 0


def test_chord_speed_for_decoupled_quadratic():
    sys = make_system("two_burgers")
    u0 = np.array([1.0, 2.0])
    curve = trace_hugoniot(sys, u0, 1, span=(-2.0, 2.0), step=0.02)
    for sm in curve.samples:
        assert abs(sm.u[1] - 2.0) < 1e-10          # second component frozen
        assert abs(sm.sigma - 0.5 * (sm.u[0] + 1.0)) < 1e-8
    rep = liu_lax_check(sys, curve)
    assert rep.liu_ok and rep.lax_ok


def test_liu_violation_for_cubic_flux():
    # f(u) = u^3 embedded as the first component; the chord slope
    # (u^3 - uL^3)/(u - uL) has its interior extremum at u = -uL/2
    sys = make_system("two_burgers",
                      {"c1": 1.0, "a1": 0.0, "b1": 0.0, "a2": 1.0,
                       "b2": 60.0})
    u0 = np.array([2.0, 0.0])
    curve = trace_hugoniot(sys, u0, 1, span=(-1.0, 14.0), step=0.02)
    assert curve.states()[:, 0].min() < -1.5
    rep = liu_lax_check(sys, curve)
    assert not rep.monotone_pos
    assert rep.liu_violations
    s_w, _ = rep.liu_violations[0]
    u_w, _, _ = curve.point_at(s_w, sys=sys)
    assert abs(u_w[0] - (-1.0)) < 0.05


def test_dissipation_identity_and_sign():
    sys = make_system("p_system")
    curve = trace_hugoniot(sys, [0.0, 0.0], 1, span=(-3.0, 3.0), step=0.05)
    prof = dissipation_profile(sys, curve)
    by_s = {round(p.s, 12): p for p in prof}
    assert by_s[0.0].direct == 0.0 and by_s[0.0].integral == 0.0
    for p in prof:
        assert p.identity_residual < 1e-6
        assert p.eta_rel >= 0.0
        if 0.0 < p.s <= 3.0:
            assert p.direct < 0.0          # strict entropy dissipation
        if p.s < 0.0:
            assert p.direct > 0.0          # non-entropic side


def test_dissipation_identity_gas_dynamics():
    for gamma in (2.0, 3.0):
        sys = make_system("gamma_law", {"gamma": gamma})
        curve = trace_hugoniot(sys, [1.0, 0.0], 2, span=(-4.0, 4.0),
                               step=0.08)
        prof = dissipation_profile(sys, curve)
        assert len(prof) >= 50
        for p in prof:
            assert p.identity_residual < 1e-6


def test_rank_one_scan_bounded_below():
    sys = make_system("p_system")
    curve = trace_hugoniot(sys, [0.0, 0.0], 1, span=(-5.0, 5.0), step=0.02)
    scan = rank_one_scan(sys, curve, span=(0.1, 5.0))
    assert scan.min_normalized > 1e-6
    assert scan.det12_max < 1e-8
    assert 0.1 <= abs(scan.witness_s) <= 5.0
    assert scan.n_scanned > 100
    with pytest.raises(ValueError):
        rank_one_scan(sys, curve, span=(0.0, 5.0))


def test_jump_condition_forces_vanishing_first_subdet():
    sys = make_system("gamma_law", {"gamma": 2.0})
    curve = trace_hugoniot(sys, [1.5, 0.5], 1, span=(-2.0, 2.0), step=0.02)
    g0 = eval_G(sys, curve.base_point)
    for sm in curve.samples[:: 5]:
        m = g0 - eval_G(sys, sm.u)
        assert abs(subdet(m, (1, 2))) < 1e-8 * max(
            1.0, np.linalg.norm(m) ** 2)


def test_star_shaped_curves():
    for kind, params, u0 in (("p_system", None, [0.0, 0.0]),
                             ("gamma_law", {"gamma": 2.0}, [1.0, 0.0])):
        sys = make_system(kind, params)
        for family in (1, 2):
            curve = trace_hugoniot(sys, u0, family, span=(-3.0, 3.0),
                                   step=0.05)
            ok, witnesses = star_shape_probe(curve)
            assert ok, witnesses
    # a straight locus through the base reports collinear samples
    burgers = make_system("two_burgers")
    line = trace_hugoniot(burgers, [1.0, 2.0], 1, span=(-1.0, 1.0),
                          step=0.05)
    ok, witnesses = star_shape_probe(line)
    assert not ok and witnesses


def test_sector_side_of_one_family_curve():
    sys = make_system("p_system")
    sectors = sector_search(sys, ([-2.0, -2.0], [2.0, 2.0]), n_samples=400)
    curve = trace_hugoniot(sys, [0.0, 0.0], 1, span=(-2.5, 2.5), step=0.02)
    ok, bad = sector_side_check(curve, sectors)
    assert ok, bad
    two = trace_hugoniot(sys, [0.0, 0.0], 2, span=(-1.0, 1.0), step=0.02)
    with pytest.raises(ValueError):
        sector_side_check(two, sectors)


def test_continuity_probe_linear_in_delta():
    sys = make_system("p_system")
    probe = lambda d: curve_continuity_probe(sys, [0.0, 0.0], 1, d,
                                             span=(-2.0, 2.0), step=0.05)
    assert probe(0.0) == 0.0
    d1 = probe(1e-3)
    assert 0 < d1 <= 100 * 1e-3
    d2 = probe(5e-4)
    assert d2 <= 0.75 * d1          # roughly linear scaling


def test_continuity_probe_near_domain_edge():
    sys = make_system("gamma_law", {"gamma": 2.0})
    disp = curve_continuity_probe(sys, [0.25, 0.0], 1, 1e-3,
                                  span=(-3.0, 1.0), step=0.05)
    assert np.isfinite(disp) and disp <= 0.1


def test_truncation_at_domain_boundary():
    sys = make_system("gamma_law", {"gamma": 2.0})
    curve = trace_hugoniot(sys, [0.2, 0.0], 1, span=(-6.0, 0.5), step=0.02)
    assert curve.truncated_neg
    assert not curve.truncated_pos
    assert all(sm.u[0] > 1e-3 for sm in curve.samples)
    assert max(sm.rh_residual for sm in curve.samples) < 1e-8


def test_point_at_is_on_curve():
    sys = make_system("p_system")
    curve = trace_hugoniot(sys, [0.0, 0.0], 1, span=(-2.0, 2.0), step=0.1)
    f0 = sys.f(curve.base_point)
    for s in (-1.234567, -0.05, 0.0333, 1.77):
        u, sigma, t = curve.point_at(s, sys=sys)
        rh = np.linalg.norm(sigma * (u - curve.base_point)
                            - (sys.f(u) - f0))
        assert rh < 1e-10
        assert abs(np.linalg.norm(t) - 1.0) < 1e-10
    with pytest.raises(ValueError):
        curve.point_at(5.0, sys=sys)


def test_level_crossings_and_last_exit():
    sys = make_system("p_system")
    curve = trace_hugoniot(sys, [0.0, 0.0], 1, span=(-4.0, 4.0), step=0.02)
    c = np.zeros(2)
    level = 2.0
    hits = level_crossings(sys, curve, c, level)
    assert hits, "curve must cross the level"
    for s_star, u_star in hits:
        assert abs(sys.eta(u_star) - level) < 1e-9
        # crossing points still satisfy the jump condition
        _, sigma, _ = curve.point_at(s_star, sys=sys)
        rh = np.linalg.norm(sigma * (u_star - curve.base_point)
                            - (sys.f(u_star) - sys.f(curve.base_point)))
        assert rh < 1e-9
    s_neg, s_pos = last_exit(sys, curve, c, level)
    for s_out, sign in ((s_neg, -1), (s_pos, +1)):
        if s_out is None:
            continue
        for sm in curve.samples:
            if sign * sm.s > sign * s_out + 1e-9:
                assert sys.eta(sm.u) > level
