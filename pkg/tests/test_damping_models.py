import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dampwave.damping_models import (
    SupportGeometry, dbc_refinement, digamma, digamma_levelset,
    disk_profile, dist_to_support_boundary, eval_damping, rectangle_profile,
    strip_profile, super_ellipse_distance_oracle, super_ellipse_profile,
    thin_profile, verify_dbc)
from dampwave.rate_calculus import GrowthExpr

S = GrowthExpr.small


def test_eval_examples():
    p = strip_profile(1.0, S(pow=2))
    assert eval_damping(p, 1.5, 0.0) == pytest.approx(0.25, rel=1e-14)
    assert eval_damping(p, 0.5, 0.0) == 0.0
    d = disk_profile(1.0, S(pow=2))
    assert eval_damping(d, 0.9, 0.0) == pytest.approx(0.01, rel=1e-12)
    assert eval_damping(d, 0.0, -0.9) == pytest.approx(0.01, rel=1e-12)


def test_geometry_invariants():
    with pytest.raises(ValueError):
        SupportGeometry.strip(0.0)
    with pytest.raises(ValueError):
        SupportGeometry.disk(4.0)
    with pytest.raises(ValueError):
        SupportGeometry.super_ellipse(1, 1, 2, 4)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
def test_strip_is_y_invariant(x, y1, y2):
    p = strip_profile(0.7, S(pow=3, log_pow=-1), smoothing=0.4)
    assert p.eval(x, y1) == p.eval(x, y2)


@pytest.mark.parametrize("profile", [
    strip_profile(1.0, S(pow=2)),
    thin_profile(S(pow=1, log_pow=-1)),
    disk_profile(1.2, S(exp_coeff=1, exp_pow=1), center=(0.5, -0.3)),
    rectangle_profile(1.0, 2.0, S(pow=1), S(pow=2)),
    super_ellipse_profile(1.5, 1.0, 4, 2, S(pow=2), smoothing=0.2),
])
def test_nonneg_and_zero_off_support(profile):
    xs = np.linspace(-math.pi, math.pi, 129)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    W = profile.eval(X, Y)
    d = dist_to_support_boundary(profile.geometry, X, Y)
    assert np.all(W >= 0)
    assert np.all(W[d == 0] == 0)


def test_periodic_wrap():
    p = disk_profile(1.0, S(pow=2), center=(3.0, 0.0))
    # the disk straddles the seam x = +-pi
    assert p.eval(-3.0, 0.0) == pytest.approx((1 - (2 * math.pi - 6)) ** 2, rel=1e-12)
    xs = np.linspace(-5, 5, 41)
    assert np.allclose(p.eval(xs, 0.3), p.eval(xs + 2 * math.pi, 0.3 - 4 * math.pi))


def test_distance_examples():
    assert dist_to_support_boundary(SupportGeometry.disk(1.0), 0.7, 0.0) == pytest.approx(0.3)
    g2 = SupportGeometry.super_ellipse(1, 1, 2, 2)
    assert dist_to_support_boundary(g2, 0.0, 0.7) == pytest.approx(0.3, rel=1e-12)
    g4 = SupportGeometry.super_ellipse(1, 1, 4, 4)
    assert dist_to_support_boundary(g4, 0.9, 0.0) == pytest.approx(0.1, rel=1e-9)
    assert dist_to_support_boundary(g4, 2.0, 0.0) == 0.0


def test_super_ellipse_distance_matches_dense_oracle():
    g = SupportGeometry.super_ellipse(1.5, 1.0, 4, 2)
    rng = np.random.default_rng(7)
    pts = []
    while len(pts) < 1000:
        x, y = rng.uniform(-1.5, 1.5), rng.uniform(-1, 1)
        if abs(x / 1.5) ** 4 + abs(y) ** 2 < 1:
            pts.append((x, y))
    pts = np.array(pts)
    got = dist_to_support_boundary(g, pts[:, 0], pts[:, 1])
    want = np.array([super_ellipse_distance_oracle(g, x, y) for x, y in pts])
    assert np.max(np.abs(got - want) / want) <= 1e-6


def test_distance_comparability_on_axis():
    # near (a, 0) the distance is comparable to a - x, the defining-function gap
    g = SupportGeometry.super_ellipse(1, 1, 4, 4)
    for x in (0.9, 0.99, 0.999):
        d = dist_to_support_boundary(g, x, 0.0)
        assert 0.5 <= d / (1 - x) <= 1.0 + 1e-9


def test_smoothing_keeps_growth_near_boundary():
    raw = strip_profile(1.0, S(pow=2))
    sm = strip_profile(1.0, S(pow=2), smoothing=0.5)
    xs = np.linspace(1.0, 1.5, 50)
    assert np.array_equal(raw.eval(xs), sm.eval(xs))
    # flat on the far side, so smooth across the seam at x = pi
    far = np.linspace(2.0, math.pi, 20)
    assert np.allclose(sm.eval(far), 1.0)
    # and monotone in between
    mid = np.linspace(1.5, 2.0, 200)
    assert np.all(np.diff(sm.eval(mid)) >= 0)


def test_log_envelope_gets_cap():
    p = strip_profile(0.5, S(pow=1, log_pow=-2))
    assert p.smoothing == 0.3 and p.notes
    assert np.all(np.isfinite(p.eval(np.linspace(-math.pi, math.pi, 101))))


# -- derivative bounds -----------------------------------------------------------

@pytest.mark.parametrize("beta", [F(1), F(2), F(3, 2), F(5)])
def test_dbc_power_constant_is_beta(beta):
    p = strip_profile(1.0, S(pow=beta))
    rep = verify_dbc(p, S(pow=1 / beta), None, 1024)
    assert rep.C_q == pytest.approx(float(beta), rel=1e-9)
    assert rep.method == "analytic"


@pytest.mark.parametrize("alpha", [F(1), F(2), F(1, 2)])
def test_dbc_exp_profile_finite_and_stable(alpha):
    p = strip_profile(1.0, S(exp_coeff=1, exp_pow=alpha))
    q = S(log_pow=-(alpha + 1) / alpha)
    study = dbc_refinement(p, q, q * q)
    assert study.stable
    assert all(math.isfinite(c) for c in study.C_q)


def test_dbc_wrong_q_detected_by_refinement():
    beta = F(2)
    p = strip_profile(1.0, S(pow=beta))
    good = dbc_refinement(p, S(pow=1 / beta))
    bad = dbc_refinement(p, S(pow=1 / (beta + 1)))
    assert good.stable and not bad.stable
    assert bad.growth > 2


def test_dbc_grid_precondition():
    with pytest.raises(ValueError):
        verify_dbc(strip_profile(1.0, S(pow=2)), S(pow=F(1, 2)), None, 128)


def test_dbc_disk_and_rectangle():
    d = disk_profile(1.0, S(pow=2))
    rep = verify_dbc(d, S(pow=F(1, 2)), S(pow=1), 512)
    assert rep.C_q == pytest.approx(2.0, rel=1e-9) and rep.finite
    r = rectangle_profile(1.0, 1.5, S(pow=2), S(pow=2))
    rep = verify_dbc(r, S(pow=F(1, 4)), None, 512)
    assert rep.method == "finite_difference" and rep.finite


# -- digamma --------------------------------------------------------------------

def test_digamma_examples():
    p = strip_profile(1.0, S(pow=2))
    assert digamma(p, 0.01) == pytest.approx(0.2, rel=1e-12)
    e = strip_profile(1.0, S(exp_coeff=1, exp_pow=1))
    assert digamma(e, math.exp(-10)) == pytest.approx(0.2, rel=1e-12)
    assert digamma(p, 1e6) == pytest.approx(2 * (math.pi - 1))


def test_digamma_matches_levelset():
    p = strip_profile(0.8, S(pow=3, log_pow=-1))
    for z in (1e-4, 1e-3, 1e-2):
        assert digamma(p, z) == pytest.approx(digamma_levelset(p.trace_1d(), z), rel=1e-6)


@given(st.floats(1e-12, 10.0), st.floats(1e-12, 10.0))
@settings(max_examples=50)
def test_digamma_monotone_and_bounded(a, b):
    p = thin_profile(S(pow=2))
    lo, hi = sorted((a, b))
    assert digamma(p, lo) <= digamma(p, hi) <= 2 * math.pi
