import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dampwave.damping_models import strip_profile, thin_profile
from dampwave.rate_calculus import GrowthExpr
from dampwave.resolvent import (
    StationaryProblem, admissible_modes, auto_N, fourier_cross_check,
    one_d_mode_norms, resolvent_norm, scaling_report, sup_over_E,
    two_d_dense_norm, two_d_norm)

S = GrowthExpr.small
STRIP2 = strip_profile(1.0, S(pow=2))


def test_problem_invariants():
    with pytest.raises(ValueError):
        StationaryProblem(0.1, 0.0, 1.0, 128)
    with pytest.raises(ValueError):
        StationaryProblem(0.1, 0.0, 1.0, 300)
    with pytest.raises(ValueError):
        StationaryProblem(1.0, 0.0, 1.0, 256)


def test_matrix_on_plane_waves():
    prob = StationaryProblem(0.05, 3.0, STRIP2, 256)
    A = prob.matrix()
    x = prob.x
    W = prob.W()
    for k in (0, 1, 7, 40, 85):
        e = np.exp(1j * k * x)
        want = (k * k - 3.0) * e + 1j * W / 0.05 * e
        assert np.allclose(A @ e, want, atol=1e-8 * np.abs(want).max())
        assert np.allclose(prob.apply(e), want, atol=1e-8 * np.abs(want).max())


@pytest.mark.parametrize("h", [0.5, 0.1, 1e-2, 1e-3])
@pytest.mark.parametrize("method", ["dense_svd", "iterative"])
def test_constant_damping_norm_is_h(h, method):
    r = resolvent_norm(StationaryProblem(h, 0.0, 1.0, 256), method)
    assert r.norm == pytest.approx(h, rel=1e-10)


def test_undamped_example():
    r = resolvent_norm(StationaryProblem(0.5, 0.5, 0.0, 256))
    assert r.norm == pytest.approx(2.0, rel=1e-12)


def test_dense_and_iterative_agree():
    prob = StationaryProblem(1e-2, 1.0, STRIP2, 512)
    d = resolvent_norm(prob, "dense_svd")
    it = resolvent_norm(prob, "iterative")
    assert abs(d.norm - it.norm) / d.norm <= 1e-8
    assert it.certified_residual <= 1e-8 and it.method == "iterative"


@given(st.floats(-1.0, 60.0))
@settings(max_examples=15, deadline=None)
def test_dense_and_iterative_agree_across_E(E):
    prob = StationaryProblem(2.0 ** -6, E, STRIP2, 256)
    d = resolvent_norm(prob, "dense_svd").norm
    assert resolvent_norm(prob, "iterative").norm == pytest.approx(d, rel=1e-8)


@pytest.mark.parametrize("shift", [1, 17, 100])
def test_translation_invariance(shift):
    N = 256
    a = 2 * math.pi * shift / N
    W = STRIP2.trace_1d()
    base = resolvent_norm(StationaryProblem(1e-2, 2.0, W, N)).norm
    moved = resolvent_norm(StationaryProblem(1e-2, 2.0, lambda x: W(x - a), N)).norm
    assert moved == pytest.approx(base, rel=1e-10)


@pytest.mark.parametrize("E", [0.0, 1.8, 10.0])
def test_a_priori_damping_estimate(E):
    h = 2.0 ** -8
    prob = StationaryProblem(h, E, STRIP2, 256)
    r = resolvent_norm(prob, "iterative")
    W = prob.W()
    lhs = np.sum(W * np.abs(r.u) ** 2)
    rhs = h * np.sum(np.abs(r.f) * np.abs(r.u))
    assert lhs <= rhs * (1 + 1e-6)
    # f really is P u
    op_scale = (prob.N / 2) ** 2 + W.max() / h
    assert np.max(np.abs(prob.apply(r.u) - r.f)) <= 1e-12 * op_scale


def test_discretisation_converges():
    h, E = 2.0 ** -8, 1.3231923
    n = [resolvent_norm(StationaryProblem(h, E, STRIP2, N), "iterative").norm for N in (512, 1024)]
    assert abs(n[0] - n[1]) / n[1] <= 1e-6


def test_auto_N():
    assert auto_N(STRIP2, 2.0 ** -12) == 256
    # rho = h^{1/4} for V = z^2: 8/rho rounded up to a power of two, capped
    assert auto_N(thin_profile(S(pow=2)), 2.0 ** -28) == 1024
    assert auto_N(thin_profile(S(pow=2)), 1e-12) == 4096


# -- sup over E -------------------------------------------------------------------

def test_sup_constant_damping():
    r = sup_over_E(1e-2, 1.0, N=256)
    assert r.norm == pytest.approx(1e-2, rel=1e-10)
    assert r.lower_bound


def test_sup_finds_eigen_peak():
    r = sup_over_E(2.0 ** -8, STRIP2, N=256)
    plain = sup_over_E(2.0 ** -8, STRIP2, N=256, seeds=False)
    assert r.norm >= plain.norm * (1 - 1e-12)
    assert 1.0 < r.E_star < 1.6 and r.norm == pytest.approx(3.588, rel=1e-3)
    E, nrm = r
    assert (E, nrm) == (r.E_star, r.norm)


def test_sup_window_clipped_to_resolved_band():
    r = sup_over_E(2.0 ** -20, STRIP2, N=256, coarse_n=64)
    assert r.window[1] == pytest.approx((256 / 3) ** 2)


def test_strip_local_exponent_steepens_toward_quarter():
    # boundary-layer analysis: norm ~ (sigma + c h^{1/4})^2 / h^{1/4}, so the local
    # exponent climbs to -1/4 only as h^{1/4} << sigma
    hs = [2.0 ** -8, 2.0 ** -12, 2.0 ** -16]
    vals = [sup_over_E(h, STRIP2, N=N, E_max=50.0).norm for h, N in zip(hs, (256, 256, 512))]
    slopes = np.diff(np.log(vals)) / np.diff(np.log(hs))
    assert slopes[1] < slopes[0] < 0
    assert -0.25 - 0.05 < slopes[1] < -0.15


# -- two dimensions ---------------------------------------------------------------

def test_admissible_modes():
    assert admissible_modes(10.0) == [10]
    assert admissible_modes(10.0, E_max=40.0) == [8, 9, 10]


def test_two_d_constant_damping():
    assert two_d_norm(10.0, 1.0, N=256) == pytest.approx(0.1, rel=1e-10)


def test_fourier_decomposition_against_dense_2d():
    lam = 6.0
    W1 = STRIP2.trace_1d()
    dense = two_d_dense_norm(lam, lambda x, y: W1(x), Nx=64, Ny=16)
    per_mode = one_d_mode_norms(lam, W1, 64, range(-8, 8))
    assert dense == pytest.approx(max(per_mode), rel=1e-10)


@pytest.mark.parametrize("lam", [16.0, 64.0, 256.0])
def test_fourier_cross_check(lam):
    c = fourier_cross_check(lam, STRIP2, N=256)
    assert abs(c.lam_matched - lam) <= 1.0
    assert 0.5 <= c.ratio <= 2.0


def test_thin_two_d_scaling():
    thin = thin_profile(S(pow=2))
    lams = [16.0, 32.0, 64.0, 128.0, 256.0]
    vals = [two_d_norm(l, thin) * l for l in lams]
    slope = np.polyfit(np.log(lams), np.log(vals), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.05)


# -- scaling reports --------------------------------------------------------------

def test_scaling_report_exact_recovery():
    hs = 2.0 ** -np.arange(4, 13)
    rep = scaling_report(list(zip(hs, hs ** -0.25)), S(pow=-0.25))
    assert rep.passed and rep.pow_hat == pytest.approx(-0.25, abs=1e-10)


def test_scaling_report_constant_damping():
    hs = 2.0 ** -np.arange(4, 10)
    samples = [(h, sup_over_E(h, 1.0, N=256).norm) for h in hs]
    rep = scaling_report(samples, S(pow=1))
    assert rep.passed and rep.pow_hat == pytest.approx(1.0, abs=1e-8)


def test_scaling_report_needs_six_points():
    with pytest.raises(ValueError):
        scaling_report([(0.1, 1.0)] * 5, S(pow=1))
