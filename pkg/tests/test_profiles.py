import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from maxvel.profiles import (as_profile, derivative_profile, make_smooth_step, profile_squared,
                             squared)


def test_step_support():
    F = make_smooth_step(1.0, 0.25)
    assert F(0.5) == 0.0 and F(0.75) == 0.0
    assert F(1.5) == 1.0 and F(1.25) == 1.0
    D = make_smooth_step(1.0, 0.25, "down")
    assert D(0.5) == 1.0 and D(1.5) == 0.0


def test_step_rejects_bad_width():
    with pytest.raises(ValueError):
        make_smooth_step(1.0, 0.0)
    with pytest.raises(ValueError):
        make_smooth_step(1.0, 0.1, "sideways")


@given(st.floats(-5, 5), st.floats(0.05, 3.0))
def test_step_monotone_and_partition(c, w):
    F = make_smooth_step(c, w)
    a = np.linspace(c - 2 * w, c + 2 * w, 401)
    v = F(a)
    assert np.all(np.diff(v) >= -1e-15)
    assert np.all(F(a) + F.complement()(a) == 1.0)
    assert np.all(F.deriv(a[np.abs(a - c) >= w]) == 0.0)


def test_derivative_sup_scales_inversely_with_width():
    a = np.linspace(-1, 1, 20001)
    s1 = np.max(make_smooth_step(0.0, 0.4).deriv(a))
    s2 = np.max(make_smooth_step(0.0, 0.2).deriv(a))
    assert abs(s2 / s1 - 2.0) < 0.1
    assert np.isclose(make_smooth_step(0.0, 0.2).sup_deriv(), s2, rtol=1e-6)


def test_derivative_matches_finite_difference():
    F = make_smooth_step(0.3, 0.7)
    a = np.linspace(-0.3, 0.9, 97)
    h = 1e-5
    fd = (F(a + h) - F(a - h)) / (2 * h)
    assert np.max(np.abs(fd - F.deriv(a))) < 1e-8
    fd2 = (F.deriv(a + h) - F.deriv(a - h)) / (2 * h)
    assert np.max(np.abs(fd2 - F.deriv(a, 2))) < 1e-6


@pytest.mark.parametrize("lam", [0.0, 0.7, 3.0, 11.0, 40.0])
def test_fourier_sampler_matches_quadrature(lam):
    F = make_smooth_step(1.0, 0.5)
    re = quad(lambda a: F.deriv(a) * np.cos(lam * a), F.lo, F.hi, epsabs=1e-14, limit=200)[0]
    im = quad(lambda a: -F.deriv(a) * np.sin(lam * a), F.lo, F.hi, epsabs=1e-14, limit=200)[0]
    assert abs(F.deriv_hat(np.array([lam]))[0] - (re + 1j * im)) < 1e-10
    p = as_profile(F)
    assert abs(p.deriv_hat(np.array([lam]))[0] - (re + 1j * im)) < 1e-10


def test_fourier_inversion():
    # int Fhat'(l) e^{i l a} dl = 2 pi F'(a)
    F = make_smooth_step(0.2, 0.5)
    lam = np.linspace(-400, 400, 160001)
    hat = F.deriv_hat(lam)
    for a in (0.0, 0.2, 0.5):
        val = np.trapezoid(hat * np.exp(1j * lam * a), lam).real
        assert abs(val - 2 * np.pi * F.deriv(a)) < 1e-6


def test_lambda_squared_moment_is_finite():
    F = make_smooth_step(0.0, 1.0)
    lam = np.linspace(0, 4000, 400001)
    w = lam ** 2 * np.abs(F.deriv_hat(lam))
    tail = np.trapezoid(w[lam > 2000], lam[lam > 2000])
    assert tail < 1e-3 * np.trapezoid(w, lam)


def test_derived_profiles():
    F = make_smooth_step(1.0, 0.3)
    a = np.linspace(0.5, 1.5, 41)
    assert np.allclose(squared(F)(a), F(a) ** 2)
    assert np.allclose(profile_squared(F)(a), F(a) ** 2)
    d = derivative_profile(F)
    assert np.allclose(d(a), F.deriv(a))
    assert d.left == d.right == 0.0
    assert np.isclose(np.max(derivative_profile(F, normalize=True)(np.linspace(0.7, 1.3, 2001))), 1.0, rtol=1e-5)
    p = as_profile(F)
    assert np.isclose(p.first_moment, F.first_moment, rtol=1e-12)
