import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from lattice_spectra.lineshape import (
    SQRT_2LN2, ComponentParams, CompositeParams, compose_gamma, compose_sigma, fwhm, gaussian,
    lorentzian, model_fwhm, olivero_fwhm, rayleigh_components, rayleigh_lineshape, voigt,
    voigt_fwhm)

width = st.floats(0.05, 20.0)


def voigt_quad(w, gamma, sigma):
    """Direct convolution integral, split at the Gaussian centre for accuracy."""
    f = lambda x: gamma / (np.pi * (x**2 + gamma**2)) * np.exp(-(w - x) ** 2 / (2 * sigma**2))
    lim = 40 * sigma
    pts = sorted({w - lim, w, w + lim})
    total = sum(quad(f, a, b, epsabs=0, epsrel=1e-13, limit=500)[0] for a, b in zip(pts, pts[1:]))
    return total / (sigma * np.sqrt(2 * np.pi))


def pairs(n, seed):
    rng = np.random.default_rng(seed)
    return list(zip(10 ** rng.uniform(-1, 1, n), 10 ** rng.uniform(-1, 1, n)))


# -- kernels -------------------------------------------------------------------

def test_lorentzian_values():
    assert lorentzian(0.0, 2.0) == pytest.approx(1 / (2 * np.pi))
    assert lorentzian(2.0, 2.0) == pytest.approx(1 / (4 * np.pi))


def test_lorentzian_normalization():
    g = 1.7
    val = quad(lorentzian, -1e4 * g, 1e4 * g, args=(g,), points=[0.0], limit=500)[0]
    assert val == pytest.approx(1.0, abs=1e-4)


def test_gaussian_values_and_normalization():
    s = 0.9
    assert gaussian(0.0, s) == pytest.approx(1 / (s * np.sqrt(2 * np.pi)))
    assert quad(gaussian, -np.inf, np.inf, args=(s,))[0] == pytest.approx(1.0, abs=1e-12)
    assert fwhm(lambda w: gaussian(w, s)) == pytest.approx(2 * s * SQRT_2LN2, rel=1e-6)


def test_kernel_width_errors():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            lorentzian(0.0, bad)
        with pytest.raises(ValueError):
            gaussian(0.0, bad)
    with pytest.raises(ValueError):
        voigt(0.0, 1.0, -0.1)
    with pytest.raises(ValueError):
        voigt(0.0, 0.0, 1.0)


@pytest.mark.parametrize("gamma,sigma", pairs(20, 0))
def test_voigt_against_quadrature(gamma, sigma):
    offsets = np.linspace(-5, 5, 50) * (gamma + sigma)
    ours = voigt(offsets, gamma, sigma)
    ref = np.array([voigt_quad(w, gamma, sigma) for w in offsets])
    np.testing.assert_allclose(ours, ref, rtol=1e-9)


@pytest.mark.parametrize("gamma,sigma", pairs(5, 1))
def test_voigt_normalization(gamma, sigma):
    val = quad(voigt, -np.inf, np.inf, args=(gamma, sigma), limit=500)[0]
    assert val == pytest.approx(1.0, abs=1e-6)


def test_voigt_zero_sigma_is_lorentzian():
    w = np.linspace(-10, 10, 101)
    np.testing.assert_array_equal(voigt(w, 1.3, 0.0), lorentzian(w, 1.3))


def test_voigt_small_sigma_limit():
    g = 1.3
    w = np.linspace(-10, 10, 401)
    diff = np.max(np.abs(voigt(w, g, 1e-6 * g) - lorentzian(w, g)))
    assert diff < 1e-4 * lorentzian(0.0, g)


@given(width, width)
@settings(max_examples=50, deadline=None)
def test_voigt_peak_bound(g, s):
    assert voigt(0.0, g, s) <= min(lorentzian(0.0, g), gaussian(0.0, s)) * (1 + 1e-12)


@given(width, width, st.floats(-50, 50))
@settings(max_examples=50, deadline=None)
def test_voigt_even(g, s, w):
    assert voigt(w, g, s) == pytest.approx(voigt(-w, g, s), rel=1e-12)


# -- FWHM ----------------------------------------------------------------------

@pytest.mark.parametrize("ratio", np.geomspace(0.1, 10, 15))
def test_voigt_fwhm_against_empirical_formula(ratio):
    sigma = 1.0
    gamma = ratio * sigma * SQRT_2LN2  # ratio of Lorentzian to Gaussian half widths
    assert voigt_fwhm(gamma, sigma) == pytest.approx(olivero_fwhm(gamma, sigma), rel=3e-4)


def test_fwhm_analytic_lorentzian():
    assert fwhm(lambda w: lorentzian(w, 2.3), bracket=0.01) == pytest.approx(4.6, rel=1e-6)
    assert fwhm(lambda w: lorentzian(w, 2.3), bracket=1e3) == pytest.approx(4.6, rel=1e-6)


def test_fwhm_off_centre():
    f = lambda w: lorentzian(w - 5.0, 0.7)
    assert fwhm(f, center=5.0) == pytest.approx(1.4, rel=1e-6)


def test_fwhm_errors():
    with pytest.raises(ValueError):
        fwhm(lambda w: 0.0 * w)
    with pytest.raises(ValueError):
        fwhm(lambda w: 1.0 + 0.0 * w, max_grow=5)


@given(width, width, st.floats(1.01, 2.0))
@settings(max_examples=30, deadline=None)
def test_voigt_fwhm_monotone(g, s, f):
    base = voigt_fwhm(g, s)
    assert voigt_fwhm(g * f, s) > base
    assert voigt_fwhm(g, s * f) > base


# -- composition and the two-component model -------------------------------------

def test_compose_gamma():
    assert compose_gamma(0.0, 1.3) == 1.3
    assert compose_gamma(1.0, 1.3) == pytest.approx(2.3)
    assert compose_gamma(0.4, 0.9) == compose_gamma(0.9, 0.4)
    with pytest.raises(ValueError):
        compose_gamma(0.0, 0.0)
    with pytest.raises(ValueError):
        compose_gamma(-1.0, 2.0)


def test_compose_sigma():
    assert compose_sigma(3.0, 4.0) == pytest.approx(5.0)
    assert compose_sigma(1.0, 0.0) == 1.0
    assert compose_sigma(1.0, 1.8) == pytest.approx(np.sqrt(1 + 1.8**2))
    with pytest.raises(ValueError):
        compose_sigma(-1.0, 1.0)


def test_reference_params():
    p = ComponentParams(0.5, 1.3, 1.0, 1.8)
    assert p.gamma == pytest.approx(1.8)
    assert p.sigma == pytest.approx(np.hypot(1.0, 1.8))


def test_weights_normalized_on_construction():
    c = ComponentParams(0.1, 1.3, 1.0, 1.8)
    p = CompositeParams(c, c, weight_g=2.0, weight_e=6.0)
    assert (p.weight_g, p.weight_e) == (0.25, 0.75)
    with pytest.raises(ValueError):
        CompositeParams(c, c, weight_g=0.0, weight_e=0.0)


def test_single_component_reduction():
    p = CompositeParams.build(0.2, 3.0, 1.3, 1.0, 1.8, 2.5, weight_g=1.0, amplitude=7.0,
                              baseline=2.0, center=0.5)
    w = np.linspace(-20, 20, 81)
    expected = 2.0 + 7.0 * voigt(w - 0.5, 1.5, np.hypot(1.0, 1.8))
    np.testing.assert_allclose(rayleigh_lineshape(w, p), expected, rtol=1e-14)


def test_identical_components_collapse_to_one_voigt():
    p = CompositeParams.build(0.2, 0.2, 1.3, 1.0, 1.8, 1.8)
    w = np.linspace(-20, 20, 81)
    np.testing.assert_allclose(rayleigh_lineshape(w, p), voigt(w, 1.5, np.hypot(1, 1.8)),
                               rtol=1e-14)


def test_components_sum_to_model():
    p = CompositeParams.build(0.3, 3.6, 1.3, 1.0, 1.7, 2.2, amplitude=100, baseline=5)
    w = np.linspace(-30, 30, 61)
    g, e = rayleigh_components(w, p)
    np.testing.assert_allclose(g + e + 5, rayleigh_lineshape(w, p), rtol=1e-14)


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0, 4),
       st.floats(0, 4), st.floats(0, 1), st.floats(-10, 10), st.floats(0.01, 30))
@settings(max_examples=50, deadline=None)
def test_model_even_about_centre(tg, te, dep, res, ig, ie, wg, c, d):
    p = CompositeParams.build(tg, te, dep, res, ig, ie, weight_g=wg, center=c, amplitude=3.0)
    assert rayleigh_lineshape(c + d, p) == pytest.approx(rayleigh_lineshape(c - d, p), rel=1e-12)


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0, 4),
       st.floats(0, 4), st.floats(0.05, 0.95))
@settings(max_examples=40, deadline=None)
def test_model_fwhm_between_components(tg, te, dep, res, ig, ie, wg):
    p = CompositeParams.build(tg, te, dep, res, ig, ie, weight_g=wg)
    fg = voigt_fwhm(p.ground.gamma, p.ground.sigma)
    fe = voigt_fwhm(p.excited.gamma, p.excited.sigma)
    f = model_fwhm(p)
    assert min(fg, fe) * (1 - 1e-9) <= f <= max(fg, fe) * (1 + 1e-9)
