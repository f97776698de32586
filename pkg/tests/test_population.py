import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lattice_spectra.constants import H, K_B
from lattice_spectra.population import (
    TemperatureModel, composite_weights, population_ratio, temperature, weights_at)


def test_reference_weights():
    w = composite_weights(0.84, 3.0)
    assert w.weight_g == pytest.approx(0.284, abs=5e-4)
    assert w.weight_e == pytest.approx(0.716, abs=5e-4)
    assert w.weight_g + w.weight_e == pytest.approx(1.0, abs=1e-15)


def test_ratio_formula_against_direct_evaluation():
    nu, t = 80e3, 4.4e-6
    assert population_ratio(nu, t) == pytest.approx(2 * np.exp(-H * nu / (K_B * t)), rel=1e-14)


def test_default_model_keeps_ratio_fixed():
    model = TemperatureModel()
    nus = np.linspace(model.nu_min, model.nu_max, 30)
    r = population_ratio(nus * 1e3, temperature(nus, model) * 1e-6)
    np.testing.assert_allclose(r, 0.84, rtol=1e-4)
    assert temperature(model.nu_min) == pytest.approx(3.0, rel=1e-3)
    assert temperature(model.nu_max) == pytest.approx(6.0, rel=1e-3)


@given(st.floats(1e3, 2e5), st.floats(0.5e-6, 20e-6), st.floats(1.01, 3))
@settings(max_examples=50)
def test_ratio_monotone(nu, t, f):
    assert population_ratio(nu * f, t) < population_ratio(nu, t)
    assert population_ratio(nu, t * f) > population_ratio(nu, t)


@given(st.floats(1e3, 2e5), st.floats(0.5e-6, 20e-6), st.floats(0.1, 10))
@settings(max_examples=50)
def test_ratio_depends_on_nu_over_t(nu, t, c):
    assert population_ratio(nu * c, t * c) == pytest.approx(population_ratio(nu, t), rel=1e-12)


@given(st.floats(0, 2), st.floats(0.1, 10))
@settings(max_examples=50)
def test_weights_normalized(r, s):
    w = composite_weights(r, s)
    assert w.weight_g + w.weight_e == pytest.approx(1.0, abs=1e-15)
    assert w.weight_e == pytest.approx(r * s / (1 + r * s))


def test_quadratic_calibration_through_samples():
    nu, t = [50.0, 80.0, 110.0], [3.0, 4.2, 6.5]
    model = TemperatureModel.from_samples(nu, t, nu_min=50, nu_max=110)
    np.testing.assert_allclose(temperature(nu, model), t, rtol=1e-12)
    # Lagrange interpolation as an independent check
    x = 95.0
    lagrange = sum(t[i] * np.prod([(x - nu[j]) / (nu[i] - nu[j]) for j in range(3) if j != i])
                   for i in range(3))
    assert temperature(x, model) == pytest.approx(lagrange, rel=1e-12)


def test_out_of_range_policies():
    with pytest.raises(ValueError):
        temperature(20.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        temperature(20.0, TemperatureModel(out_of_range="warn"))
    assert caught
    assert temperature(20.0, TemperatureModel(out_of_range="ignore")) > 0
    with pytest.raises(ValueError):
        TemperatureModel(out_of_range="maybe")


def test_invalid_inputs():
    with pytest.raises(ValueError):
        population_ratio(0.0, 1e-6)
    with pytest.raises(ValueError):
        population_ratio(1e3, -1e-6)
    with pytest.raises(ValueError):
        composite_weights(-0.1)


def test_weights_at_uses_calibration():
    w = weights_at(80e3)
    assert w.ratio == pytest.approx(0.84, rel=1e-4)
    assert w.weight_g == pytest.approx(1 / (1 + 3 * w.ratio))
