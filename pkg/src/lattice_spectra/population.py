"""Vibrational populations and Rayleigh-scattering weights of the two lowest levels."""

from dataclasses import dataclass
import warnings

import numpy as np

from .constants import H, K_B

DEGENERACY_G = 1
DEGENERACY_E = 2
#: Rayleigh cross sections scale as n + 1/2, so S_E/S_G = (3/2)/(1/2).
CROSS_SECTION_RATIO = 3.0


@dataclass(frozen=True)
class TemperatureModel:
    """Quadratic temperature calibration T = a0 + a1 nu + a2 nu^2 (uK, nu in kHz).

    The default is a reconstruction, not a measurement: T proportional to
    nu_osc with the slope that keeps P_E/P_G = 0.84, over the range where
    T runs from 3 to 6 uK.
    """

    a0: float = 0.0
    a1: float = 0.055323
    a2: float = 0.0
    nu_min: float = 54.25
    nu_max: float = 108.45
    out_of_range: str = "reject"  # or "warn" / "ignore"

    def __post_init__(self):
        if self.out_of_range not in ("reject", "warn", "ignore"):
            raise ValueError(f"unknown out-of-range policy {self.out_of_range!r}")
        if not self.nu_max > self.nu_min:
            raise ValueError("empty validity range")

    @classmethod
    def from_samples(cls, nu_khz, t_uk, **kwargs):
        """Quadratic through three exact (nu, T) samples."""
        a0, a1, a2 = np.linalg.solve(np.vander(np.asarray(nu_khz, float), 3, increasing=True),
                                     np.asarray(t_uk, float))
        return cls(a0, a1, a2, **kwargs)


def temperature(nu_khz, model=TemperatureModel()):
    """Atom temperature in uK at oscillation frequency ``nu_khz``."""
    nu = np.asarray(nu_khz, dtype=float)
    if np.any((nu < model.nu_min) | (nu > model.nu_max)):
        msg = f"nu_osc outside calibrated range [{model.nu_min}, {model.nu_max}] kHz"
        if model.out_of_range == "reject":
            raise ValueError(msg)
        if model.out_of_range == "warn":
            warnings.warn(msg, stacklevel=2)
    return model.a0 + model.a1 * nu + model.a2 * nu**2


def population_ratio(nu_osc, temperature_k):
    """P_E/P_G = (g_E/g_G) exp(-h nu_osc / k_B T), ``nu_osc`` in Hz, T in kelvin."""
    nu_osc = np.asarray(nu_osc, dtype=float)
    temperature_k = np.asarray(temperature_k, dtype=float)
    if np.any(nu_osc <= 0) or np.any(temperature_k <= 0):
        raise ValueError("oscillation frequency and temperature must be positive")
    return DEGENERACY_E / DEGENERACY_G * np.exp(-H * nu_osc / (K_B * temperature_k))


@dataclass(frozen=True)
class PopulationWeights:
    ratio: float
    s_ratio: float
    weight_g: float
    weight_e: float


def composite_weights(ratio, s_ratio=CROSS_SECTION_RATIO):
    """Normalized P*S weights of the ground and first excited vibrational levels."""
    if ratio < 0 or not s_ratio > 0:
        raise ValueError("population and cross-section ratios must be positive")
    x = ratio * s_ratio
    return PopulationWeights(float(ratio), float(s_ratio), 1 / (1 + x), x / (1 + x))


def weights_at(nu_osc, model=TemperatureModel(), s_ratio=CROSS_SECTION_RATIO):
    """Weights at ``nu_osc`` (Hz) using the temperature calibration ``model``."""
    t_k = temperature(nu_osc / 1e3, model) * 1e-6
    return composite_weights(float(population_ratio(nu_osc, t_k)), s_ratio)
