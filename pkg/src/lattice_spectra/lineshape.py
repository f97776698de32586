"""Lorentzian, Gaussian and Voigt kernels and the two-component Rayleigh-peak model.

Widths follow a fixed convention throughout: ``gamma`` is the Lorentzian
half-width at half-maximum, ``sigma`` the Gaussian standard deviation. Any
consistent frequency unit works; the rest of the package uses Hz.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import bisect
from scipy.special import voigt_profile

SQRT_2LN2 = np.sqrt(2 * np.log(2))


def _check_gamma(gamma):
    if not np.all(np.asarray(gamma) > 0):
        raise ValueError(f"Lorentzian HWHM must be positive, got {gamma}")


def lorentzian(omega, gamma):
    _check_gamma(gamma)
    return gamma / (np.pi * (np.asarray(omega) ** 2 + gamma**2))


def gaussian(omega, sigma):
    if not np.all(np.asarray(sigma) > 0):
        raise ValueError(f"Gaussian sigma must be positive, got {sigma}")
    return np.exp(-np.asarray(omega) ** 2 / (2 * sigma**2)) / (sigma * np.sqrt(2 * np.pi))


def voigt(omega, gamma, sigma):
    """Unit-area convolution of ``lorentzian(., gamma)`` and ``gaussian(., sigma)``.

    ``sigma == 0`` returns the Lorentzian itself.
    """
    _check_gamma(gamma)
    if sigma < 0:
        raise ValueError(f"Gaussian sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return lorentzian(omega, gamma)
    return voigt_profile(omega, sigma, gamma)


def compose_gamma(gamma_tun, gamma_dep):
    """Total Lorentzian HWHM: tunneling bandwidth plus depletion broadening."""
    if gamma_tun < 0 or gamma_dep < 0:
        raise ValueError("width contributions must be non-negative")
    total = gamma_tun + gamma_dep
    if total <= 0:
        raise ValueError("total Lorentzian width must be positive")
    return total


def compose_sigma(sigma_res, sigma_inh):
    """Total Gaussian sigma: resolution and inhomogeneous widths added in quadrature."""
    if sigma_res < 0 or sigma_inh < 0:
        raise ValueError("width contributions must be non-negative")
    return float(np.hypot(sigma_res, sigma_inh))


@dataclass(frozen=True)
class ComponentParams:
    gamma_tun: float
    gamma_dep: float
    sigma_res: float
    sigma_inh: float

    @property
    def gamma(self):
        return compose_gamma(self.gamma_tun, self.gamma_dep)

    @property
    def sigma(self):
        return compose_sigma(self.sigma_res, self.sigma_inh)

    def profile(self, omega):
        return voigt(omega, self.gamma, self.sigma)


@dataclass(frozen=True)
class CompositeParams:
    """Parameters of the Rayleigh-peak model.

    ``weight_g``/``weight_e`` are the P*S products; they are normalized to
    unit sum on construction so that ``amplitude`` carries the peak area.
    """

    ground: ComponentParams
    excited: ComponentParams
    weight_g: float = 0.28
    weight_e: float = 0.72
    center: float = 0.0
    amplitude: float = 1.0
    baseline: float = 0.0

    def __post_init__(self):
        if self.weight_g < 0 or self.weight_e < 0 or self.weight_g + self.weight_e <= 0:
            raise ValueError("component weights must be non-negative and not both zero")
        total = self.weight_g + self.weight_e
        object.__setattr__(self, "weight_g", self.weight_g / total)
        object.__setattr__(self, "weight_e", self.weight_e / total)

    @classmethod
    def build(cls, gamma_tun_g, gamma_tun_e, gamma_dep, sigma_res, sigma_inh_g, sigma_inh_e,
              weight_g=0.28, center=0.0, amplitude=1.0, baseline=0.0):
        return cls(ComponentParams(gamma_tun_g, gamma_dep, sigma_res, sigma_inh_g),
                   ComponentParams(gamma_tun_e, gamma_dep, sigma_res, sigma_inh_e),
                   weight_g, 1.0 - weight_g, center, amplitude, baseline)

    def with_(self, **changes):
        return replace(self, **changes)


def rayleigh_components(omega, p):
    """The two weighted Voigt terms (without baseline), each scaled by ``amplitude``."""
    d = np.asarray(omega, dtype=float) - p.center
    return (p.amplitude * p.weight_g * p.ground.profile(d),
            p.amplitude * p.weight_e * p.excited.profile(d))


def rayleigh_lineshape(omega, p):
    g, e = rayleigh_components(omega, p)
    return p.baseline + g + e


def fwhm(f, center=0.0, bracket=None, rtol=1e-10, max_grow=60):
    """Full width at half maximum of a symmetric, baseline-free peak ``f`` at ``center``.

    ``bracket`` is an initial guess for an offset beyond the half-maximum
    point; it is doubled until the crossing is bracketed.
    """
    peak = f(center)
    if not peak > 0:
        raise ValueError("peak value must be positive")
    half = peak / 2

    def g(delta):
        return f(center + delta) - half

    hi = bracket if bracket is not None else 1.0
    if hi <= 0:
        raise ValueError("bracket must be positive")
    for _ in range(max_grow):
        if g(hi) < 0:
            break
        hi *= 2
    else:
        raise ValueError("could not bracket the half-maximum crossing")
    # shrink from below so the bracket stays tight for wide initial guesses
    while g(hi / 2) < 0 and hi / 2 > 0:
        hi /= 2
        if hi < 1e-300:
            raise ValueError("peak narrower than floating-point resolution")
    lo = hi / 2
    root = bisect(g, lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)
    return 2 * root


def voigt_fwhm(gamma, sigma):
    return fwhm(lambda w: voigt(w, gamma, sigma), 0.0, bracket=gamma + sigma)


def olivero_fwhm(gamma, sigma):
    """Empirical Voigt FWHM approximation, accurate to about 0.02%."""
    fl = 2 * gamma
    fg = 2 * sigma * SQRT_2LN2
    return 0.5346 * fl + np.sqrt(0.2166 * fl**2 + fg**2)


def model_fwhm(p):
    """FWHM of the Rayleigh-peak model (baseline removed)."""
    q = p.with_(baseline=0.0, amplitude=1.0, center=0.0)
    scale = max(p.ground.gamma + p.ground.sigma, p.excited.gamma + p.excited.sigma)
    return fwhm(lambda w: rayleigh_lineshape(w, q), 0.0, bracket=scale)
