"""
The two-component Rayleigh peak
================================

Each vibrational level contributes a Voigt profile whose Lorentzian part
comes from tunneling plus depletion and whose Gaussian part from resolution
plus inhomogeneity. The peak is their population-weighted sum.
"""

import numpy as np

from lattice_spectra import CompositeParams, model_fwhm, olivero_fwhm, voigt_fwhm
from lattice_spectra.lineshape import rayleigh_components, rayleigh_lineshape
from lattice_spectra.svgplot import Series, emit_plot

# widths in kHz: gamma_tun (g, e), gamma_dep, sigma_res, sigma_inh (g, e)
p = CompositeParams.build(0.26, 3.6, 1.3, 1.0, 1.7, 2.2, weight_g=0.28)
print(f"ground:  gamma = {p.ground.gamma:.3f}, sigma = {p.ground.sigma:.3f} kHz")
print(f"excited: gamma = {p.excited.gamma:.3f}, sigma = {p.excited.sigma:.3f} kHz")

w = np.linspace(-25, 25, 501)
g, e = rayleigh_components(w, p)
emit_plot([Series(w, rayleigh_lineshape(w, p), "total"),
           Series(w, g, "ground", "dashed"), Series(w, e, "excited", "dashed")],
          "rayleigh_peak.svg", xlabel="detuning (kHz)", ylabel="density (1/kHz)")

print(f"model FWHM: {model_fwhm(p):.4f} kHz")
print(f"component FWHMs: {voigt_fwhm(p.ground.gamma, p.ground.sigma):.4f}, "
      f"{voigt_fwhm(p.excited.gamma, p.excited.sigma):.4f} kHz")

# the numerical Voigt width next to the usual empirical formula
for gamma in (0.1, 1.0, 10.0):
    exact, approx = voigt_fwhm(gamma, 1.0), olivero_fwhm(gamma, 1.0)
    print(f"gamma/sigma = {gamma:5.1f}: {exact:.6f} vs {approx:.6f} "
          f"({100 * (approx / exact - 1):+.4f}%)")
