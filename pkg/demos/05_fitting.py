"""
Fitting synthetic spectra
=========================

Generates spectra at known widths, then recovers them with the single-atom
protocol (two free inhomogeneous widths) and the constant-depletion protocol
(depletion width shared across a set of spectra).
"""

import numpy as np

from lattice_spectra import (CompositeParams, FitConfig, derived_parameters,
                             fit_constant_depletion, fit_single_atom, model_fwhm, synth_spectrum)
from lattice_spectra.fitting import model_overlay
from lattice_spectra.lineshape import rayleigh_lineshape
from lattice_spectra.svgplot import Series, emit_plot


def make(nu, cfg, seed, sigma_g=1.7, sigma_e=2.2, gamma_dep=1.3, peak=1e4):
    d = derived_parameters(nu, cfg)
    p = CompositeParams.build(d["gamma_tun_g"], d["gamma_tun_e"], gamma_dep, 1.0, sigma_g,
                              sigma_e, weight_g=d["weight_g"], baseline=20.0)
    p = p.with_(amplitude=peak / (rayleigh_lineshape(0.0, p) - 20.0))
    grid = np.linspace(-10, 10, 101) * model_fwhm(p)
    noise = np.sqrt(rayleigh_lineshape(grid, p))
    return synth_spectrum(p, grid, noise, seed=seed, nu_osc=nu, label=f"{nu:g} kHz")


# tunneling is only resolvable in shallow lattices, so work at 15-40 kHz
# with the weights pinned to the 0.28:0.72 split
single = FitConfig.single_atom(fixed={"weight_g": 0.28})
spec = make(25.0, single, seed=1)
res = fit_single_atom(spec, single)
for k in ("sigma_inh_g", "sigma_inh_e"):
    print(f"{k} = {res.values[k]:.3f} +- {res.errors[k]:.3f} kHz")
print(f"FWHM model {res.fwhm:.3f} +- {res.fwhm_err:.3f}, data {res.data_fwhm:.3f} kHz; "
      f"reduced chi2 {res.reduced_chi2:.2f}")

fine = np.linspace(spec.detuning[0], spec.detuning[-1], 400)
total, g, e = model_overlay(res, fine)
emit_plot([Series(spec.detuning, spec.counts, "data", "markers"), Series(fine, total, "fit"),
           Series(fine, g, "ground", "dashed"), Series(fine, e, "excited", "dashed")],
          "fit_overlay.svg", xlabel="detuning (kHz)", ylabel="counts")

# joint fit of six spectra
joint_cfg = FitConfig.constant_depletion(fixed={"weight_g": 0.28})
specs = [make(nu, joint_cfg, seed=i) for i, nu in enumerate((15, 20, 25, 30, 35, 40))]
joint = fit_constant_depletion(specs, joint_cfg)
for k, v in joint.shared.items():
    print(f"shared {k} = {v:.3f} +- {joint.shared_errors[k]:.3f} kHz")
for r in joint.results:
    print(f"  {r.label:>7}: FWHM {r.fwhm:.3f} kHz")
