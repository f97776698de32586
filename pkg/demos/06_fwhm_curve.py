"""
Line width versus oscillation frequency
=======================================

With the widths held fixed, the model FWHM falls as the lattice deepens
and tunneling shuts off, levelling out at the width set by depletion,
resolution and inhomogeneity alone.
"""

import numpy as np

from lattice_spectra import FitConfig, fwhm_curve
from lattice_spectra.population import TemperatureModel
from lattice_spectra.svgplot import Series, emit_plot

fixed = {"gamma_dep": 1.3, "sigma_res": 1.0, "sigma_inh_g": 1.8, "sigma_inh_e": 1.8}
model = TemperatureModel(out_of_range="ignore")
cfg = FitConfig(free=(), fixed=fixed, temperature_model=model)
floor_cfg = FitConfig(free=(), fixed={**fixed, "gamma_tun_g": 0.0, "gamma_tun_e": 0.0},
                      temperature_model=model)

nus = np.linspace(10, 110, 41)
curve = np.array(fwhm_curve(nus, cfg))
floor = fwhm_curve([60.0], floor_cfg)[0][1]
for nu, w in curve[::8]:
    print(f"nu = {nu:6.1f} kHz  FWHM = {w:.4f} kHz")
print(f"no-tunneling floor: {floor:.4f} kHz")

emit_plot([Series(curve[:, 0], curve[:, 1], "model"),
           Series(curve[[0, -1], 0], [floor, floor], "no tunneling", "dashed")],
          "fwhm_curve.svg", xlabel="oscillation frequency (kHz)", ylabel="FWHM (kHz)")
