"""
Level populations and component weights
========================================

If the atom temperature rises in proportion to the oscillation frequency,
the Boltzmann factor and hence the weights of the two levels stay fixed.
"""

import numpy as np

from lattice_spectra import (TemperatureModel, composite_weights, population_ratio,
                             temperature)
from lattice_spectra.svgplot import Series, emit_plot

model = TemperatureModel()
nus = np.linspace(model.nu_min, model.nu_max, 6)
for nu in nus:
    t = temperature(nu, model)
    r = population_ratio(nu * 1e3, t * 1e-6)
    w = composite_weights(r)
    print(f"nu = {nu:6.2f} kHz  T = {t:.3f} uK  P_E/P_G = {r:.4f}  "
          f"w_e:w_g = {w.weight_e:.3f}:{w.weight_g:.3f}")

# a colder, fixed temperature instead drains the excited level at high frequency
cold = TemperatureModel(a0=3.0, a1=0.0, nu_min=model.nu_min, nu_max=model.nu_max)
for nu in nus[[0, -1]]:
    r = population_ratio(nu * 1e3, temperature(nu, cold) * 1e-6)
    print(f"constant 3 uK, nu = {nu:6.2f} kHz: P_E/P_G = {r:.4f}")

grid = np.linspace(model.nu_min, model.nu_max, 50)
emit_plot([Series(grid, population_ratio(grid * 1e3, temperature(grid, m) * 1e-6), label)
           for m, label in ((model, "T proportional to nu"), (cold, "T = 3 uK"))],
          "population_ratio.svg", xlabel="oscillation frequency (kHz)", ylabel="P_E / P_G")
