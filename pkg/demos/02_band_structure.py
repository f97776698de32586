"""
Tunneling bandwidths of a sinusoidal lattice
=============================================

The lowest two Bloch bands of V = s E_r sin^2(kx), solved in a plane-wave
basis. Their widths set the tunneling contribution to the line widths.
"""

import numpy as np

from lattice_spectra import LatticeDepth, bloch_band, tunneling_linewidths
from lattice_spectra.constants import recoil_hz
from lattice_spectra.svgplot import Series, emit_plot

er = recoil_hz()
print(f"recoil frequency: {er:.2f} Hz")

# band dispersion at a few depths, in recoil units
for s in (0.0, 5.0, 20.0):
    d = LatticeDepth(s, er)
    b0, b1 = bloch_band(0, d), bloch_band(1, d)
    print(f"s = {s:4.1f}: widths {b0.bandwidth / er:.4g} and {b1.bandwidth / er:.4g} E_r")

d = LatticeDepth(5.0, er)
series = [Series(bloch_band(n, d).q, bloch_band(n, d).energies / er, f"band {n}")
          for n in (0, 1)]
emit_plot(series, "bands_s5.svg", xlabel="q (k)", ylabel="E / E_r", title="s = 5")

# tunneling widths versus oscillation frequency
nus = np.linspace(10, 110, 21)
widths = np.array([tunneling_linewidths(nu * 1e3) for nu in nus])
for nu, (g, e) in zip(nus[::4], widths[::4]):
    print(f"nu_osc = {nu:5.1f} kHz: gamma_g = {g:9.3g} Hz, gamma_e = {e:9.3g} Hz")
emit_plot([Series(nus, np.log10(widths[:, 0]), "s band"),
           Series(nus, np.log10(widths[:, 1]), "p band")], "tunneling.svg",
          xlabel="oscillation frequency (kHz)", ylabel="log10 width (Hz)")
