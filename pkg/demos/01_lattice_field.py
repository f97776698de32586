"""
Six-beam lattice: field, potential and wells
=============================================

Builds the phase-stabilized field, checks that it factorizes into a
standing-wave envelope times an optical-frequency oscillation, and
characterizes the micro-wells of the resulting light-shift potential.
"""

import numpy as np

from lattice_spectra import (BeamConfig, characterize_well, find_minima, potential_grid,
                             verify_factorization)
from lattice_spectra.constants import H
from lattice_spectra.svgplot import Series, emit_plot

lam = 780.241e-9

# path offsets d1, d2 fix where the pattern sits; the common phase is irrelevant
beams = BeamConfig.from_path_lengths(0.1 * lam, 0.05 * lam, lam, common_phase=0.3)
print("pair sums (rad):", beams.pair_sums)

rng = np.random.default_rng(0)
pts = rng.uniform(-2, 2, (500, 3)) * lam
times = rng.uniform(0, 2 * np.pi / beams.omega, 10)
print("factorization residual:", verify_factorization(beams, pts, times))

# breaking one pair sum spoils it
broken = BeamConfig((0.2, 0, 0, 0, 0, 0), wavelength=lam, enforce=False)
print("residual, unstabilized:", verify_factorization(broken, pts, times))

# a potential slice through one period, 1 MHz deep
depth = H * 1e6
grid = potential_grid(beams, (np.zeros(3), np.full(3, lam)), (101, 2, 2), depth)
x = grid.x / lam
emit_plot([Series(x, grid.potential[:, 0, 0] / H / 1e3, "y = z = 0")], "lattice_slice.svg",
          xlabel="x (wavelengths)", ylabel="V/h (kHz)", title="light-shift potential")

# wells per unit cell, and their oscillation frequencies
minima = find_minima(beams, (np.zeros(3), np.full(3, lam)), depth)
print(f"{len(minima)} wells per cubic wavelength")
well = characterize_well(beams, minima[0], depth)
print("well at", np.round(well.position / lam, 4), "wavelengths")
print("frequencies (kHz):", np.round(well.frequencies / 1e3, 2))

# frequencies grow as the square root of the depth
for scale in (0.5, 1.0, 2.0):
    nu = characterize_well(beams, minima[0], scale * depth).frequencies
    print(f"depth x{scale}: nu_max = {nu[-1] / 1e3:.2f} kHz")
