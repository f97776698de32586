"""Physical constants and species defaults used across the package."""

from scipy import constants as _c

H = _c.h
HBAR = _c.hbar
K_B = _c.k
C = _c.c

#: mass of a 85Rb atom, kg
RB85_MASS = 1.4100e-25

#: 85Rb D2 line, the trap-laser wavelength in a Rb MOT, m
RB85_D2_WAVELENGTH = 780.241e-9


def recoil_hz(mass=RB85_MASS, wavelength=RB85_D2_WAVELENGTH):
    """Recoil energy h/(2 m lambda^2) expressed as a frequency in Hz."""
    return H / (2.0 * mass * wavelength**2)
