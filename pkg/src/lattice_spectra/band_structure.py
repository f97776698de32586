"""Bloch bands of the 1D lattice V(x) = s E_r sin^2(kx) by plane-wave diagonalization.

Energies and bandwidths come out in Hz (the recoil energy is carried as a
frequency, E_r/h). Quasimomenta are in units of the laser wavenumber k, so
the Brillouin zone is [-1, 1].
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .constants import recoil_hz

#: Bandwidths are identified with the Lorentzian HWHM by default; "fwhm"
#: halves them before they enter gamma.
WIDTH_CONVENTIONS = {"hwhm": 1.0, "fwhm": 0.5}


@dataclass(frozen=True)
class LatticeDepth:
    s: float
    recoil: float = recoil_hz()  # E_r/h in Hz

    def __post_init__(self):
        if not self.s >= 0:
            raise ValueError(f"lattice depth must be non-negative, got {self.s}")
        if not self.recoil > 0:
            raise ValueError("recoil energy must be positive")

    @property
    def harmonic_frequency(self):
        """Harmonic-limit oscillation frequency 2 sqrt(s) E_r/h, Hz."""
        return 2 * np.sqrt(self.s) * self.recoil


@dataclass
class BlochBand:
    n: int
    q: np.ndarray
    energies: np.ndarray  # Hz

    @property
    def bandwidth(self):
        return float(self.energies.max() - self.energies.min())


def default_cutoff(s):
    """Plane-wave count: |m| <= 15, widened for deep lattices whose
    ground state spreads over roughly s**(1/4) reciprocal vectors."""
    return 2 * max(15, int(np.ceil(5 * s**0.25))) + 1


def band_energies(q, depth, n_max=2, cutoff=None):
    """Lowest ``n_max`` Bloch energies (Hz, ascending) at quasimomentum ``q`` (units of k).

    ``cutoff`` is the odd number of plane waves exp(i (q + 2m) k x), |m| <= (cutoff-1)/2;
    the default follows ``default_cutoff``.
    """
    cutoff = default_cutoff(depth.s) if cutoff is None else cutoff
    if cutoff % 2 == 0 or cutoff < 2 * n_max + 5:
        raise ValueError(f"cutoff must be odd and >= 2*n_max + 5, got {cutoff}")
    if abs(q) > 1 + 1e-12:
        raise ValueError(f"quasimomentum {q} outside the Brillouin zone [-1, 1]")
    M = (cutoff - 1) // 2
    m = np.arange(-M, M + 1)
    diag = (q + 2 * m) ** 2 + depth.s / 2
    off = np.full(cutoff - 1, -depth.s / 4)
    try:
        e = eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, n_max - 1))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Bloch eigen-solver failed at q={q}, s={depth.s}") from exc
    return e * depth.recoil


def bloch_band(n, depth, n_q=201, cutoff=None):
    q = np.linspace(-1, 1, n_q)
    E = np.array([band_energies(qi, depth, n_max=n + 1, cutoff=cutoff)[n] for qi in q])
    return BlochBand(n, q, E)


def bandwidth(n, depth, n_q=201, cutoff=None):
    """Spread max - min of band ``n`` over the Brillouin zone, Hz."""
    return bloch_band(n, depth, n_q=n_q, cutoff=cutoff).bandwidth


def depth_from_oscillation(nu_osc, recoil=recoil_hz()):
    """Invert h nu_osc = 2 sqrt(s) E_r for s (``nu_osc`` and ``recoil`` in Hz)."""
    if not nu_osc > 0:
        raise ValueError(f"oscillation frequency must be positive, got {nu_osc}")
    return LatticeDepth((nu_osc / (2 * recoil)) ** 2, recoil)


def tunneling_linewidths(nu_osc, recoil=recoil_hz(), convention="hwhm", n_q=201, cutoff=None):
    """(gamma_tun_g, gamma_tun_e) in Hz: s- and p-band widths at the depth giving ``nu_osc``."""
    factor = WIDTH_CONVENTIONS[convention]
    depth = depth_from_oscillation(nu_osc, recoil)
    return (factor * bandwidth(0, depth, n_q, cutoff),
            factor * bandwidth(1, depth, n_q, cutoff))
