"""Six-beam phase-stabilized optical lattice: fields, envelope and light-shift potential.

Positions are arrays with a trailing axis of length 3 (x, y, z in metres);
field vectors likewise carry their (i, j, k) components on the last axis.
All evaluators broadcast over leading axes.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import itertools

import numpy as np
from scipy.optimize import minimize

from .constants import C, RB85_D2_WAVELENGTH, RB85_MASS

#: Offset, in wavelengths along X, between the direct six-beam expansion and
#: the printed closed form: intensity(X) == closed_form(X + lambda/4).
CLOSED_FORM_X_SHIFT = 0.25

# (coordinate axis, sign of k*coord in the phase, cos component, sin component, sin sign)
_BEAMS = {
    1: (0, -1, 1, 2, +1),
    2: (1, -1, 2, 0, +1),
    3: (2, +1, 0, 1, +1),
    4: (2, -1, 0, 1, -1),
    5: (1, +1, 2, 0, -1),
    6: (0, +1, 1, 2, -1),
}


class PhaseConstraintError(ValueError):
    """Pairwise phase sums differ, so the field does not factorize."""


@dataclass(frozen=True)
class BeamConfig:
    """Phases and wavelength of the six beams.

    The counter-propagating pairs are (1, 6) along x, (2, 5) along y and
    (3, 4) along z. Half the phase difference of each pair translates the
    interference pattern; for the x and y pairs that translation is the
    folded path length (d1 + d2 and d2 respectively).

    With ``enforce=True`` a violated phase constraint raises at construction;
    otherwise it is only recorded in ``phase_stabilized``.
    """

    phases: tuple = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    wavelength: float = RB85_D2_WAVELENGTH
    phase_tol: float = 1e-9
    enforce: bool = True
    phase_stabilized: bool = field(init=False)

    def __post_init__(self):
        phases = tuple(float(p) for p in self.phases)
        if len(phases) != 6:
            raise ValueError("expected six beam phases")
        if not all(np.isfinite(phases)):
            raise ValueError("beam phases must be finite")
        if not (self.wavelength > 0 and np.isfinite(self.wavelength)):
            raise ValueError("wavelength must be positive")
        object.__setattr__(self, "phases", phases)
        ok = self.constraint_violation <= self.phase_tol
        object.__setattr__(self, "phase_stabilized", ok)
        if self.enforce and not ok:
            raise PhaseConstraintError(
                f"pairwise phase sums differ by {self.constraint_violation:.3g} rad")

    @classmethod
    def from_path_lengths(cls, d1, d2, wavelength=RB85_D2_WAVELENGTH, common_phase=0.0,
                          **kwargs):
        """Phases of a folded beam with path lengths ``d1`` and ``d2`` (metres)."""
        k = 2 * np.pi / wavelength
        c = common_phase
        a, b = k * (d1 + d2), k * d2
        return cls((c - a, c - b, c, c, c + b, c + a), wavelength=wavelength, **kwargs)

    @property
    def k(self):
        return 2 * np.pi / self.wavelength

    @property
    def omega(self):
        return self.k * C

    @property
    def pair_sums(self):
        p = self.phases
        return (p[0] + p[5], p[1] + p[4], p[2] + p[3])

    @property
    def constraint_violation(self):
        s = self.pair_sums
        return max(s) - min(s)

    @property
    def time_offset(self):
        """tau - t, in seconds."""
        return self.pair_sums[0] / (2 * self.omega)

    @property
    def offsets(self):
        """Phase offsets (kX - kx, kY - ky, kZ - kz) in radians."""
        p = self.phases
        return np.array([(p[5] - p[0]) / 2, (p[4] - p[1]) / 2, (p[2] - p[3]) / 2])

    @property
    def d1(self):
        return (self.offsets[0] - self.offsets[1]) / self.k

    @property
    def d2(self):
        return self.offsets[1] / self.k

    def shifted_coordinates(self, r):
        """k*(X, Y, Z) for lab positions ``r``."""
        return self.k * np.asarray(r, dtype=float) + self.offsets


def beam_field(index, r, t, cfg):
    """Field of beam ``index`` (1..6) at positions ``r`` and times ``t`` (seconds)."""
    if index not in _BEAMS:
        raise ValueError(f"beam index must be 1..6, got {index!r}")
    axis, sign, ic, is_, ss = _BEAMS[index]
    r = np.asarray(r, dtype=float)
    phase = cfg.omega * np.asarray(t, dtype=float) + sign * cfg.k * r[..., axis] \
        + cfg.phases[index - 1]
    out = np.zeros(np.broadcast(phase, r[..., 0]).shape + (3,))
    out[..., ic] = np.cos(phase)
    out[..., is_] = ss * np.sin(phase)
    return out


def total_field(r, t, cfg):
    return sum(beam_field(i, r, t, cfg) for i in range(1, 7))


def _envelope(u):
    X, Y, Z = u[..., 0], u[..., 1], u[..., 2]
    return np.stack([np.cos(Z) - np.sin(Y),
                     np.cos(X) + np.sin(Z),
                     np.cos(Y) - np.sin(X)], axis=-1)


def envelope(r, cfg):
    """Time-independent amplitude A(r) with E_tot = 2 cos(omega tau) A(r)."""
    if not cfg.phase_stabilized:
        raise PhaseConstraintError(
            f"pairwise phase sums differ by {cfg.constraint_violation:.3g} rad")
    return _envelope(cfg.shifted_coordinates(r))


def intensity_from_phase(u):
    """|A|^2 as a function of the shifted phase coordinates k*(X, Y, Z)."""
    X, Y, Z = u[..., 0], u[..., 1], u[..., 2]
    return (3 - 2 * np.sin(Y) * np.cos(Z) + 2 * np.cos(X) * np.sin(Z)
            - 2 * np.sin(X) * np.cos(Y))


def closed_form_from_phase(u):
    """The printed light-shift bracket 3 - 2 sinY cosz + 2 sinX sinz + 2 cosX cosY."""
    X, Y, Z = u[..., 0], u[..., 1], u[..., 2]
    return (3 - 2 * np.sin(Y) * np.cos(Z) + 2 * np.sin(X) * np.sin(Z)
            + 2 * np.cos(X) * np.cos(Y))


def intensity_gradient_from_phase(u):
    X, Y, Z = u[..., 0], u[..., 1], u[..., 2]
    sX, cX, sY, cY, sZ, cZ = np.sin(X), np.cos(X), np.sin(Y), np.cos(Y), np.sin(Z), np.cos(Z)
    return 2 * np.stack([-sX * sZ - cX * cY,
                         -cY * cZ + sX * sY,
                         sY * sZ + cX * cZ], axis=-1)


def intensity(r, cfg, mode="envelope"):
    """|A(r)|^2, or with ``mode="closed_form"`` the printed bracket at the same X, Y, z.

    The two modes are related by a quarter-wavelength translation along X
    (see ``CLOSED_FORM_X_SHIFT``).
    """
    if not cfg.phase_stabilized:
        raise PhaseConstraintError(
            f"pairwise phase sums differ by {cfg.constraint_violation:.3g} rad")
    u = cfg.shifted_coordinates(r)
    if mode == "envelope":
        return intensity_from_phase(u)
    if mode == "closed_form":
        return closed_form_from_phase(u)
    raise ValueError(f"unknown intensity mode {mode!r}")


def verify_factorization(cfg, sample_points, sample_times):
    """Max |E_tot(r, t) - 2 cos(omega tau) A(r)| over all point/time pairs."""
    r = np.asarray(sample_points, dtype=float).reshape(-1, 3)
    t = np.asarray(sample_times, dtype=float).ravel()
    if r.size == 0 or t.size == 0:
        raise ValueError("need at least one sample point and time")
    A = _envelope(cfg.shifted_coordinates(r))
    worst = 0.0
    for ti in t:
        E = total_field(r, ti, cfg)
        pref = 2 * np.cos(cfg.omega * ti + cfg.pair_sums[0] / 2)
        worst = max(worst, float(np.max(np.abs(E - pref * A))))
    return worst


@lru_cache(maxsize=None)
def intensity_extrema(resolution=64):
    """(min, max) of |A|^2 over a unit cell: grid scan then local refinement."""
    g = np.linspace(0, 2 * np.pi, resolution, endpoint=False)
    u = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1)
    I = intensity_from_phase(u)
    refined = []
    for sign in (+1, -1):
        start = u[np.unravel_index(np.argmax(sign * I), I.shape)]
        res = minimize(lambda p: -sign * intensity_from_phase(p), start,
                       jac=lambda p: -sign * intensity_gradient_from_phase(p),
                       method="BFGS", options={"gtol": 1e-13})
        refined.append(-sign * res.fun)
    imax = max(I.max(), refined[0])
    imin = max(min(I.min(), refined[1]), 0.0)
    return float(imin), float(imax)


@dataclass
class PotentialGrid:
    """Light-shift potential sampled on a rectilinear box (arrays indexed [ix, iy, iz])."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    intensity: np.ndarray
    potential: np.ndarray
    depth_scale: float
    intensity_max: float
    wavelength: float

    @property
    def shape(self):
        return self.intensity.shape


def _check_cell(cell):
    lo, hi = (np.asarray(c, dtype=float).reshape(3) for c in cell)
    if not np.all(hi > lo):
        raise ValueError(f"degenerate cell {lo} .. {hi}")
    return lo, hi


def potential(r, cfg, depth_scale):
    """V(r) = -V_s |A|^2 / max|A|^2, in the units of ``depth_scale``."""
    return -depth_scale * intensity(r, cfg) / intensity_extrema()[1]


def potential_grid(cfg, cell, resolution, depth_scale):
    lo, hi = _check_cell(cell)
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (3,))
    if np.any(res < 2):
        raise ValueError("resolution must be at least 2 per axis")
    if not depth_scale > 0:
        raise ValueError("depth scale must be positive")
    axes = [np.linspace(lo[i], hi[i], res[i]) for i in range(3)]
    r = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    I = intensity(r, cfg)
    imax = intensity_extrema()[1]
    return PotentialGrid(*axes, intensity=I, potential=-depth_scale * I / imax,
                         depth_scale=float(depth_scale), intensity_max=imax,
                         wavelength=cfg.wavelength)


def _periodic_local_maxima(I):
    mask = np.ones(I.shape, dtype=bool)
    for s in itertools.product((-1, 0, 1), repeat=3):
        if s != (0, 0, 0):
            mask &= I > np.roll(I, s, axis=(0, 1, 2))
    return np.argwhere(mask)


def _descend(u, gtol):
    """Refine a seed to the nearest maximum of |A|^2 (phase coordinates)."""
    res = minimize(lambda v: -intensity_from_phase(v), u,
                   jac=lambda v: -intensity_gradient_from_phase(v),
                   method="BFGS", options={"gtol": gtol, "maxiter": 1000})
    if np.linalg.norm(intensity_gradient_from_phase(res.x)) > max(gtol, 1e-8):
        raise RuntimeError(f"minimum refinement did not converge: {res.message}")
    return res.x


def find_minima(cfg, cell, depth_scale=1.0, seeds_per_period=64, gtol=1e-10):
    """Distinct potential minima, one representative per lattice-periodic class.

    Returned positions lie in the first period of ``cell`` (metres).
    """
    lo, hi = _check_cell(cell)
    lam = cfg.wavelength
    if np.any(hi - lo < lam * (1 - 1e-12)):
        raise ValueError("cell must span at least one period per axis")
    if not cfg.phase_stabilized:
        raise PhaseConstraintError("minima undefined for a non-factorizing field")
    frac = np.arange(seeds_per_period) / seeds_per_period
    grid_r = lo + lam * np.stack(np.meshgrid(frac, frac, frac, indexing="ij"), axis=-1)
    u_grid = cfg.shifted_coordinates(grid_r)
    I = intensity_from_phase(u_grid)
    found = []
    for idx in _periodic_local_maxima(I):
        u = _descend(u_grid[tuple(idx)], gtol)
        r = (u - cfg.offsets) / cfg.k
        r = lo + np.mod(r - lo, lam)
        if any(np.all(np.abs(((r - q) / lam + 0.5) % 1.0 - 0.5) < 1e-6) for q in found):
            continue
        found.append(r)
    if not found:
        raise RuntimeError("no potential minima found in cell")
    return [np.asarray(r) for r in sorted(found, key=lambda p: tuple(np.round(p / lam, 9)))]


def numerical_hessian(fun, r0, step):
    r0 = np.asarray(r0, dtype=float)
    H = np.empty((3, 3))
    e = np.eye(3) * step
    f0 = fun(r0)
    for i in range(3):
        H[i, i] = (fun(r0 + e[i]) - 2 * f0 + fun(r0 - e[i])) / step**2
        for j in range(i + 1, 3):
            H[i, j] = H[j, i] = (fun(r0 + e[i] + e[j]) - fun(r0 + e[i] - e[j])
                                 - fun(r0 - e[i] + e[j]) + fun(r0 - e[i] - e[j])) / (4 * step**2)
    return H


@dataclass
class WellCharacterization:
    position: np.ndarray
    hessian_eigenvalues: np.ndarray  # J/m^2, ascending
    axes: np.ndarray  # eigenvectors as columns
    frequencies: np.ndarray  # Hz, ascending
    mass: float


def characterize_well(cfg, minimum, depth_scale, mass=RB85_MASS, step=None):
    """Harmonic frequencies of the well at ``minimum`` for depth ``depth_scale`` (J)."""
    if not mass > 0:
        raise ValueError("atomic mass must be positive")
    step = cfg.wavelength / 1000 if step is None else step
    H = numerical_hessian(lambda p: potential(p, cfg, depth_scale), minimum, step)
    evals, evecs = np.linalg.eigh(H)
    if np.any(evals <= 0):
        raise ValueError(f"not a minimum: Hessian eigenvalues {evals}")
    freqs = np.sqrt(evals / mass) / (2 * np.pi)
    return WellCharacterization(np.asarray(minimum, dtype=float), evals, evecs, freqs, mass)
