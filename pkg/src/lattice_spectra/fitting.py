"""Least-squares fits of Rayleigh-peak spectra and model FWHM curves.

Two protocols are supported. ``fit_single_atom`` frees the two inhomogeneous
widths of one spectrum with the depletion width held fixed;
``fit_constant_depletion`` fits a set of spectra jointly with the depletion
width and both inhomogeneous widths shared across the set. In both, each
spectrum carries its own amplitude, center and baseline.

All frequencies in this module are in kHz, the unit spectra are recorded in;
band-structure and population inputs are converted from Hz on the way in.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import logging

import numpy as np

from .band_structure import tunneling_linewidths
from .constants import recoil_hz
from .lineshape import (CompositeParams, SQRT_2LN2, model_fwhm, rayleigh_components,
                        rayleigh_lineshape)
from .population import CROSS_SECTION_RATIO, TemperatureModel, weights_at

log = logging.getLogger(__name__)

PHYSICS_PARAMS = ("gamma_tun_g", "gamma_tun_e", "gamma_dep", "sigma_res",
                  "sigma_inh_g", "sigma_inh_e", "weight_g")
NUISANCE_PARAMS = ("amplitude", "center", "baseline")
#: filled in per spectrum from its nu_osc unless given explicitly
DERIVED_PARAMS = ("gamma_tun_g", "gamma_tun_e", "weight_g")

_DEFAULT_BOUNDS = {
    "gamma_tun_g": (0.0, np.inf),
    "gamma_tun_e": (0.0, np.inf),
    "gamma_dep": (0.0, np.inf),
    "sigma_res": (0.0, np.inf),
    "sigma_inh_g": (0.0, np.inf),
    "sigma_inh_e": (0.0, np.inf),
    "weight_g": (0.0, 1.0),
    "amplitude": (0.0, np.inf),
    "center": (-np.inf, np.inf),
    "baseline": (-np.inf, np.inf),
}


class DegenerateDataError(ValueError):
    """The data cannot constrain the requested fit."""


@dataclass
class Spectrum:
    """A sampled Rayleigh peak: detuning (kHz, strictly increasing), counts, 1-sigma errors."""

    detuning: np.ndarray
    counts: np.ndarray
    sigma: np.ndarray = None
    nu_osc: float = None
    label: str = ""

    def __post_init__(self):
        self.detuning = np.asarray(self.detuning, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.detuning.ndim != 1 or self.detuning.shape != self.counts.shape:
            raise ValueError("detuning and counts must be 1D arrays of equal length")
        if not np.all(np.isfinite(self.detuning)) or not np.all(np.isfinite(self.counts)):
            raise ValueError("spectrum contains non-finite values")
        if np.any(np.diff(self.detuning) <= 0):
            raise ValueError("detuning grid must be strictly increasing")
        if self.sigma is None:
            self.sigma = np.sqrt(np.maximum(self.counts, 1.0))
        else:
            self.sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float),
                                         self.counts.shape).copy()
            if not np.all(self.sigma > 0):
                raise ValueError("uncertainties must be positive")

    def __len__(self):
        return self.detuning.size


def synth_spectrum(params, grid, noise=0.0, seed=0, nu_osc=None, label="synthetic"):
    """Model spectrum on ``grid`` plus seeded Gaussian noise of std ``noise`` (scalar or array).

    The returned uncertainties equal ``noise`` where it is positive, else
    the Poisson default.
    """
    grid = np.asarray(grid, dtype=float)
    clean = rayleigh_lineshape(grid, params)
    noise = np.broadcast_to(np.asarray(noise, dtype=float), grid.shape)
    rng = np.random.default_rng(seed)
    counts = clean + noise * rng.standard_normal(grid.shape)
    sigma = noise if np.all(noise > 0) else None
    return Spectrum(grid, counts, sigma, nu_osc=nu_osc, label=label)


@dataclass
class FitConfig:
    """Which parameters are free or fixed, with bounds and optimizer settings.

    ``free`` names the shared physics parameters; amplitude, center and
    baseline are always free per spectrum. Derived parameters (tunneling
    widths and the ground-state weight) missing from ``fixed`` are computed
    from each spectrum's ``nu_osc``.
    """

    free: tuple = ("sigma_inh_g", "sigma_inh_e")
    fixed: dict = field(default_factory=lambda: {"gamma_dep": 1.3, "sigma_res": 1.0})
    bounds: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    protocol: str = "single-atom"
    xtol: float = 1e-8
    max_iter: int = 500
    fd_step: float = 1e-6
    weighted: bool = True
    recoil: float = recoil_hz()
    width_convention: str = "hwhm"
    temperature_model: TemperatureModel = TemperatureModel()
    s_ratio: float = CROSS_SECTION_RATIO

    def __post_init__(self):
        self.free = tuple(self.free)
        self.fixed = {k: float(v) for k, v in self.fixed.items()}
        unknown = (set(self.free) | set(self.fixed) | set(self.bounds) | set(self.initial)) \
            - set(PHYSICS_PARAMS) - set(NUISANCE_PARAMS)
        if unknown:
            raise ValueError(f"unknown parameter names: {sorted(unknown)}")
        both = set(self.free) & set(self.fixed)
        if both:
            raise ValueError(f"parameters both free and fixed: {sorted(both)}")
        if set(NUISANCE_PARAMS) & (set(self.free) | set(self.fixed)):
            raise ValueError("amplitude, center and baseline are always free per spectrum")
        missing = set(PHYSICS_PARAMS) - set(self.free) - set(self.fixed) - set(DERIVED_PARAMS)
        if missing:
            raise ValueError(f"parameters neither free nor fixed: {sorted(missing)}")
        if self.protocol not in ("single-atom", "constant-depletion"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        for name, value in self.initial.items():
            lo, hi = self.bounds_for(name)
            if not lo <= value <= hi:
                raise ValueError(f"initial {name}={value} outside bounds [{lo}, {hi}]")

    @classmethod
    def single_atom(cls, gamma_dep=1.3, sigma_res=1.0, **kwargs):
        fixed = {"gamma_dep": gamma_dep, "sigma_res": sigma_res, **kwargs.pop("fixed", {})}
        return cls(free=("sigma_inh_g", "sigma_inh_e"), fixed=fixed,
                   protocol="single-atom", **kwargs)

    @classmethod
    def constant_depletion(cls, sigma_res=1.0, **kwargs):
        fixed = {"sigma_res": sigma_res, **kwargs.pop("fixed", {})}
        return cls(free=("gamma_dep", "sigma_inh_g", "sigma_inh_e"), fixed=fixed,
                   protocol="constant-depletion", **kwargs)

    def bounds_for(self, name):
        return tuple(self.bounds.get(name, _DEFAULT_BOUNDS[name]))


@lru_cache(maxsize=256)
def _tunneling_khz(nu_osc_khz, recoil, convention):
    g, e = tunneling_linewidths(nu_osc_khz * 1e3, recoil=recoil, convention=convention)
    return g / 1e3, e / 1e3


def derived_parameters(nu_osc, cfg):
    """Tunneling widths (kHz) and ground weight at ``nu_osc`` (kHz), honouring fixed overrides."""
    out = {k: cfg.fixed[k] for k in DERIVED_PARAMS if k in cfg.fixed}
    if len(out) == len(DERIVED_PARAMS):
        return out
    if nu_osc is None:
        raise ValueError("spectrum has no nu_osc; fix gamma_tun_g, gamma_tun_e and weight_g")
    if "gamma_tun_g" not in out or "gamma_tun_e" not in out:
        g, e = _tunneling_khz(float(nu_osc), cfg.recoil, cfg.width_convention)
        out.setdefault("gamma_tun_g", g)
        out.setdefault("gamma_tun_e", e)
    if "weight_g" not in out:
        out["weight_g"] = weights_at(nu_osc * 1e3, cfg.temperature_model, cfg.s_ratio).weight_g
    return out


def params_from_dict(values):
    return CompositeParams.build(**{k: values[k] for k in PHYSICS_PARAMS + NUISANCE_PARAMS})


def data_fwhm(spec, baseline=None):
    """FWHM read off the data by linear interpolation of the half-maximum crossings."""
    y = spec.counts - (edge_baseline(spec.counts) if baseline is None else baseline)
    i = int(np.argmax(y))
    half = y[i] / 2
    if half <= 0:
        return float("nan")
    left = np.nonzero(y[:i] < half)[0]
    right = np.nonzero(y[i:] < half)[0]
    if left.size == 0 or right.size == 0:
        return float("nan")
    a, b = left[-1], i + right[0]
    x = spec.detuning
    xl = x[a] + (half - y[a]) * (x[a + 1] - x[a]) / (y[a + 1] - y[a])
    xr = x[b - 1] + (half - y[b - 1]) * (x[b] - x[b - 1]) / (y[b] - y[b - 1])
    return float(xr - xl)


def edge_baseline(counts):
    n = max(3, len(counts) // 10)
    return float(np.median(np.concatenate([counts[:n], counts[-n:]])))


def _initial_guess(spec, cfg, derived):
    """Per-spectrum starting values from the data: nuisance parameters and a width scale."""
    base = edge_baseline(spec.counts)
    i = int(np.argmax(spec.counts))
    height = spec.counts[i] - base
    if height <= 0 or np.ptp(spec.counts) == 0:
        raise DegenerateDataError(f"spectrum {spec.label!r} has no peak above its baseline")
    width = data_fwhm(spec, base)
    if not np.isfinite(width) or width <= 0:
        width = 0.1 * np.ptp(spec.detuning)
    return {"center": float(spec.detuning[i]), "baseline": base, "height": float(height),
            "width": float(width)}


def _width_guesses(width, cfg, derived):
    """Starting shared widths so the model FWHM roughly matches the data FWHM ``width``."""
    fixed = cfg.fixed
    gamma_dep = fixed.get("gamma_dep", width / 6)
    sigma_res = fixed.get("sigma_res", 0.0)
    gamma = gamma_dep + 0.5 * (derived["gamma_tun_g"] + derived["gamma_tun_e"])
    # Gaussian FWHM that combines with 2*gamma into ``width`` (inverse of olivero_fwhm)
    fl = 2 * gamma
    fg2 = (width - 0.5346 * fl) ** 2 - 0.2166 * fl**2
    sigma_tot = np.sqrt(max(fg2, (0.2 * width) ** 2)) / (2 * SQRT_2LN2)
    sigma_inh = np.sqrt(max(sigma_tot**2 - sigma_res**2, (0.1 * sigma_tot) ** 2))
    return {"gamma_dep": gamma_dep, "sigma_res": max(sigma_res, 0.1 * sigma_tot),
            "sigma_inh_g": sigma_inh, "sigma_inh_e": sigma_inh,
            "gamma_tun_g": derived["gamma_tun_g"], "gamma_tun_e": derived["gamma_tun_e"],
            "weight_g": derived["weight_g"]}


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    jac: np.ndarray
    n_iter: int
    converged: bool
    message: str
    history: list


def forward_jacobian(fun, x, f0, rel_step, scale, lower, upper):
    J = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), scale[j])
        if x[j] + h > upper[j]:
            h = -h
        xp = x.copy()
        xp[j] += h
        J[:, j] = (fun(xp) - f0) / h
    return J


def levenberg_marquardt(fun, x0, lower, upper, scale, xtol=1e-8, max_iter=500, rel_step=1e-6):
    """Damped Gauss-Newton minimization of 0.5*|fun(x)|^2 with bounds by projection.

    ``scale`` gives a typical magnitude per parameter for finite-difference
    steps and the relative-step convergence test. Only steps that do not
    increase the objective are accepted; ``history`` records the objective
    after each accepted step.
    """
    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    f = fun(x)
    cost = 0.5 * f @ f
    history = [cost]
    lam = 1e-3
    J = forward_jacobian(fun, x, f, rel_step, scale, lower, upper)
    message = "maximum iterations reached"
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        A = J.T @ J
        g = J.T @ f
        D = np.maximum(np.diag(A), 1e-300 + 1e-12 * np.max(np.diag(A)))
        accepted = False
        while lam < 1e16:
            try:
                dx = np.linalg.solve(A + lam * np.diag(D), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            trial = np.clip(x + dx, lower, upper)
            step = trial - x
            ft = fun(trial)
            ct = 0.5 * ft @ ft
            if ct <= cost:
                accepted = True
                small = np.all(np.abs(step) <= xtol * (np.abs(x) + scale))
                x, f, cost = trial, ft, ct
                history.append(cost)
                lam = max(lam / 3, 1e-12)
                break
            lam *= 4
        if not accepted:
            converged = True
            message = "no further decrease possible"
            break
        J = forward_jacobian(fun, x, f, rel_step, scale, lower, upper)
        if small:
            converged = True
            message = "relative step below tolerance"
            break
    return LMResult(x, cost, J, it, converged, message, history)


@dataclass
class FitResult:
    values: dict
    errors: dict
    free: tuple
    covariance: np.ndarray
    chi2: float
    dof: int
    residuals: np.ndarray
    fwhm: float
    fwhm_err: float
    data_fwhm: float
    converged: bool
    n_iter: int
    message: str
    cost_history: list
    label: str = ""
    nu_osc: float = None

    @property
    def reduced_chi2(self):
        return self.chi2 / self.dof if self.dof > 0 else float("nan")

    @property
    def params(self):
        return params_from_dict(self.values)

    def to_dict(self):
        return {
            "label": self.label,
            "nu_osc_khz": self.nu_osc,
            "converged": bool(self.converged),
            "message": self.message,
            "iterations": int(self.n_iter),
            "values": {k: float(v) for k, v in self.values.items()},
            "errors": {k: float(v) for k, v in self.errors.items()},
            "free": list(self.free),
            "chi2": float(self.chi2),
            "dof": int(self.dof),
            "reduced_chi2": float(self.reduced_chi2),
            "fwhm_khz": float(self.fwhm),
            "fwhm_err_khz": float(self.fwhm_err),
            "data_fwhm_khz": float(self.data_fwhm),
        }


@dataclass
class JointFitResult:
    shared: dict
    shared_errors: dict
    results: list
    chi2: float
    dof: int
    converged: bool
    n_iter: int

    @property
    def reduced_chi2(self):
        return self.chi2 / self.dof if self.dof > 0 else float("nan")

    def to_dict(self):
        return {
            "shared": {k: float(v) for k, v in self.shared.items()},
            "shared_errors": {k: float(v) for k, v in self.shared_errors.items()},
            "chi2": float(self.chi2),
            "dof": int(self.dof),
            "reduced_chi2": float(self.reduced_chi2),
            "converged": bool(self.converged),
            "iterations": int(self.n_iter),
            "spectra": [r.to_dict() for r in self.results],
        }


def _fwhm_sensitivity(values, names, rel_step=1e-6):
    base = model_fwhm(params_from_dict(values))
    grad = np.zeros(len(names))
    for i, name in enumerate(names):
        h = rel_step * max(abs(values[name]), base)
        shifted = dict(values)
        shifted[name] = values[name] + h
        grad[i] = (model_fwhm(params_from_dict(shifted)) - base) / h
    return base, grad


def _joint_fit(specs, cfg):
    shared = list(cfg.free)
    n_sh = len(shared)
    n_par = n_sh + len(NUISANCE_PARAMS) * len(specs)
    n_pts = sum(len(s) for s in specs)
    if n_pts <= n_par:
        raise DegenerateDataError(f"{n_pts} data points cannot constrain {n_par} parameters")

    derived = [derived_parameters(s.nu_osc, cfg) for s in specs]
    guesses = [_initial_guess(s, cfg, d) for s, d in zip(specs, derived)]
    widths = _width_guesses(float(np.median([g["width"] for g in guesses])), cfg, derived[0])
    width_scale = float(np.median([g["width"] for g in guesses]))

    x0, lower, upper, scale = [], [], [], []
    for name in shared:
        x0.append(cfg.initial.get(name, widths[name]))
        lo, hi = cfg.bounds_for(name)
        lower.append(lo)
        upper.append(hi)
        scale.append(0.5 if name == "weight_g" else width_scale)

    def values_for(x, i):
        v = dict(cfg.fixed)
        v.update(derived[i])
        v.update(zip(shared, x[:n_sh]))
        off = n_sh + 3 * i
        v.update(zip(NUISANCE_PARAMS, x[off:off + 3]))
        return v

    for s, d, g in zip(specs, derived, guesses):
        trial = {**cfg.fixed, **d, **{k: widths[k] for k in PHYSICS_PARAMS if k not in cfg.fixed
                                     and k not in d}}
        trial.update(zip(shared, x0[:n_sh]))
        trial.update(amplitude=1.0, center=0.0, baseline=0.0)
        peak = rayleigh_lineshape(0.0, params_from_dict(trial))
        guess = {"amplitude": g["height"] / peak, "center": g["center"], "baseline": g["baseline"]}
        for name in NUISANCE_PARAMS:
            x0.append(cfg.initial.get(name, guess[name]))
            lo, hi = cfg.bounds_for(name)
            lower.append(lo)
            upper.append(hi)
        scale += [abs(guess["amplitude"]), width_scale, g["height"]]

    x0 = np.asarray(x0, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    scale = np.asarray(scale, dtype=float)
    weights = [1.0 / s.sigma if cfg.weighted else np.ones(len(s)) for s in specs]

    def residuals(x):
        return np.concatenate([
            (s.counts - rayleigh_lineshape(s.detuning, params_from_dict(values_for(x, i)))) * w
            for i, (s, w) in enumerate(zip(specs, weights))])

    lm = levenberg_marquardt(residuals, x0, lower, upper, scale,
                             xtol=cfg.xtol, max_iter=cfg.max_iter, rel_step=cfg.fd_step)
    if not lm.converged:
        log.warning("fit did not converge: %s", lm.message)

    r = residuals(lm.x)
    chi2 = float(r @ r)
    dof = n_pts - n_par
    cov = np.linalg.pinv(lm.jac.T @ lm.jac)
    if not cfg.weighted:
        cov = cov * chi2 / max(dof, 1)
    err = np.sqrt(np.clip(np.diag(cov), 0, None))

    shared_vals = dict(zip(shared, lm.x[:n_sh]))
    shared_errs = dict(zip(shared, err[:n_sh]))
    results = []
    for i, s in enumerate(specs):
        vals = values_for(lm.x, i)
        off = n_sh + 3 * i
        idx = list(range(n_sh)) + [off, off + 1, off + 2]
        sub_cov = cov[np.ix_(idx, idx)]
        errors = {k: 0.0 for k in PHYSICS_PARAMS}
        errors.update(shared_errs)
        errors.update(zip(NUISANCE_PARAMS, err[off:off + 3]))
        width, grad = _fwhm_sensitivity(vals, shared)
        width_err = float(np.sqrt(max(grad @ sub_cov[:n_sh, :n_sh] @ grad, 0.0)))
        res = s.counts - rayleigh_lineshape(s.detuning, params_from_dict(vals))
        rw = res * weights[i]
        results.append(FitResult(
            values=vals, errors=errors, free=tuple(shared) + NUISANCE_PARAMS,
            covariance=sub_cov, chi2=float(rw @ rw), dof=len(s) - n_sh - 3, residuals=res,
            fwhm=width, fwhm_err=width_err, data_fwhm=data_fwhm(s, vals["baseline"]),
            converged=lm.converged, n_iter=lm.n_iter, message=lm.message,
            cost_history=lm.history, label=s.label, nu_osc=s.nu_osc))
    return JointFitResult(shared_vals, shared_errs, results, chi2, dof, lm.converged, lm.n_iter)


def fit_single_atom(spec, cfg=None):
    """Fit one spectrum with the shared widths in ``cfg.free`` (default: both sigma_inh)."""
    cfg = FitConfig.single_atom() if cfg is None else cfg
    return _joint_fit([spec], cfg).results[0]


def fit_constant_depletion(specs, cfg=None):
    """Joint fit of a spectrum set sharing gamma_dep and both inhomogeneous widths."""
    cfg = FitConfig.constant_depletion() if cfg is None else cfg
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one spectrum")
    if "gamma_dep" not in cfg.free:
        raise ValueError("constant-depletion fits need gamma_dep free")
    # fit in a canonical order so the shared result does not depend on input order
    order = sorted(range(len(specs)), key=lambda i: _spectrum_key(specs[i]))
    joint = _joint_fit([specs[i] for i in order], cfg)
    results = [None] * len(specs)
    for pos, i in enumerate(order):
        results[i] = joint.results[pos]
    joint.results = results
    return joint


def _spectrum_key(spec):
    nu = -np.inf if spec.nu_osc is None else spec.nu_osc
    return (nu, spec.label, len(spec), spec.detuning.tobytes(), spec.counts.tobytes(),
            spec.sigma.tobytes())


def fwhm_curve(nu_osc, cfg):
    """Model FWHM (kHz) at each oscillation frequency in ``nu_osc`` (kHz).

    Width parameters come from ``cfg.fixed``; tunneling widths and weights
    are derived per frequency unless fixed there too.
    """
    out = []
    for nu in np.atleast_1d(np.asarray(nu_osc, dtype=float)):
        values = dict(cfg.fixed)
        values.update(derived_parameters(nu, cfg))
        values.update(amplitude=1.0, center=0.0, baseline=0.0)
        missing = set(PHYSICS_PARAMS) - set(values)
        if missing:
            raise ValueError(f"fwhm_curve needs fixed values for {sorted(missing)}")
        out.append((float(nu), model_fwhm(params_from_dict(values))))
    return out


def model_overlay(result, grid):
    """Best-fit total and its two Voigt components (each with baseline) on ``grid``."""
    p = result.params
    g, e = rayleigh_components(grid, p)
    return rayleigh_lineshape(grid, p), g + p.baseline, e + p.baseline
