"""Command-line front end.

Every run writes its outputs plus ``<first output>.manifest.json``. Relative
output paths are resolved against ``$LATTICE_SPECTRA_OUTDIR`` when set.
Frequencies in config files and CSV outputs are in kHz unless a ``--units``
option says otherwise.
"""

import argparse
import datetime
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .band_structure import LatticeDepth, bandwidth, depth_from_oscillation
from .constants import H, RB85_D2_WAVELENGTH, RB85_MASS, recoil_hz
from .fitting import (DERIVED_PARAMS, PHYSICS_PARAMS, DegenerateDataError, FitConfig,
                      derived_parameters, fit_constant_depletion, fit_single_atom, fwhm_curve,
                      model_overlay, synth_spectrum)
from .io import (ConfigError, DataError, dump_json, load_config, load_spectrum, save_spectrum,
                 sha256, write_csv, write_grid_binary, write_grid_csv)
from .lattice_field import (BeamConfig, PhaseConstraintError, characterize_well, find_minima,
                            potential_grid)
from .lineshape import CompositeParams, model_fwhm, rayleigh_components, rayleigh_lineshape
from .population import TemperatureModel, composite_weights, population_ratio, temperature
from .svgplot import Series, emit_plot

log = logging.getLogger("lattice_spectra")

OUTDIR_ENV = "LATTICE_SPECTRA_OUTDIR"
EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 3, 4, 5


# -- config sections -----------------------------------------------------------

def beam_config(cfg):
    sec = cfg.get("lattice", {})
    wavelength = float(sec.get("wavelength", RB85_D2_WAVELENGTH))
    if "phases" in sec:
        return BeamConfig(tuple(sec["phases"]), wavelength=wavelength,
                          phase_tol=float(sec.get("phase_tol", 1e-9)),
                          enforce=bool(sec.get("enforce", True)))
    return BeamConfig.from_path_lengths(float(sec.get("d1", 0.0)), float(sec.get("d2", 0.0)),
                                        wavelength, float(sec.get("common_phase", 0.0)))


def temperature_model(cfg):
    sec = cfg.get("temperature", {})
    keys = ("a0", "a1", "a2", "nu_min", "nu_max", "out_of_range")
    return TemperatureModel(**{k: sec[k] for k in keys if k in sec})


def band_settings(cfg):
    sec = cfg.get("bands", {})
    mass = float(sec.get("mass", RB85_MASS))
    wavelength = float(sec.get("wavelength", cfg.get("lattice", {}).get(
        "wavelength", RB85_D2_WAVELENGTH)))
    recoil = float(sec.get("recoil_hz", recoil_hz(mass, wavelength)))
    return recoil, sec.get("width_convention", "hwhm")


_MODEL_KEYS = ("gamma_tun_g", "gamma_tun_e", "gamma_dep", "sigma_res", "sigma_inh_g",
               "sigma_inh_e", "weight_g", "center", "amplitude", "baseline")


def model_params(cfg):
    """CompositeParams (kHz widths) from the [model] section, plus its nu_osc_khz.

    Missing tunneling widths or weight are derived from ``nu_osc_khz``.
    """
    sec = dict(cfg.get("model", {}))
    unknown = set(sec) - set(_MODEL_KEYS) - {"nu_osc_khz"}
    if unknown:
        raise ConfigError(f"[model]: unknown keys {sorted(unknown)}")
    nu = sec.pop("nu_osc_khz", None)
    values = {"gamma_dep": 1.3, "sigma_res": 1.0, "sigma_inh_g": 1.8, "sigma_inh_e": 1.8,
              "center": 0.0, "amplitude": 1.0, "baseline": 0.0}
    values.update({k: float(v) for k, v in sec.items()})
    if any(k not in values for k in DERIVED_PARAMS):
        if nu is None:
            raise ConfigError("[model]: give nu_osc_khz or gamma_tun_g, gamma_tun_e and weight_g")
        physics = {k: v for k, v in values.items() if k in PHYSICS_PARAMS}
        values.update(derived_parameters(float(nu), fit_config(cfg, {"free": [],
                                                                     "fixed": physics})))
    try:
        return CompositeParams.build(**values), nu
    except ValueError as exc:
        raise ConfigError(f"[model]: {exc}") from None


def fit_config(cfg, override=None):
    sec = dict(cfg.get("fit", {}))
    if override:
        sec.update(override)
    protocol = sec.get("protocol", "single-atom")
    if protocol == "constant-depletion":
        free = ("gamma_dep", "sigma_inh_g", "sigma_inh_e")
        fixed = {"sigma_res": 1.0}
    else:
        free = ("sigma_inh_g", "sigma_inh_e")
        fixed = {"gamma_dep": 1.3, "sigma_res": 1.0}
    free = tuple(sec.get("free", free))
    fixed = {k: v for k, v in fixed.items() if k not in free}
    fixed.update(sec.get("fixed", {}))
    recoil, convention = band_settings(cfg)
    kwargs = dict(free=free, fixed=fixed,
                  bounds={k: tuple(v) for k, v in sec.get("bounds", {}).items()},
                  initial=dict(sec.get("initial", {})), protocol=protocol,
                  xtol=float(sec.get("xtol", 1e-8)), max_iter=int(sec.get("max_iter", 500)),
                  fd_step=float(sec.get("fd_step", 1e-6)),
                  weighted=bool(sec.get("weighted", True)), recoil=recoil,
                  width_convention=convention, temperature_model=temperature_model(cfg),
                  s_ratio=float(sec.get("s_ratio", 3.0)))
    try:
        return FitConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[fit]: {exc}") from None


def parse_cell(text, wavelength):
    """``AxBxC`` in wavelengths (from the origin) or six comma-separated metre values."""
    try:
        if "," in text:
            v = [float(t) for t in text.split(",")]
            return np.array(v[:3]), np.array(v[3:])
        n = [float(t) for t in text.lower().split("x")]
        if len(n) != 3:
            raise ValueError
        return np.zeros(3), np.array(n) * wavelength
    except ValueError:
        raise ConfigError(f"bad --cell {text!r}; use e.g. 1x1x1") from None


def parse_range(text):
    """``start:stop:num`` or a comma-separated list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ConfigError(f"bad range {text!r}; use start:stop:num or a,b,c") from None


# -- subcommands ---------------------------------------------------------------

def cmd_lattice(args, cfg, out):
    beams = beam_config(cfg)
    sec = cfg.get("lattice", {})
    # full well depth in joules; default h x 1 MHz
    depth = float(sec.get("depth_scale", H * 1e3 * float(sec.get("depth_scale_khz", 1000.0))))
    cell = parse_cell(args.cell, beams.wavelength)
    grid = potential_grid(beams, cell, args.res, depth)
    write_grid_csv(out(args.out), grid)
    produced = [args.out]
    if args.binary:
        write_grid_binary(out(args.binary), grid)
        produced.append(args.binary)
    if args.wells:
        mass = float(sec.get("mass", RB85_MASS))
        wells = []
        for r in find_minima(beams, cell, depth):
            w = characterize_well(beams, r, depth, mass)
            wells.append({"position_m": w.position, "hessian_eigenvalues": w.hessian_eigenvalues,
                          "frequencies_hz": w.frequencies})
        dump_json(out(args.wells), {"depth_scale": depth, "mass": mass, "wells": wells})
        produced.append(args.wells)
    return produced


def cmd_bands(args, cfg, out):
    recoil, convention = band_settings(cfg)
    factor = {"hwhm": 1.0, "fwhm": 0.5}[convention]
    if args.nu:
        depths = [depth_from_oscillation(nu * 1e3, recoil) for nu in parse_range(args.nu)]
    else:
        depths = [LatticeDepth(s, recoil) for s in parse_range(args.s)]
    scale = {"hz": 1.0, "khz": 1e-3, "er": 1.0 / recoil}[args.units.lower()]
    u = args.units.lower()
    rows = []
    for d in depths:
        rows.append([d.s, d.harmonic_frequency * 1e-3,
                     factor * bandwidth(0, d) * scale, factor * bandwidth(1, d) * scale])
    write_csv(out(args.out), ["s", "nu_osc_khz", f"bw_s_{u}", f"bw_p_{u}"], rows,
              comments=[f"recoil_hz: {recoil!r}", f"width_convention: {convention}"])
    return [args.out]


def _grid_for(params, text):
    if text:
        return parse_range(text)
    w = model_fwhm(params)
    return params.center + np.linspace(-10 * w, 10 * w, 201)


def cmd_model(args, cfg, out):
    params, _ = model_params(cfg)
    grid = _grid_for(params, args.grid)
    values = rayleigh_lineshape(grid, params)
    comments = []
    if args.fwhm:
        w = model_fwhm(params)
        comments.append(f"fwhm_khz: {w!r}")
        print(f"fwhm_khz {w!r}")
    write_csv(out(args.out), ["detuning_khz", "value"], zip(grid, values), comments=comments)
    produced = [args.out]
    if args.svg:
        g, e = rayleigh_components(grid, params)
        emit_plot([Series(grid, values, "Rayleigh peak"),
                   Series(grid, g + params.baseline, "ground (s)", "dashed"),
                   Series(grid, e + params.baseline, "excited (p)", "dashed")],
                  out(args.svg), xlabel="detuning (kHz)", ylabel="signal")
        produced.append(args.svg)
    return produced


def cmd_weights(args, cfg, out):
    model = temperature_model(cfg)
    s_ratio = float(cfg.get("fit", {}).get("s_ratio", 3.0))
    t_uk = float(temperature(args.nu, model))
    r = float(population_ratio(args.nu * 1e3, t_uk * 1e-6))
    w = composite_weights(r, s_ratio)
    result = {"nu_osc_khz": args.nu, "temperature_uk": t_uk, "ratio": r,
              "weight_g": w.weight_g, "weight_e": w.weight_e, "s_ratio": s_ratio}
    print(f"r={r:.6f} w_g={w.weight_g:.6f} w_e={w.weight_e:.6f}")
    dump_json(out(args.out), result)
    return [args.out]


def cmd_synth(args, cfg, out):
    params, nu = model_params(cfg)
    grid = _grid_for(params, args.grid)
    clean = rayleigh_lineshape(grid, params)
    if args.noise_mode == "relative":
        noise = args.noise * clean
    elif args.noise_mode == "poisson":
        noise = np.sqrt(np.maximum(clean, 1.0))
    else:
        noise = np.full_like(grid, args.noise)
    spec = synth_spectrum(params, grid, noise, seed=args.seed,
                          nu_osc=None if nu is None else float(nu), label=args.label)
    save_spectrum(out(args.out), spec)
    return [args.out]


def _load_spectra(args):
    specs = []
    for path in args.spectrum:
        specs.append(load_spectrum(path, nu_osc=args.nu))
    return specs


def cmd_fit(args, cfg, out):
    fcfg = fit_config(cfg)
    specs = _load_spectra(args)
    if fcfg.protocol == "constant-depletion":
        joint = fit_constant_depletion(specs, fcfg)
        results = joint.results
        payload = {"protocol": fcfg.protocol, **joint.to_dict()}
    else:
        if len(specs) != 1:
            raise ConfigError("single-atom protocol fits exactly one spectrum")
        results = [fit_single_atom(specs[0], fcfg)]
        payload = {"protocol": fcfg.protocol, **results[0].to_dict()}
    dump_json(out(args.out), payload)
    produced = [args.out]
    if args.residuals:
        rows = [[s.label or f"spectrum{i}", x, y, m, y - m]
                for i, (s, r) in enumerate(zip(specs, results))
                for x, y, m in zip(s.detuning, s.counts, s.counts - r.residuals)]
        write_csv(out(args.residuals), ["label", "detuning_khz", "counts", "model", "residual"],
                  rows)
        produced.append(args.residuals)
    if args.svg:
        s, r = specs[0], results[0]
        fine = np.linspace(s.detuning[0], s.detuning[-1], 400)
        total, g, e = model_overlay(r, fine)
        emit_plot([Series(s.detuning, s.counts, "data", "markers"),
                   Series(fine, total, "fit"),
                   Series(fine, g, "ground (s)", "dashed"),
                   Series(fine, e, "excited (p)", "dashed")],
                  out(args.svg), xlabel="detuning (kHz)", ylabel="counts",
                  title=s.label)
        produced.append(args.svg)
    return produced


def cmd_curve(args, cfg, out):
    sec = cfg.get("curve", {})
    model = temperature_model(cfg)
    if args.nu:
        nus = parse_range(args.nu)
    elif "nu_osc_khz" in sec:
        nus = np.asarray(sec["nu_osc_khz"], dtype=float)
    else:
        nus = np.linspace(model.nu_min, model.nu_max, int(sec.get("num", 25)))
    fixed = {"gamma_dep": 1.3, "sigma_res": 1.0, "sigma_inh_g": 1.8, "sigma_inh_e": 1.8}
    fixed.update({k: float(v) for k, v in sec.get("fixed", {}).items()})
    fcfg = fit_config(cfg, {"free": [], "fixed": fixed})
    curve = fwhm_curve(nus, fcfg)
    write_csv(out(args.out), ["nu_osc_khz", "fwhm_khz"], curve)
    produced = [args.out]
    if args.svg:
        x, y = np.array(curve).T
        emit_plot([Series(x, y, "model FWHM")], out(args.svg),
                  xlabel="oscillation frequency (kHz)", ylabel="FWHM (kHz)")
        produced.append(args.svg)
    return produced


# -- driver ----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="lattice-spectra", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="TOML or JSON configuration file")
        sp.add_argument("--out", required=True, help="primary output file")
        sp.add_argument("--seed", type=int, default=0)
        sp.set_defaults(func=func)
        return sp

    sp = add("lattice", cmd_lattice, "sample the light-shift potential on a grid")
    sp.add_argument("--cell", default="1x1x1")
    sp.add_argument("--res", type=int, default=32)
    sp.add_argument("--binary", help="also write a binary float64 dump")
    sp.add_argument("--wells", help="write well minima and oscillation frequencies (JSON)")

    sp = add("bands", cmd_bands, "tunneling bandwidths versus lattice depth")
    sp.add_argument("--s", default="0:40:41", help="depths in recoil units")
    sp.add_argument("--nu", help="oscillation frequencies in kHz (overrides --s)")
    sp.add_argument("--units", default="kHz", choices=["Hz", "kHz", "Er", "hz", "khz", "er"])

    sp = add("model", cmd_model, "evaluate the Rayleigh-peak model")
    sp.add_argument("--grid", help="detunings in kHz, start:stop:num")
    sp.add_argument("--svg")
    sp.add_argument("--fwhm", action="store_true", help="append the model FWHM")

    sp = add("weights", cmd_weights, "population ratio and component weights")
    sp.add_argument("--nu", type=float, required=True, help="oscillation frequency, kHz")

    sp = add("synth", cmd_synth, "synthetic noisy spectrum from the [model] section")
    sp.add_argument("--grid")
    sp.add_argument("--noise", type=float, default=0.0)
    sp.add_argument("--noise-mode", choices=["absolute", "relative", "poisson"],
                    default="absolute")
    sp.add_argument("--label", default="synthetic")

    sp = add("fit", cmd_fit, "fit spectra to the Rayleigh-peak model")
    sp.add_argument("--spectrum", action="append", required=True)
    sp.add_argument("--nu", type=float, help="oscillation frequency for all spectra, kHz")
    sp.add_argument("--residuals")
    sp.add_argument("--svg")

    sp = add("curve", cmd_curve, "model FWHM versus oscillation frequency")
    sp.add_argument("--nu", help="kHz, start:stop:num or list")
    sp.add_argument("--svg")
    return p


def _resolver():
    base = os.environ.get(OUTDIR_ENV)

    def out(path):
        path = Path(path)
        if base and not path.is_absolute():
            path = Path(base) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    return out


def run(argv=None):
    """Parse ``argv``, dispatch, write the manifest; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(message)s")
    started = datetime.datetime.now(datetime.timezone.utc)
    t0 = time.perf_counter()
    out = _resolver()
    try:
        cfg = load_config(args.config) if args.config else {}
        produced = args.func(args, cfg, out)
    except (ConfigError, PhaseConstraintError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DegenerateDataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    inputs = [p for p in [args.config] + list(getattr(args, "spectrum", None) or []) if p]
    manifest = {
        "tool": "lattice-spectra",
        "version": __version__,
        "command": args.command,
        "argv": list(argv) if argv is not None else sys.argv[1:],
        "arguments": {k: v for k, v in vars(args).items() if k != "func"},
        "config": cfg,
        "inputs": {str(p): sha256(p) for p in inputs},
        "outputs": {str(out(p)): sha256(out(p)) for p in produced},
        "started_utc": started.isoformat(),
        "wall_clock_s": time.perf_counter() - t0,
    }
    dump_json(Path(str(out(produced[0])) + ".manifest.json"), manifest)
    return 0


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
