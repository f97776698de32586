"""File formats: spectrum CSV, run configuration, potential-grid export, run manifests."""

import csv
import hashlib
import json
import struct
import sys
from pathlib import Path

import numpy as np

from .fitting import Spectrum

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SPECTRUM_COLUMNS = ("detuning_khz", "counts", "sigma")
GRID_MAGIC = b"LSGRID1\n"


class DataError(ValueError):
    """Malformed input data; ``row`` is the 1-based file line when known."""

    def __init__(self, message, row=None):
        super().__init__(f"line {row}: {message}" if row is not None else message)
        self.row = row


class ConfigError(ValueError):
    pass


def fmt(x):
    """Shortest round-tripping text for a float."""
    return repr(float(x))


# -- spectra -----------------------------------------------------------------

def load_spectrum(path, nu_osc=None, label=None):
    """Read a ``detuning_khz,counts[,sigma]`` CSV into a Spectrum.

    Leading ``# key: value`` lines supply metadata (``nu_osc_khz``, ``label``).
    Without a sigma column the Poisson default sqrt(max(counts, 1)) is used.
    """
    path = Path(path)
    meta = {}
    rows = []
    header = None
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                key, _, value = text[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            fields = next(csv.reader([text]))
            if header is None:
                header = [f.strip() for f in fields]
                if header[:2] != list(SPECTRUM_COLUMNS[:2]) or len(header) > 3 or \
                        (len(header) == 3 and header[2] != "sigma"):
                    raise DataError(f"expected header detuning_khz,counts[,sigma], got {text!r}",
                                    lineno)
                continue
            if len(fields) != len(header):
                raise DataError(f"expected {len(header)} fields, got {len(fields)}", lineno)
            try:
                values = [float(f) for f in fields]
            except ValueError:
                raise DataError(f"non-numeric field in {text!r}", lineno) from None
            if not all(np.isfinite(values)):
                raise DataError("non-finite value", lineno)
            if rows and values[0] <= rows[-1][1][0]:
                kind = "duplicated" if values[0] == rows[-1][1][0] else "non-increasing"
                raise DataError(f"{kind} detuning {fields[0]}", lineno)
            if len(values) == 3 and values[2] <= 0:
                raise DataError("sigma must be positive", lineno)
            rows.append((lineno, values))
    if header is None or not rows:
        raise DataError(f"{path}: no data rows")
    data = np.array([v for _, v in rows])
    if nu_osc is None and "nu_osc_khz" in meta:
        nu_osc = float(meta["nu_osc_khz"])
    if label is None:
        label = meta.get("label", path.stem)
    return Spectrum(data[:, 0], data[:, 1], data[:, 2] if data.shape[1] == 3 else None,
                    nu_osc=nu_osc, label=label)


def save_spectrum(path, spec, with_sigma=True):
    lines = []
    if spec.nu_osc is not None:
        lines.append(f"# nu_osc_khz: {fmt(spec.nu_osc)}")
    if spec.label:
        lines.append(f"# label: {spec.label}")
    lines.append(",".join(SPECTRUM_COLUMNS if with_sigma else SPECTRUM_COLUMNS[:2]))
    for i in range(len(spec)):
        row = [fmt(spec.detuning[i]), fmt(spec.counts[i])]
        if with_sigma:
            row.append(fmt(spec.sigma[i]))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_csv(path, header, rows, comments=()):
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines += [",".join(fmt(v) if not isinstance(v, str) else v for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


# -- configuration -------------------------------------------------------------

def load_config(path):
    """Parse a TOML or JSON configuration file into a dict."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from None


# -- potential grids -------------------------------------------------------------

def write_grid_csv(path, grid):
    X, Y, Z = np.meshgrid(grid.x, grid.y, grid.z, indexing="ij")
    cols = np.column_stack([X.ravel(), Y.ravel(), Z.ravel(), grid.intensity.ravel(),
                            grid.potential.ravel()])
    with open(path, "w") as fh:
        fh.write("x,y,z,intensity,potential\n")
        np.savetxt(fh, cols, fmt="%.17g", delimiter=",")


def grid_header(grid):
    return {
        "dims": list(grid.shape),
        "cell": [[float(grid.x[0]), float(grid.y[0]), float(grid.z[0])],
                 [float(grid.x[-1]), float(grid.y[-1]), float(grid.z[-1])]],
        "depth_scale": grid.depth_scale,
        "wavelength": grid.wavelength,
        "intensity_max": grid.intensity_max,
        "fields": ["intensity", "potential"],
        "dtype": "<f8",
        "order": "C",
    }


def write_grid_binary(path, grid):
    """Magic line, uint64 header length, JSON header, then (2, nx, ny, nz) float64 data."""
    header = json.dumps(grid_header(grid), sort_keys=True).encode()
    data = np.stack([grid.intensity, grid.potential]).astype("<f8", copy=False)
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        fh.write(np.ascontiguousarray(data).tobytes())


def read_grid_binary(path):
    """Return (header dict, array of shape (2, nx, ny, nz))."""
    raw = Path(path).read_bytes()
    if not raw.startswith(GRID_MAGIC):
        raise DataError(f"{path}: not a grid dump")
    off = len(GRID_MAGIC)
    (n,) = struct.unpack("<Q", raw[off:off + 8])
    header = json.loads(raw[off + 8:off + 8 + n])
    data = np.frombuffer(raw[off + 8 + n:], dtype=header["dtype"])
    return header, data.reshape([len(header["fields"])] + header["dims"])


# -- manifests -------------------------------------------------------------------

def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
