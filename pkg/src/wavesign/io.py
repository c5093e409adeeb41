"""File formats for signals, coefficient grids, magnitude and sign fields.

CSV files carry one ``# {json}`` metadata line before the column header so a
file can be read back without side information. Floats are written with 17
significant digits, which round-trips float64 exactly.

Signals also have a compact binary form: one JSON header line terminated by
``\\n``, followed by little-endian float64 samples interleaved as
``re, im, re, im, ...``.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .cwt import CoefficientGrid, HyperbolicLattice
from .errors import DomainError
from .signal import Signal
from .signret import STATUS_NAMES, MagnitudeField, SignField
from .wavelets import WaveletSpec

_FMT = "%.17g"
BINARY_MAGIC = "wavesign-signal"


def _read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    text = Path(path).read_text()
    lines = text.splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            try:
                meta.update(json.loads(line[1:].strip()))
            except json.JSONDecodeError as exc:
                raise DomainError(f"{path}: bad metadata line") from exc
        elif line.strip():
            body.append(line)
    if not body:
        raise DomainError(f"{path}: no CSV header")
    header = [h.strip() for h in next(csv.reader([body[0]]))]
    rows = body[1:]
    if not rows:
        return meta, header, np.zeros((0, len(header)))
    try:
        data = np.loadtxt(_io.StringIO("\n".join(rows)), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DomainError(f"{path}: non-numeric CSV data") from exc
    if data.shape[1] != len(header):
        raise DomainError(f"{path}: {data.shape[1]} columns but {len(header)} header names")
    return meta, header, data


def _write_csv(path, meta: dict, header: list[str], data: np.ndarray):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    buf.write(",".join(header) + "\n")
    np.savetxt(buf, np.atleast_2d(data), delimiter=",", fmt=_FMT)
    path.write_text(buf.getvalue())


def _column(header, data, name, path):
    try:
        return data[:, header.index(name)]
    except ValueError:
        raise DomainError(f"{path}: missing column {name!r}") from None


# -- signals ----------------------------------------------------------------

def write_signal_csv(path, f: Signal):
    meta = {"kind": "signal", "n": f.n, "dx": f.dx, "x0": f.x0, "real": f.real}
    data = np.column_stack([f.x, f.samples.real, f.samples.imag])
    _write_csv(path, meta, ["x", "re", "im"], data)


def read_signal_csv(path) -> Signal:
    """Read a signal CSV with columns ``x, re[, im]``.

    Without a metadata line, ``x0`` and ``dx`` are taken from the ``x``
    column, which must then be uniform.
    """
    meta, header, data = _read_csv(path)
    if data.shape[0] == 0:
        raise DomainError(f"{path}: empty signal")
    re = _column(header, data, "re", path)
    im = data[:, header.index("im")] if "im" in header else np.zeros_like(re)
    if "dx" in meta:
        dx, x0 = float(meta["dx"]), float(meta["x0"])
    else:
        x = _column(header, data, "x", path)
        if x.size < 2:
            raise DomainError(f"{path}: cannot infer dx from one sample")
        steps = np.diff(x)
        dx, x0 = float(np.mean(steps)), float(x[0])
        if np.max(np.abs(steps - dx)) > 1e-9 * abs(dx):
            raise DomainError(f"{path}: x column is not uniformly spaced")
    real = meta.get("real", not np.any(im))
    return Signal(re + 1j * im, dx, x0, real=bool(real))


def write_signal_binary(path, f: Signal):
    header = {"format": BINARY_MAGIC, "n": f.n, "dx": f.dx, "x0": f.x0, "real": f.real,
              "dtype": "<f8", "layout": "interleaved"}
    inter = np.empty(2 * f.n, dtype="<f8")
    inter[0::2] = f.samples.real
    inter[1::2] = f.samples.imag
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        fh.write(inter.tobytes())


def read_signal_binary(path) -> Signal:
    raw = Path(path).read_bytes()
    cut = raw.find(b"\n")
    if cut < 0:
        raise DomainError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:cut])
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: bad header") from exc
    if header.get("format") != BINARY_MAGIC:
        raise DomainError(f"{path}: not a wavesign binary signal")
    n = int(header["n"])
    body = raw[cut + 1:]
    if len(body) != 16 * n:
        raise DomainError(f"{path}: expected {16 * n} data bytes, found {len(body)}")
    inter = np.frombuffer(body, dtype="<f8")
    return Signal(inter[0::2] + 1j * inter[1::2], header["dx"], header["x0"], real=header["real"])


def read_signal(path) -> Signal:
    """Read a signal by extension: ``.csv`` or binary (anything else)."""
    return read_signal_csv(path) if str(path).lower().endswith(".csv") else read_signal_binary(path)


def write_signal(path, f: Signal):
    if str(path).lower().endswith(".csv"):
        write_signal_csv(path, f)
    else:
        write_signal_binary(path, f)


# -- lattice-aligned tables ------------------------------------------------

def _lattice_columns(lat: HyperbolicLattice) -> np.ndarray:
    return np.column_stack([lat.m, lat.n, lat.b, lat.a])


def _check_lattice(lat: HyperbolicLattice, header, data, path):
    if data.shape[0] != len(lat):
        raise DomainError(f"{path}: {data.shape[0]} rows for a {len(lat)}-point lattice")
    m = _column(header, data, "m", path)
    n = _column(header, data, "n", path)
    if np.any(m != lat.m) or np.any(n != lat.n):
        raise DomainError(f"{path}: rows do not follow the lattice order")


def _lattice_from_meta(meta, path) -> HyperbolicLattice:
    if "lattice" not in meta:
        raise DomainError(f"{path}: metadata has no lattice")
    return HyperbolicLattice.from_dict(meta["lattice"])


def write_coefficients_csv(path, grid: CoefficientGrid, extra: dict | None = None):
    meta = {"kind": "coefficients", "lattice": grid.lattice.to_dict(),
            "wavelets": [w.to_dict() for w in grid.wavelets], **(extra or {})}
    cols = [_lattice_columns(grid.lattice)]
    header = ["m", "n", "b", "a"]
    for i in range(len(grid.wavelets)):
        cols += [grid.values[i].real, grid.values[i].imag]
        header += [f"w{i}_re", f"w{i}_im"]
    _write_csv(path, meta, header, np.column_stack(cols))


def read_coefficients_csv(path) -> CoefficientGrid:
    meta, header, data = _read_csv(path)
    lat = _lattice_from_meta(meta, path)
    _check_lattice(lat, header, data, path)
    ws = tuple(WaveletSpec.from_dict(d) for d in meta.get("wavelets", []))
    vals = np.array([_column(header, data, f"w{i}_re", path) + 1j * _column(header, data, f"w{i}_im", path)
                     for i in range(len(ws))])
    return CoefficientGrid(lat, ws, vals)


def write_coefficients_json(path, grid: CoefficientGrid, extra: dict | None = None):
    doc = {"kind": "coefficients", "lattice": grid.lattice.to_dict(),
           "wavelets": [w.to_dict() for w in grid.wavelets],
           "m": grid.lattice.m.tolist(), "n": grid.lattice.n.tolist(),
           "re": grid.values.real.tolist(), "im": grid.values.imag.tolist(), **(extra or {})}
    Path(path).write_text(json.dumps(doc))


def read_coefficients_json(path) -> CoefficientGrid:
    doc = json.loads(Path(path).read_text())
    lat = HyperbolicLattice.from_dict(doc["lattice"])
    ws = tuple(WaveletSpec.from_dict(d) for d in doc["wavelets"])
    return CoefficientGrid(lat, ws, np.array(doc["re"]) + 1j * np.array(doc["im"]))


def write_magnitudes_csv(path, mf: MagnitudeField, wavelets=None, extra: dict | None = None):
    meta = {"kind": "magnitudes", "lattice": mf.lattice.to_dict(), **(extra or {})}
    if wavelets is not None:
        meta["wavelets"] = [w.to_dict() for w in wavelets]
    header = ["m", "n", "b", "a"] + [f"m{i + 1}" for i in range(mf.width)]
    _write_csv(path, meta, header, np.column_stack([_lattice_columns(mf.lattice), mf.triples]))


def read_magnitudes_csv(path) -> tuple[MagnitudeField, dict]:
    """Magnitude field plus the file's metadata (lattice, wavelets, grid, seed...)."""
    meta, header, data = _read_csv(path)
    lat = _lattice_from_meta(meta, path)
    _check_lattice(lat, header, data, path)
    k = sum(1 for h in header if h.startswith("m") and h[1:].isdigit())
    if k == 0:
        raise DomainError(f"{path}: no magnitude columns")
    mags = np.column_stack([_column(header, data, f"m{i + 1}", path) for i in range(k)])
    return MagnitudeField(lat, mags), meta


def write_magnitudes_json(path, mf: MagnitudeField, wavelets=None, extra: dict | None = None):
    doc = {"kind": "magnitudes", "lattice": mf.lattice.to_dict(),
           "m": mf.lattice.m.tolist(), "n": mf.lattice.n.tolist(),
           "magnitudes": mf.triples.tolist(), **(extra or {})}
    if wavelets is not None:
        doc["wavelets"] = [w.to_dict() for w in wavelets]
    Path(path).write_text(json.dumps(doc))


def read_magnitudes_json(path) -> tuple[MagnitudeField, dict]:
    doc = json.loads(Path(path).read_text())
    lat = HyperbolicLattice.from_dict(doc["lattice"])
    return MagnitudeField(lat, np.array(doc["magnitudes"], dtype=float)), doc


def read_magnitudes(path) -> tuple[MagnitudeField, dict]:
    return read_magnitudes_json(path) if str(path).lower().endswith(".json") else read_magnitudes_csv(path)


def write_sign_field_csv(path, sf: SignField, coefficients: np.ndarray | None = None):
    """Pointwise vectors, status names and signs; optional final signed coefficients."""
    meta = {"kind": "sign_field", "lattice": sf.lattice.to_dict(), "tau": sf.tau, "delta": sf.delta,
            "status_codes": dict(enumerate(STATUS_NAMES))}
    eps = sf.eps if sf.eps is not None else np.zeros(len(sf.lattice), dtype=np.int8)
    cols = [_lattice_columns(sf.lattice), sf.v, sf.status, eps]
    header = ["m", "n", "b", "a", "v1", "v2", "status", "eps"]
    if coefficients is not None:
        cols.append(coefficients)
        header += ["c1", "c2"]
    _write_csv(path, meta, header, np.column_stack(cols))


def read_sign_field_csv(path) -> SignField:
    meta, header, data = _read_csv(path)
    lat = _lattice_from_meta(meta, path)
    _check_lattice(lat, header, data, path)
    v = np.column_stack([_column(header, data, "v1", path), _column(header, data, "v2", path)])
    st = _column(header, data, "status", path).astype(np.int8)
    eps = _column(header, data, "eps", path).astype(np.int8)
    has_eps = bool(np.any(eps != 0))
    return SignField(lat, v, st, eps if has_eps else None, None, meta.get("tau", 0.0),
                     meta.get("delta", 1e-6))
