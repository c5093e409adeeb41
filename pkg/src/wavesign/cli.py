"""Command-line interface: ``wavesign <command> [options]``.

Commands
--------
transform       wavelet coefficients and magnitudes of a signal on a lattice
retrieve        recover a real signal, up to sign, from a magnitude file
density         lattice density predicates
framebounds     empirical frame bounds of the (P, HP) pair
counterexample  complex signal pair with identical real-wavelet scalograms
selftest        quick end-to-end sanity run

Options may also come from a JSON file given with ``--config``; flags given
on the command line take precedence. Exit status is 0 on success, 2 for
invalid input and 3 for numerical non-convergence (or a failed self-test).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import io as wio
from .cwt import HyperbolicLattice, cwt_lattice, default_lattice, density_report
from .errors import CapacityError, ConvergenceError, DomainError
from .frames import FrameSystem, frame_bounds_estimate
from .generators import generate, random_complex
from .signal import dft
from .signret import (MagnitudeField, MeasurementVectors, SyncOptions, conjugate_counterexample,
                      phase_distance, recover_signal, recover_signal_two, up_to_sign_error)
from .wavelets import WaveletSpec, hilbert_poisson, parse_wavelets, poisson

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3

DEFAULTS = {
    "common": {"p": 1.0, "alpha": 2.0, "beta": None, "n": 256, "dx": 1.0 / 16, "x0": -8.0,
               "seed": 0, "threads": 1},
    "transform": {"input": None, "generator": "interior", "wavelets": "poisson,hpoisson,combo:1,1",
                  "coeffs": "coefficients.csv", "mags": "magnitudes.csv", "signal_out": None,
                  "config_out": None, "format": "csv"},
    "retrieve": {"mags": "magnitudes.csv", "out": "recovered.csv", "report": "report.json",
                 "signs": None, "truth": None, "tol": 1e-8, "max_iter": 200, "cg_tol": 1e-12,
                 "ablation": False, "flip_pointwise": False},
    "density": {"w": None, "out": None},
    "framebounds": {"d": None, "trials": 3, "out": None},
    "counterexample": {"input": None, "out_dir": ".", "out": None},
    "selftest": {},
}


class ValidationError(Exception):
    pass


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o)}")


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _echo(cfg: dict) -> dict:
    return {"version": __version__, "seed": cfg["seed"], "config": cfg}


def _lattice(cfg) -> HyperbolicLattice:
    return default_lattice(cfg["n"], cfg["dx"], cfg["alpha"], cfg["beta"])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_transform(cfg: dict) -> int:
    if cfg["input"]:
        f = wio.read_signal(cfg["input"])
        cfg.update(n=f.n, dx=f.dx, x0=f.x0)
    else:
        f = generate(cfg["generator"], cfg["seed"], cfg["n"], cfg["dx"], cfg["x0"])
    wavelets = parse_wavelets(cfg["wavelets"], cfg["p"])
    lat = _lattice(cfg)
    grid = cwt_lattice(dft(f), wavelets, lat, workers=cfg["threads"])
    meta = {"grid": {"n": f.n, "dx": f.dx, "x0": f.x0}, "seed": cfg["seed"], "version": __version__,
            "p": cfg["p"], "wavelets": [w.to_dict() for w in wavelets]}
    mf = MagnitudeField(lat, grid.magnitudes().T)
    if cfg["format"] == "json":
        wio.write_coefficients_json(cfg["coeffs"], grid, meta)
        wio.write_magnitudes_json(cfg["mags"], mf, wavelets, meta)
    elif cfg["format"] == "csv":
        wio.write_coefficients_csv(cfg["coeffs"], grid, meta)
        wio.write_magnitudes_csv(cfg["mags"], mf, wavelets, meta)
    else:
        raise ValidationError(f"unknown format {cfg['format']!r}")
    if cfg["signal_out"]:
        wio.write_signal(cfg["signal_out"], f)
    if cfg["config_out"]:
        _dump({"command": "retrieve", "mags": str(cfg["mags"]), "truth": cfg["signal_out"],
               "p": cfg["p"], "seed": cfg["seed"]}, cfg["config_out"])
    print(f"transform: {len(lat)} points x {len(wavelets)} wavelets -> {cfg['coeffs']}, {cfg['mags']}")
    return EXIT_OK


def _system_from_meta(meta: dict, lat: HyperbolicLattice, p: float) -> FrameSystem:
    grid = meta.get("grid")
    if grid is None:
        raise ValidationError("magnitude file carries no signal grid")
    geom = (int(grid["n"]), float(grid["dx"]), float(grid["x0"]))
    return FrameSystem((poisson(p), hilbert_poisson(p)), lat, geom)


def cmd_retrieve(cfg: dict) -> int:
    mf, meta = wio.read_magnitudes(cfg["mags"])
    wavelets = [WaveletSpec.from_dict(d) for d in meta.get("wavelets", [])]
    if len(wavelets) != mf.width:
        raise ValidationError("magnitude file does not list one wavelet per column")
    if any(not w.is_real for w in wavelets):
        raise ValidationError("sign retrieval needs real wavelets")
    p = wavelets[0].p if wavelets else cfg["p"]
    sys_ = _system_from_meta(meta, mf.lattice, p)
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if cfg["ablation"]:
            if mf.width != 2:
                raise ValidationError("ablation mode reads a two-column magnitude file")
            res = recover_signal_two(mf, sys_, max_iter=cfg["max_iter"], tol=cfg["tol"])
        else:
            vecs = MeasurementVectors.from_wavelets(wavelets)
            opts = SyncOptions(tol=cfg["tol"], max_iter=cfg["max_iter"], cg_tol=cfg["cg_tol"])
            res = recover_signal(mf, sys_, vecs, opts, flip_pointwise=cfg["flip_pointwise"])
    report = dict(res.report)
    report["warnings"] = [str(w.message) for w in caught]
    report["runtime_s"] = time.perf_counter() - t0
    report.update(_echo(cfg))
    report["source_seed"] = meta.get("seed")
    if cfg["truth"]:
        truth = wio.read_signal(cfg["truth"])
        report["relative_error"] = up_to_sign_error(res.signal, truth)
    if report.get("density_warning"):
        print("WARNING: lattice density exceeds the sign-retrieval uniqueness threshold", file=sys.stderr)
    wio.write_signal(cfg["out"], res.signal)
    if cfg["signs"] and res.sync is not None:
        wio.write_sign_field_csv(cfg["signs"], res.sync.field, res.sync.coefficients)
    _dump(report, cfg["report"])
    msg = f"retrieve: wrote {cfg['out']}"
    if "relative_error" in report:
        msg += f", relative error {report['relative_error']:.3e}"
    print(msg)
    if not report.get("converged", True):
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_density(cfg: dict) -> int:
    beta = cfg["beta"] if cfg["beta"] is not None else 4 * math.pi / (5 * math.log(cfg["alpha"]))
    w = None
    if cfg["w"] is not None:
        w = [float(t) for t in str(cfg["w"]).split(",")] if not isinstance(cfg["w"], list) else cfg["w"]
    rep = density_report(beta, cfg["alpha"], cfg["p"], w).to_dict()
    rep.update(_echo(cfg))
    _dump(rep, cfg["out"])
    return EXIT_OK


def cmd_framebounds(cfg: dict) -> int:
    beta = cfg["beta"]
    if cfg["d"] is not None:
        beta = float(cfg["d"]) / math.log(cfg["alpha"])
    cfg["beta"] = beta
    lat = _lattice(cfg)
    sys_ = FrameSystem((poisson(cfg["p"]), hilbert_poisson(cfg["p"])), lat,
                       (cfg["n"], cfg["dx"], cfg["x0"]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fb = frame_bounds_estimate(sys_, trials=cfg["trials"], seed=cfg["seed"])
    rep = fb.to_dict()
    rep.update({"d": lat.density, "n_points": len(lat)}, **_echo(cfg))
    _dump(rep, cfg["out"])
    return EXIT_OK if fb.converged else EXIT_NONCONVERGED


def cmd_counterexample(cfg: dict) -> int:
    if cfg["input"]:
        f = wio.read_signal(cfg["input"])
        cfg.update(n=f.n, dx=f.dx, x0=f.x0)
    else:
        f = random_complex(cfg["seed"], cfg["n"], cfg["dx"], cfg["x0"])
    g = conjugate_counterexample(f)
    lat = _lattice(cfg)
    ws = [poisson(cfg["p"]), hilbert_poisson(cfg["p"])]
    mf = cwt_lattice(dft(f), ws, lat, workers=cfg["threads"]).magnitudes()
    mg = cwt_lattice(dft(g), ws, lat, workers=cfg["threads"]).magnitudes()
    gap = float(np.max(np.abs(mf - mg)))
    out_dir = Path(cfg["out_dir"])
    wio.write_signal(out_dir / "counterexample_f.csv", f)
    wio.write_signal(out_dir / "counterexample_g.csv", g)
    rep = {"max_scalogram_gap": gap, "max_magnitude": float(np.max(mf)),
           "relative_gap": gap / float(np.max(mf)), "phase_distance": phase_distance(f, g),
           "n_points": len(lat), **_echo(cfg)}
    _dump(rep, cfg["out"] or out_dir / "counterexample.json")
    print(f"counterexample: max scalogram gap {gap:.3e}, phase distance {rep['phase_distance']:.3f}")
    return EXIT_OK


def cmd_selftest(cfg: dict) -> int:
    from .generators import interior_real
    from .frames import analysis

    checks = []
    rep = density_report(4 * math.pi / (5 * math.log(2)), 2.0, 1.0)
    checks.append(("density", rep.sign_retrieval_unique))
    lat = default_lattice(cfg["n"], cfg["dx"])
    ws = (poisson(), hilbert_poisson(), parse_wavelets("combo:1,1")[0])
    geom = (cfg["n"], cfg["dx"], cfg["x0"])
    f = interior_real(cfg["seed"], *geom)
    mf = MagnitudeField.from_coefficients(lat, analysis(f, FrameSystem(ws, lat, geom)))
    res = recover_signal(mf, FrameSystem(ws[:2], lat, geom), MeasurementVectors.from_wavelets(ws))
    err = up_to_sign_error(res.signal, f)
    checks.append(("recovery", err <= 1e-3))
    h = random_complex(cfg["seed"], *geom)
    g = conjugate_counterexample(h)
    a = cwt_lattice(dft(h), ws[:1], lat).magnitudes()
    b = cwt_lattice(dft(g), ws[:1], lat).magnitudes()
    checks.append(("counterexample", np.max(np.abs(a - b)) <= 1e-10 * np.max(a)))
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_NONCONVERGED


COMMANDS = {"transform": cmd_transform, "retrieve": cmd_retrieve, "density": cmd_density,
            "framebounds": cmd_framebounds, "counterexample": cmd_counterexample,
            "selftest": cmd_selftest}


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--config", help="JSON file with option values")
    common.add_argument("-p", type=float, help="wavelet order (default 1)")
    common.add_argument("--alpha", type=float, help="lattice dilation base (default 2)")
    common.add_argument("--beta", type=float, help="lattice translation step (default 4 pi/(5 ln alpha))")
    common.add_argument("--n", type=int, help="grid length for generated signals (default 256)")
    common.add_argument("--dx", type=float, help="grid spacing (default 1/16)")
    common.add_argument("--x0", type=float, help="grid origin (default -8)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--threads", type=int, help="worker threads for lattice transforms")

    parser = argparse.ArgumentParser(prog="wavesign", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"wavesign {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", parents=[common], argument_default=S,
                       help="lattice wavelet coefficients and magnitudes")
    t.add_argument("--input", help="signal file (.csv or binary)")
    t.add_argument("--generator", help="synthetic signal: interior, real, meanfree, zero")
    t.add_argument("--wavelets", help="comma list, e.g. poisson,hpoisson,combo:1,1")
    t.add_argument("--coeffs", help="coefficient output file")
    t.add_argument("--mags", help="magnitude output file")
    t.add_argument("--signal-out", dest="signal_out", help="also write the analysed signal")
    t.add_argument("--config-out", dest="config_out", help="write a retrieve config")
    t.add_argument("--format", choices=["csv", "json"])

    r = sub.add_parser("retrieve", parents=[common], argument_default=S,
                       help="recover a signal from magnitudes")
    r.add_argument("--mags", help="magnitude file written by transform")
    r.add_argument("--out", help="recovered signal file")
    r.add_argument("--report", help="JSON quality report")
    r.add_argument("--signs", help="optional sign-field CSV")
    r.add_argument("--truth", help="ground-truth signal for error reporting")
    r.add_argument("--tol", type=float)
    r.add_argument("--max-iter", dest="max_iter", type=int)
    r.add_argument("--cg-tol", dest="cg_tol", type=float)
    r.add_argument("--ablation", action="store_true", help="two-wavelet mode (no guarantees)")
    r.add_argument("--flip-pointwise", dest="flip_pointwise", action="store_true",
                   help="negate every pointwise vector before synchronization")

    d = sub.add_parser("density", parents=[common], argument_default=S, help="density predicates")
    d.add_argument("--w", help="extra Bergman weights, comma separated")
    d.add_argument("--out", help="JSON output (stdout if omitted)")

    fb = sub.add_parser("framebounds", parents=[common], argument_default=S, help="frame bounds")
    fb.add_argument("--d", type=float, help="density beta ln(alpha); overrides --beta")
    fb.add_argument("--trials", type=int)
    fb.add_argument("--out", help="JSON output (stdout if omitted)")

    c = sub.add_parser("counterexample", parents=[common], argument_default=S,
                       help="complex pair with equal scalograms")
    c.add_argument("--input", help="complex signal file")
    c.add_argument("--out-dir", dest="out_dir")
    c.add_argument("--out", help="JSON report path")

    sub.add_parser("selftest", parents=[common], argument_default=S, help="quick sanity run")
    return parser


def resolve_config(command: str, flags: dict) -> dict:
    """Defaults, then the ``--config`` file, then explicit flags."""
    cfg = dict(DEFAULTS["common"])
    cfg.update(DEFAULTS[command])
    path = flags.pop("config", None)
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValidationError("config file must hold a JSON object")
        loaded.pop("command", None)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    cfg.update(flags)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    try:
        cfg = resolve_config(command, args)
        return COMMANDS[command](cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (ValidationError, DomainError, CapacityError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
