"""Command-line front end.

Every subcommand validates its inputs before writing any file. Reports are
JSON with a fixed key order and no timestamps (unless ``--stamp``), so
identical invocations produce byte-identical output. Errors go to stderr as
one JSON line; exit codes are 2 (malformed input or arguments), 3 (numerical
failure or unallowed warnings) and 4 (file I/O).

Lattice grammar: ``start:step:count`` or ``nat:N`` (the set {1..N}).
Values starting with ``-`` must be attached: ``--x=-10:0.2:101``.
Angle grammar: a radian literal or ``[-]pi``, ``pi/2``, ``pi/3``, ``pi/4``, ``pi/6``.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

from .density import density_report, parse_lattice, write_point_set
from .errors import DegenerateFieldError, GaborPhaseError, IllPosedError
from .frft import frft_profile, gabor_of_frft_measure, parse_angle
from .gabor import (
    ProductSamples,
    format_decimal,
    gabor_matrix,
    magnitude_samples,
    read_measurement_rows,
    samples_from_rows,
    write_measurements,
    write_spectrogram_pgm,
)
from .recovery import RecoveryConfig, recover_rotated, recover_signal, rotated_sample_points, verify_uniqueness
from .signals import BandlimitedSignal, make_grid, random_signal, read_signal, signal_to_dict, write_signal
from .zalik import build_dictionary, completeness_report, muntz_partial_sums

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


class WarningsNotAllowed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False, default=_json_default) + "\n"


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not serializable: {type(v)}")


def _finite(v):
    """JSON-safe float: non-finite values become strings."""
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_finite(x) for x in v]
    return v


def _write_json(path, obj, stamp: bool) -> None:
    if stamp:
        obj = {**obj, "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}
    Path(path).write_text(_dump(_finite(obj)))


def _distinct_paths(*paths) -> None:
    given = [Path(p).resolve() for p in paths if p is not None]
    if len(set(given)) != len(given):
        raise UsageError("input and output paths must be distinct")


def _lattice_points(text: str) -> np.ndarray:
    return parse_lattice(text).points


# -- subcommands ----------------------------------------------------------------


def cmd_synth(a) -> None:
    if a.zero:
        f = BandlimitedSignal.zeros(a.B, a.M, a.p)
    else:
        f = random_signal(a.B, a.M, a.p, seed=a.seed)
    write_signal(f, a.out)


def cmd_gabor(a) -> None:
    _distinct_paths(a.signal, a.out, a.pgm)
    f = read_signal(a.signal)
    X, Om = _lattice_points(a.x), _lattice_points(a.omega)
    G = gabor_matrix(f, X, Om)
    lines = ["x,omega,re,im,magnitude"]
    for i, x in enumerate(X):
        for k, w in enumerate(Om):
            z = G[i, k]
            lines.append(",".join(format_decimal(v) for v in (x, w, z.real, z.imag, abs(z))))
    Path(a.out).write_text("\n".join(lines) + "\n")
    if a.pgm:
        write_spectrogram_pgm(ProductSamples(X, Om, np.abs(G), f.B), a.pgm)


def cmd_sample(a) -> None:
    _distinct_paths(a.signal, a.out)
    f = read_signal(a.signal)
    X, Om = _lattice_points(a.x), _lattice_points(a.omega)
    if a.theta is None:
        write_measurements(magnitude_samples(f, X, Om), a.out)
        return
    theta = parse_angle(a.theta)
    pts = rotated_sample_points(theta, Om, X)
    mags = np.abs(gabor_of_frft_measure(f.grid.nodes, f.masses, theta, pts[:, 0], pts[:, 1]))
    lines = ["x,omega,magnitude"]
    lines += [",".join(format_decimal(v) for v in (p[0], p[1], m)) for p, m in zip(pts, mags)]
    Path(a.out).write_text("\n".join(lines) + "\n")


def cmd_density(a) -> None:
    _distinct_paths(a.out, a.points_out)
    X = parse_lattice(a.x)
    rep = density_report(X, a.B, semi_infinite=not a.finite)
    _write_json(a.out, {"x_decl": a.x, "B": a.B, **rep.to_dict()}, a.stamp)
    if a.points_out:
        write_point_set(X, a.points_out)


def cmd_zalik(a) -> None:
    grid = make_grid(a.B, a.M)
    centers = _lattice_points(a.centers)
    build_dictionary(centers, a.c, grid)  # validates c
    if a.target == "exp":
        target = lambda eta: np.exp(2j * np.pi * eta)  # noqa: E731
    else:
        target = lambda eta: np.exp(-a.c * (eta - centers[0]) ** 2)  # noqa: E731
    sets = [centers[:: 2**k] for k in range(a.nested - 1, -1, -1)]
    rep = completeness_report(target, sets, a.c, grid, a.ridge)
    by_abs = sorted(centers, key=lambda v: (abs(v), v))
    Ns = [2**k for k in range(int(math.log2(len(by_abs))) + 1)]
    if Ns[-1] != len(by_abs):
        Ns.append(len(by_abs))
    rep["muntz"] = muntz_partial_sums(by_abs, Ns).to_dict()
    _write_json(a.out, rep, a.stamp)


def cmd_frft(a) -> None:
    _distinct_paths(a.signal, a.out)
    f = read_signal(a.signal)
    theta = parse_angle(a.theta)
    prof = frft_profile(f, theta, a.A, a.Mout)
    out = BandlimitedSignal(prof.grid, prof.values, f.p)
    _write_json(a.out, {**signal_to_dict(out), "theta": theta, "truncation_energy": prof.truncation_energy}, a.stamp)


def _read_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(cfg, dict) or "B" not in cfg or "M" not in cfg:
        raise UsageError("config must be an object with at least B and M")
    unknown = set(cfg) - {"B", "M", "ridge1", "ridge2", "theta", "omega_decl", "x_decl"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def cmd_recover(a) -> None:
    _distinct_paths(a.measurements, a.config, a.out, a.report, a.truth)
    cfg = _read_config(a.config)
    B = float(cfg["B"])
    rc = RecoveryConfig(
        int(cfg["M"]),
        cfg.get("ridge1", RecoveryConfig.ridge1),
        cfg.get("ridge2", RecoveryConfig.ridge2),
    )
    rows = read_measurement_rows(a.measurements)
    truth = read_signal(a.truth) if a.truth else None
    workers = a.threads
    theta = cfg.get("theta")
    x_decl = parse_lattice(cfg["x_decl"]) if cfg.get("x_decl") else None
    if theta is None:
        samples = samples_from_rows(rows, B)
        fhat, report = recover_signal(samples, B, rc, truth=truth, X=x_decl, workers=workers)
        theta_val = None
    else:
        theta_val = parse_angle(theta) if isinstance(theta, str) else float(theta)
        if not cfg.get("omega_decl") or x_decl is None:
            raise UsageError("rotated recovery needs omega_decl and x_decl")
        Om = parse_lattice(cfg["omega_decl"]).points
        rot, report = recover_rotated(rows[:, :2], rows[:, 2], theta_val, Om, x_decl, B, rc, truth=truth,
                                      workers=workers)
        fhat = rot.profile
    if report.warnings and not a.allow_warnings:
        raise WarningsNotAllowed("; ".join(report.warnings))
    echo = {k: cfg.get(k) for k in ("B", "M", "ridge1", "ridge2", "theta", "omega_decl", "x_decl")}
    out = signal_to_dict(fhat)
    if theta_val is not None:
        out["theta"] = theta_val
    _write_json(a.out, out, False)
    _write_json(a.report, {"config": echo, **report.to_dict()}, a.stamp)


def cmd_verify(a) -> None:
    _distinct_paths(a.f, a.g, a.out)
    f, g = read_signal(a.f), read_signal(a.g)
    v = verify_uniqueness(f, g, _lattice_points(a.x), _lattice_points(a.omega), a.tol)
    rec = {"x_decl": a.x, "omega_decl": a.omega, "tol": a.tol, **v.to_dict()}
    if a.out:
        _write_json(a.out, rec, a.stamp)
    else:
        sys.stdout.write(_dump(_finite(rec)))


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gaborphase", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--threads", type=int, default=None, help="worker threads for data-parallel stages")
        sp.add_argument("--stamp", action="store_true", help="add a UTC timestamp to JSON reports")
        return sp

    s = common(sub.add_parser("synth", help="seeded random bandlimited signal"))
    s.add_argument("--B", type=float, required=True)
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--zero", action="store_true", help="write the zero signal instead")
    s.add_argument("--out", required=True)

    s = common(sub.add_parser("gabor", help="Gabor transform on a product grid (CSV, optional PGM)"))
    s.add_argument("--signal", required=True)
    s.add_argument("--x", required=True, help="lattice start:step:count")
    s.add_argument("--omega", required=True, help="lattice start:step:count")
    s.add_argument("--out", required=True)
    s.add_argument("--pgm", default=None)

    s = common(sub.add_parser("sample", help="magnitude measurements CSV"))
    s.add_argument("--signal", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--omega", required=True)
    s.add_argument("--theta", default=None, help="treat the signal as a profile F of F_theta F; sample R_{-theta}(Omega x X)")
    s.add_argument("--out", required=True)

    s = common(sub.add_parser("density", help="density diagnostics for a lattice"))
    s.add_argument("--x", required=True, help="start:step:count or nat:N")
    s.add_argument("--B", type=float, required=True)
    s.add_argument("--finite", action="store_true", help="restrict windows to the span of a one-sided set")
    s.add_argument("--out", required=True)
    s.add_argument("--points-out", default=None)

    s = common(sub.add_parser("zalik", help="Gaussian dictionary completeness diagnostics"))
    s.add_argument("--centers", required=True, help="lattice start:step:count")
    s.add_argument("--c", type=float, default=2 * math.pi)
    s.add_argument("--B", type=float, default=0.5)
    s.add_argument("--M", type=int, default=257)
    s.add_argument("--ridge", type=float, default=1e-14)
    s.add_argument("--nested", type=int, default=3, help="number of nested subsets (every 2^k-th center)")
    s.add_argument("--target", choices=["exp", "atom"], default="exp")
    s.add_argument("--out", required=True)

    s = common(sub.add_parser("frft", help="fractional Fourier transform of a signal profile"))
    s.add_argument("--signal", required=True)
    s.add_argument("--theta", required=True)
    s.add_argument("--A", type=float, default=None)
    s.add_argument("--Mout", type=int, default=1025)
    s.add_argument("--out", required=True)

    s = common(sub.add_parser("recover", help="recover a signal from magnitude measurements"))
    s.add_argument("--measurements", required=True)
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--report", required=True)
    s.add_argument("--truth", default=None)
    s.add_argument("--allow-warnings", action="store_true")

    s = common(sub.add_parser("verify", help="compare two signals modulo global phase"))
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--omega", required=True)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--out", default=None)
    return p


COMMANDS = {
    "synth": cmd_synth,
    "gabor": cmd_gabor,
    "sample": cmd_sample,
    "density": cmd_density,
    "zalik": cmd_zalik,
    "frft": cmd_frft,
    "recover": cmd_recover,
    "verify": cmd_verify,
}


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit": code}) + "\n")
    return code


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(EXIT_INPUT, "usage", str(exc))
    except (IllPosedError, DegenerateFieldError) as exc:
        return _fail(EXIT_NUMERIC, type(exc).__name__, str(exc))
    except WarningsNotAllowed as exc:
        return _fail(EXIT_NUMERIC, "warnings", f"{exc} (pass --allow-warnings to proceed)")
    except GaborPhaseError as exc:
        return _fail(EXIT_INPUT, type(exc).__name__, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, "io", str(exc))
    except (ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_INPUT, type(exc).__name__, str(exc))
    return EXIT_OK


def main() -> None:
    sys.exit(run())


def pipeline_roundtrip(
    seed: int = 42,
    B: float = 0.5,
    M: int = 16,
    lattice: str = "-10:0.2:101",
    omega: str = "-1:0.125:17",
    *,
    zero: bool = False,
    allow_warnings: bool = False,
    workdir=None,
) -> str:
    """synth -> sample -> recover -> verify through :func:`run`; returns the verdict.

    Raises ``RuntimeError`` when a step exits non-zero.
    """
    with tempfile.TemporaryDirectory() as tmp:
        d = Path(workdir or tmp)
        d.mkdir(parents=True, exist_ok=True)
        cfg = {"B": B, "M": M, "ridge1": [1e-6, 1e-8, 1e-10], "ridge2": 1e-28, "theta": None,
               "omega_decl": omega, "x_decl": lattice}
        (d / "cfg.json").write_text(json.dumps(cfg))
        synth = ["synth", "--B", str(B), "--M", str(M), "--seed", str(seed), "--out", str(d / "f.json")]
        steps = [
            synth + (["--zero"] if zero else []),
            ["sample", "--signal", str(d / "f.json"), f"--x={lattice}", f"--omega={omega}", "--out", str(d / "m.csv")],
            ["recover", "--measurements", str(d / "m.csv"), "--config", str(d / "cfg.json"), "--out",
             str(d / "fhat.json"), "--report", str(d / "report.json"), "--truth", str(d / "f.json")]
            + (["--allow-warnings"] if allow_warnings else []),
            ["verify", "--f", str(d / "f.json"), "--g", str(d / "fhat.json"), f"--x={lattice}", f"--omega={omega}",
             "--out", str(d / "verify.json")],
        ]
        for argv in steps:
            code = run(argv)
            if code != EXIT_OK:
                raise RuntimeError(f"step {argv[0]} exited with {code}")
        return json.loads((d / "verify.json").read_text())["verdict"]
