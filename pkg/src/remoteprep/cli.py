"""Command-line harness: single runs, grid sweeps and pulse compile reports.

Exit codes: 0 success, 1 verification or protocol failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import bloch, locc, nmr
from .angles import format_angle, parse_angle
from .bloch import QubitParams
from .qcore import SEQUENCE_ATOL, fidelity, partial_trace

RUN_FIDELITY_FLOOR = 1 - 1e-9
CONFIG_KEYS = {"seed": int, "trials": int, "j_coupling": float, "tolerance": float, "mode": str, "jobs": int}
DEFAULTS = {"seed": 0, "trials": 1, "j_coupling": nmr.J_CH_HZ, "tolerance": SEQUENCE_ATOL, "mode": "measured", "jobs": 1}


def fmt(x: float) -> str:
    """Fixed 12-decimal rendering; tiny values and -0 collapse to 0."""
    return f"{round(float(x), 12) + 0.0:.12f}"


def angle_arg(text: str) -> float:
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def read_config(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = CONFIG_KEYS[key](value)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="remoteprep", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file; command-line flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run RSP sessions and print transcripts")
    run.add_argument("--theta", type=angle_arg, required=True)
    run.add_argument("--phi0", type=angle_arg, default=0.0)
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--mode", choices=("measured", "coherent"))

    for name, text in (("rsp-sweep", "readout surfaces over the 13x17 grid"), ("rsm-sweep", "RSM expectations over the grid")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
        p.add_argument("--jobs", type=int)

    comp = sub.add_parser("compile", help="compile and verify a pulse sequence")
    comp.add_argument("which", choices=("epr", "rplus", "s"))
    comp.add_argument("--theta", type=angle_arg, default=math.pi / 2)
    comp.add_argument("--phi0", type=angle_arg, default=0.0)
    comp.add_argument("--j-coupling", dest="j_coupling", type=float)
    comp.add_argument("--tolerance", type=float)
    comp.add_argument("--verbatim", action="store_true", help="s only: use the pi/2 - phi0 middle pulse")
    return parser


def resolve(args, parser) -> dict:
    settings = dict(DEFAULTS)
    if args.config:
        try:
            settings.update(read_config(args.config))
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def grid():
    return [(t, p) for t in nmr.GRID_THETAS for p in nmr.GRID_PHIS]


def _rsp_row(point):
    theta, phi = point
    res = locc.run_rsp_coherent(QubitParams(theta, phi))
    return [theta, phi, *res.readout, res.fidelity]


def _rsm_rows(point):
    theta, phi = point
    rows = []
    for name, b in locc.AXES.items():
        r = locc.run_rsm(QubitParams(theta, phi), b)
        rows.append([theta, phi, name, r.rho_expect, r.perp_expect_raw, r.perp_expect_reversed])
    return rows


def _map(fn, points, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, points, chunksize=16))
    return [fn(pt) for pt in points]


def rsp_sweep_rows(jobs: int = 1) -> list[list]:
    return _map(_rsp_row, grid(), jobs)


def rsm_sweep_rows(jobs: int = 1) -> list[list]:
    return [row for chunk in _map(_rsm_rows, grid(), jobs) for row in chunk]


def to_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def write_out(text: str, out: str) -> int:
    if out == "-":
        sys.stdout.write(text)
        return 0
    try:
        with open(out, "w", newline="\n", encoding="ascii") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_run(args, settings) -> int:
    p = QubitParams(args.theta, args.phi0)
    out = sys.stdout
    if settings["mode"] == "coherent":
        res = locc.run_rsp_coherent(p)
        out.write(res.transcript.text())
        out.write(f"readout Ix={fmt(res.readout[0])} Iy={fmt(res.readout[1])} Iz={fmt(res.readout[2])}\n")
        fids = [res.fidelity]
        freqs = None
    else:
        run = locc.run_rsp_measured(p, settings["seed"], settings["trials"])
        for transcript in run.transcripts:
            out.write(transcript.text())
        fids = run.fidelities
        freqs = run.frequencies
    summary = f"summary trials={len(fids)} min_fidelity={fmt(min(fids))} mean_fidelity={fmt(float(np.mean(fids)))}"
    if freqs is not None:
        summary += f" freq0={fmt(freqs[0])} freq1={fmt(freqs[1])}"
    out.write(summary + "\n")
    if min(fids) < RUN_FIDELITY_FLOOR:
        print("error: Bob's final fidelity below threshold", file=sys.stderr)
        return 1
    return 0


def cmd_rsp_sweep(args, settings) -> int:
    rows = rsp_sweep_rows(settings["jobs"])
    return write_out(to_csv(["theta", "phi", "Ix", "Iy", "Iz", "fidelity"], rows), args.out)


def cmd_rsm_sweep(args, settings) -> int:
    rows = rsm_sweep_rows(settings["jobs"])
    header = ["theta", "phi", "obs", "rho_expect", "rho_perp_raw", "rho_perp_reversed"]
    return write_out(to_csv(header, rows), args.out)


def cmd_compile(args, settings) -> int:
    constants = nmr.PhysicalConstants(settings["j_coupling"])
    tol = settings["tolerance"]
    p = QubitParams(args.theta, args.phi0)
    extra = [f"J coupling: {constants.j_coupling} Hz"]
    if args.which == "epr":
        seq = nmr.epr_sequence()
        report = nmr.verify_epr(seq, tolerance=tol, constants=constants)
        state = nmr.compose_sequence(seq) @ nmr.eps_init()[:, 0]
        extra.append(f"singlet fidelity: {fidelity(bloch.singlet(), state):.15f}")
        title = "EPR preparation"
    elif args.which == "rplus":
        seq = nmr.rotation_sequence(p)
        report = nmr.verify_rotation(p, seq, tolerance=tol, constants=constants)
        angles = bloch.rotation_decomposition(p)
        extra.append(f"theta1={format_angle(angles.theta1)} theta2={format_angle(angles.theta2)}")
        title = f"R+ for theta={format_angle(p.theta)} phi0={format_angle(p.phi)}"
    else:
        seq = nmr.conditional_sequence(p.phi, verbatim=args.verbatim)
        report = nmr.verify_conditional(p.phi, seq, tolerance=tol, constants=constants)
        composed = nmr.compose_sequence(seq)
        worst = min(
            fidelity(bloch.make_qubit(QubitParams(t, p.phi)), partial_trace(composed @ state, "B"))
            for t, state in zip(nmr.GRID_THETAS, nmr.rsp_inputs(p.phi))
        )
        extra.append(f"min Bob fidelity over theta grid: {worst:.15f}")
        title = f"conditional S for phi0={format_angle(p.phi)}" + (" (verbatim)" if args.verbatim else "")
    sys.stdout.write(nmr.format_report(title, seq, report, extra))
    return 0 if report.passed else 1


COMMANDS = {"run": cmd_run, "rsp-sweep": cmd_rsp_sweep, "rsm-sweep": cmd_rsm_sweep, "compile": cmd_compile}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = resolve(args, parser)
    if args.command in ("run", "compile") and not (-1e-12 <= args.theta <= math.pi + 1e-12):
        parser.error(f"theta must lie in [0, pi], got {args.theta}")
    if settings["trials"] < 1:
        parser.error("trials must be at least 1")
    if settings["jobs"] < 1:
        parser.error("jobs must be at least 1")
    if not settings["j_coupling"] > 0:
        parser.error("j_coupling must be positive")
    return COMMANDS[args.command](args, settings)


if __name__ == "__main__":
    sys.exit(main())
