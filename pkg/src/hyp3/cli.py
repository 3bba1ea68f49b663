"""Command-line harness: condition reports, mode experiments, identity
gates, and the battery acceptance gate.

Exit codes: 0 pass, 1 verdict mismatch or identity failure, 2 usage or
config error, 3 numerical failure (hyperbolicity, quadrature, root jets).
Machine-readable documents are JSON with sorted keys and contain no
wall-clock fields, so identical (config, seed) reproduces them
byte-identically; timing goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .battery import battery_member, battery_names
from .conditions import (
    condition_report,
    constant_coeff_check,
    default_ladder,
    pointwise_levi,
    second_order_report,
    PRIMARY_KEYS,
    _integrand_values,
)
from .errors import (
    ExprError,
    HyperbolicityViolation,
    NearMultipleRoot,
    OperatorSpecError,
    QuadratureError,
)
from .identities import run_algebraic_suite
from .modes import calibrate_eta, energy_trace, growth_experiment, identity_residuals, solve_mode
from .opfile import load_operator
from .operators import Operator2, Operator3, hyperbolicity_scan

TRAJECTORY_TOL = 1e-6

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _emit(doc: dict, args) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=True)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{doc['schema'].split('/')[0].split('.')[-1]}.json").write_text(text + "\n")
    else:
        print(text)


def _json_float(x) -> float | str:
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def _fit_doc(fit) -> dict:
    return {"slope": _json_float(fit.slope),
            "ratios": [_json_float(r) for r in fit.ratios],
            "verdict": fit.verdict}


def _ladder_from_args(args) -> list[float]:
    return default_ladder(args.xi_min, args.xi_max, args.xi_steps)


def _direction_from_args(args, dim: int) -> np.ndarray:
    if args.direction is None:
        return np.eye(dim)[0]
    try:
        vec = np.array([float(s) for s in args.direction.split(",")], dtype=float)
    except ValueError:
        raise OperatorSpecError(f"bad --direction {args.direction!r}")
    if vec.shape != (dim,) or not np.linalg.norm(vec) > 0:
        raise OperatorSpecError(f"--direction needs {dim} components and nonzero length")
    return vec / np.linalg.norm(vec)


def _resolve_operators(args) -> list[tuple[Operator3 | Operator2, object]]:
    """(operator, battery member or None) pairs for the requested target."""
    if bool(args.config) == bool(args.battery):
        raise OperatorSpecError("exactly one of --config and --battery is required")
    if args.config:
        return [(load_operator(args.config), None)]
    if args.battery == "all":
        return [(m.op, m) for m in (battery_member(n) for n in battery_names())]
    m = battery_member(args.battery)
    return [(m.op, m)]


# --------------------------------------------------------------------------
# check


def _conditions_doc_one(op, member, args) -> tuple[dict, list[str]]:
    mismatches: list[str] = []
    if isinstance(op, Operator2):
        rep = second_order_report(op, _ladder_from_args(args), _direction_from_args(args, op.dim))
        doc = {
            "order": 2,
            "rows": [{k: _json_float(v) for k, v in r.items()} for r in rep["rows"]],
            "fits": {k: _fit_doc(f) for k, f in rep["fits"].items()},
            "verdicts": rep["verdicts"],
        }
        if member is not None:
            for key, want in member.expected_conditions.items():
                got = rep["verdicts"].get(key)
                if got != want:
                    mismatches.append(f"{op.name}: {key}: expected {want}, got {got}")
        doc["mismatches"] = mismatches
        return doc, mismatches

    ladder = _ladder_from_args(args)
    direction = _direction_from_args(args, op.dim)
    hyperbolicity_scan(op, ladder=ladder, dirs=[direction])
    rep = condition_report(op, ladder, direction)
    case_ladder = ladder[::2] if len(ladder) > 5 else ladder
    case = pointwise_levi(op, ladder=case_ladder, direction=direction)
    doc = {
        "order": 3,
        "rows": [{
            "xi": c.xi_mag,
            "direction": list(c.direction),
            "values": {k: _json_float(v) for k, v in c.values.items()},
            "alternates": {k: _json_float(v) for k, v in c.alternates.items()},
            "panels": c.panels,
        } for c in rep.ladder],
        "fits": {k: _fit_doc(f) for k, f in rep.fits.items()},
        "verdicts": rep.verdicts,
        "bands": {k: {kk: (_json_float(vv) if not isinstance(vv, list) else
                           [_json_float(x) for x in vv])
                      for kk, vv in b.items()} for k, b in rep.bands.items()},
        "case_report": {
            "case": case.case,
            "ambiguous": case.ambiguous,
            "disc_rel_max": _json_float(case.disc_rel_max),
            "delta1_rel_max": _json_float(case.delta1_rel_max),
            "checks": {k: {kk: (_json_float(vv) if not isinstance(vv, list) else
                                [_json_float(x) for x in vv])
                           for kk, vv in c.items()} for k, c in case.checks.items()},
        },
    }
    if op.is_constant():
        cc = constant_coeff_check(op, ladder, direction)
        doc["constant_coeff"] = {
            "rows": [{k: _json_float(v) for k, v in r.items()} for r in cc["rows"]],
            "decomposition_verdict": cc["decomposition_verdict"],
            "im_verdict": cc["im_verdict"],
            "im_growth_power": _json_float(cc["im_growth_power"]),
        }
    if member is not None:
        for key, want in member.expected_conditions.items():
            got = rep.verdicts.get(key)
            if got != want:
                mismatches.append(f"{op.name}: {key}: expected {want}, got {got}")
        if member.expected_case is not None and case.case != member.expected_case:
            mismatches.append(f"{op.name}: case: expected {member.expected_case}, got {case.case}")
        if member.expected_decomposition is not None:
            got = doc["constant_coeff"]["decomposition_verdict"]
            if got != member.expected_decomposition:
                mismatches.append(f"{op.name}: decomposition: expected "
                                  f"{member.expected_decomposition}, got {got}")
        band_fail = [k for k, b in rep.bands.items() if not b["stable"]]
        if band_fail:
            mismatches.append(f"{op.name}: unstable equivalence bands: {', '.join(band_fail)}")
    doc["mismatches"] = mismatches
    return doc, mismatches


def _write_condition_tables(op, args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(op, Operator2):
        return
    ladder = _ladder_from_args(args)
    direction = _direction_from_args(args, op.dim)
    nt = max(64, args.grid // 8)
    ts = np.linspace(0.0, op.horizon, nt)
    lines = ["xi\tcondition\tt\tvalue"]
    for mag in ladder:
        xi = mag * direction
        for t in ts:
            vals = _integrand_values(op, float(t), xi, with_alternates=False)
            for key, v in zip(PRIMARY_KEYS, vals):
                lines.append(f"{mag!r}\t{key}\t{float(t)!r}\t{float(v)!r}")
    (out / f"integrands_{op.name}.tsv").write_text("\n".join(lines) + "\n")


def cmd_check(args) -> int:
    t0 = time.time()
    targets = _resolve_operators(args)
    docs = {}
    mismatches: list[str] = []
    for op, member in targets:
        doc, mm = _conditions_doc_one(op, member, args)
        docs[op.name] = doc
        mismatches += mm
        if args.format in ("tables", "both") and args.out:
            _write_condition_tables(op, args)
    doc = {
        "schema": "hyp3.conditions/1",
        "version": __version__,
        "config": _config_doc(args),
        "operators": docs,
        "pass": not mismatches,
    }
    _emit(doc, args)
    print(f"check: {len(targets)} operator(s), {time.time() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK if not mismatches else EXIT_MISMATCH


# --------------------------------------------------------------------------
# modes


def cmd_modes(args) -> int:
    t0 = time.time()
    targets = _resolve_operators(args)
    docs = {}
    mismatches: list[str] = []
    for op, member in targets:
        if isinstance(op, Operator2):
            continue
        ladder = _ladder_from_args(args)
        direction = _direction_from_args(args, op.dim)
        fit = growth_experiment(op, ladder, direction, grid_points=args.grid)
        doc = {
            "rows": [{k: _json_float(v) for k, v in r.items()} for r in fit.rows],
            "model": fit.model,
            "kappa": _json_float(fit.kappa),
            "poly_degree": _json_float(fit.poly_degree),
            "poly_residual": _json_float(fit.poly_residual),
            "exp_residual": _json_float(fit.exp_residual),
        }
        if member is not None and member.expected_growth is not None:
            if fit.model != member.expected_growth:
                mismatches.append(f"{op.name}: growth model: expected "
                                  f"{member.expected_growth}, got {fit.model}")
            elif member.expected_kappa is not None and \
                    abs(fit.kappa - member.expected_kappa) > 0.05:
                mismatches.append(f"{op.name}: kappa: expected "
                                  f"{member.expected_kappa:.4f}+-0.05, got {fit.kappa:.4f}")
        doc["mismatches"] = [m for m in mismatches if m.startswith(op.name)]
        docs[op.name] = doc
        if args.format in ("tables", "both") and args.out:
            _write_mode_tables(op, args, fit)
    doc = {
        "schema": "hyp3.modes/1",
        "version": __version__,
        "config": _config_doc(args),
        "operators": docs,
        "pass": not mismatches,
    }
    _emit(doc, args)
    print(f"modes: {len(docs)} operator(s), {time.time() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK if not mismatches else EXIT_MISMATCH


def _write_mode_tables(op, args, fit) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["xi\tamplification\tlog_amp\thalf_log_amp\tblowup\treach_time"]
    for r in fit.rows:
        lines.append(f"{r['xi']!r}\t{r['amplification']!r}\t{r['log_amp']!r}"
                     f"\t{r['half_log_amp']!r}\t{int(r['blowup'])}\t{r['reach_time']!r}")
    (out / f"growth_{op.name}.tsv").write_text("\n".join(lines) + "\n")

    xi = _ladder_from_args(args)[-1] * _direction_from_args(args, op.dim)
    sol = solve_mode(op, xi, grid_points=args.grid)
    if args.eta is not None:
        tr = energy_trace(op, sol, args.eta)
    else:
        _, tr = calibrate_eta(op, sol)
    lines = ["t\tre_v\tim_v\tE\tK\tH\tk"]
    for i, t in enumerate(sol.t):
        lines.append(f"{float(t)!r}\t{sol.v[i].real!r}\t{sol.v[i].imag!r}"
                     f"\t{tr.E[i]!r}\t{tr.K[i]!r}\t{tr.H[i]!r}\t{tr.k[i]!r}")
    (out / f"mode_{op.name}.tsv").write_text("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# identities


def cmd_identities(args) -> int:
    t0 = time.time()
    results = run_algebraic_suite(args.samples, args.seed, corrupt=args.corrupt) \
        if args.samples > 0 else []
    doc = {
        "schema": "hyp3.identities/1",
        "version": __version__,
        "config": {"samples": args.samples, "seed": args.seed},
        "algebraic": [{
            "name": r.name,
            "max_residual": _json_float(r.max_residual),
            "tolerance": r.tolerance,
            "pass": r.passed,
        } for r in results],
        "trajectory": {},
    }
    failures = [r.name for r in results if not r.passed]
    if args.samples > 0:
        for name in ("strict_sin", "oleinik_ok"):
            member = battery_member(name)
            op = member.op
            xi = np.array([64.0] + [0.0] * (op.dim - 1))
            sol = solve_mode(op, xi, grid_points=4096)
            res = identity_residuals(op, sol, eps=1.0 / 64.0)
            doc["trajectory"][name] = {
                k: {"max_residual": _json_float(v), "tolerance": TRAJECTORY_TOL,
                    "pass": bool(v <= TRAJECTORY_TOL)}
                for k, v in res.items()
            }
            failures += [f"{name}/{k}" for k, v in res.items() if not v <= TRAJECTORY_TOL]
    doc["pass"] = not failures
    doc["failures"] = failures
    _emit(doc, args)
    print(f"identities: {time.time() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK if not failures else EXIT_MISMATCH


# --------------------------------------------------------------------------
# battery gate


def cmd_battery(args) -> int:
    args.battery = "all"
    args.config = None
    rc = cmd_check(args)
    if rc == EXIT_OK and args.full:
        modes_args = argparse.Namespace(**vars(args))
        modes_args.battery = None
        mism = []
        for name in battery_names(order=3):
            member = battery_member(name)
            if member.expected_growth is None:
                continue
            modes_args.battery = name
            rc2 = cmd_modes(modes_args)
            if rc2 != EXIT_OK:
                mism.append(name)
        if mism:
            return EXIT_MISMATCH
    return rc


# --------------------------------------------------------------------------
# entry point


def _config_doc(args) -> dict:
    return {
        "config": args.config,
        "battery": args.battery,
        "xi_min": args.xi_min,
        "xi_max": args.xi_max,
        "xi_steps": args.xi_steps,
        "direction": args.direction,
        "grid": args.grid,
        "eta": args.eta,
        "seed": args.seed,
        "format": args.format,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyp3",
        description="Condition checks, operator identities and Fourier-mode "
                    "experiments for third-order weakly hyperbolic operators.")
    parser.add_argument("--version", action="version", version=f"hyp3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, battery_default=None):
        p.add_argument("--config", help="operator table file")
        p.add_argument("--battery", default=battery_default,
                       help="built-in operator name, or 'all'")
        p.add_argument("--xi-min", type=float, default=2.0 ** 6)
        p.add_argument("--xi-max", type=float, default=2.0 ** 14)
        p.add_argument("--xi-steps", type=int, default=9)
        p.add_argument("--direction", help="comma-separated frequency direction")
        p.add_argument("--grid", type=int, default=1024, help="time-grid points")
        p.add_argument("--eta", type=float, help="energy weight exponent override")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("doc", "tables", "both"), default="doc")

    p_check = sub.add_parser("check", aliases=["conditions"],
                             help="evaluate the condition ladder and verdicts")
    common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_modes = sub.add_parser("modes", help="growth-exponent experiments")
    common(p_modes)
    p_modes.set_defaults(func=cmd_modes)

    p_id = sub.add_parser("identities", help="randomized identity suites")
    common(p_id)
    p_id.add_argument("--samples", type=int, default=10000)
    p_id.add_argument("--corrupt", help=argparse.SUPPRESS)
    p_id.set_defaults(func=cmd_identities)

    p_bat = sub.add_parser("battery", help="battery acceptance gate")
    common(p_bat, battery_default="all")
    p_bat.add_argument("--full", action="store_true",
                       help="also gate the growth models (slow)")
    p_bat.set_defaults(func=cmd_battery)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "corrupt"):
        args.corrupt = None
    if not hasattr(args, "samples"):
        args.samples = 0
    if not hasattr(args, "full"):
        args.full = False
    try:
        return args.func(args)
    except (OperatorSpecError, ExprError, FileNotFoundError) as exc:
        print(f"hyp3: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HyperbolicityViolation, QuadratureError, NearMultipleRoot) as exc:
        print(f"hyp3: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
