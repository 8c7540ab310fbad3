#!/usr/bin/env python3
"""
Command-line front end for the Wilton ripple toolkit.

Subcommands: constants, expand, solve, sweep, stokes, validate, fig1.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical failure.
Payloads go to stdout or --out; logs go to stderr.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
import tempfile
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import asymptotics
import plseries
import solver
import svg_figures
import validation
from settings import VERSION, Settings, configure_logging, load_settings
from trigpoly import ScalarMode
from wilton_errors import OutputError, ValidationFailedError, WiltonError

logger = logging.getLogger(__name__)


# ============================================================================
# MANIFESTS AND OUTPUT
# ============================================================================

@dataclass(frozen=True)
class RunManifest:
    """Provenance attached to every output file"""
    command: str
    parameters: Dict
    version: str
    scalar_mode: str
    timestamp: str

    @classmethod
    def create(cls, command: str, parameters: Dict, scalar_mode: str) -> "RunManifest":
        # SOURCE_DATE_EPOCH pins the timestamp for reproducible files
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        moment = time.gmtime(int(epoch)) if epoch else time.gmtime()
        return cls(command, parameters, VERSION, scalar_mode, time.strftime("%Y-%m-%dT%H:%M:%SZ", moment))

    def to_dict(self) -> dict:
        return asdict(self)


def fmt(value) -> str:
    """17 significant digits for floats, p/q for exact rationals"""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (int, str)) or value is None:
        return str(value)
    return format(float(value), ".17g")


_FLOAT_TAG = "\x00float:"
_FLOAT_TOKEN = re.compile(r'"\\u0000float:([^"]*)"')


def _canonical(obj):
    """Tag finite floats so render_json can print them with fmt()"""
    if isinstance(obj, dict):
        return {key: _canonical(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(value) for value in obj]
    if isinstance(obj, float):
        return _FLOAT_TAG + fmt(obj) if math.isfinite(obj) else fmt(obj)
    return obj


def render_json(document: dict) -> str:
    """Sorted-key JSON; floats as bare numbers with 17 significant digits"""
    text = json.dumps(_canonical(document), indent=2, sort_keys=True, ensure_ascii=False)
    return _FLOAT_TOKEN.sub(r"\1", text) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buffer.getvalue()


def write_atomic(path: Path, text: str):
    """Write through a temporary sibling file and rename it into place"""
    path = Path(path)
    tmp_name = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile("w", encoding="utf-8", dir=path.parent,
                                         prefix=f".{path.name}.", delete=False) as tmp:
            tmp_name = tmp.name
            tmp.write(text)
        os.replace(tmp_name, path)
    except OSError as e:
        if tmp_name and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OutputError(f"Cannot write {path}: {e.strerror or e}", path=str(path),
                          suggestions=["check that the output directory is writable"])
    logger.info(f"wrote {path}")


@dataclass
class CommandOutput:
    payload: dict
    csv_header: List[str]
    csv_rows: List[List]
    text: str
    default_format: str = "text"
    failed: bool = False


def emit(output: CommandOutput, args, manifest: RunManifest):
    fmt_choice = args.format or output.default_format
    if fmt_choice == "json":
        body = render_json({"manifest": manifest.to_dict(), "result": output.payload})
    elif fmt_choice == "csv":
        body = render_csv(output.csv_header, output.csv_rows)
    else:
        body = output.text.rstrip("\n") + "\n"

    if args.out:
        path = Path(args.out)
        write_atomic(path, body)
        if fmt_choice == "csv":
            write_atomic(path.with_name(path.name + ".manifest.json"), render_json(manifest.to_dict()))
    else:
        sys.stdout.write(body)


# ============================================================================
# COMMANDS
# ============================================================================

def _scalar(value):
    return str(value) if isinstance(value, Fraction) else float(value)


def cmd_constants(args, settings: Settings) -> CommandOutput:
    K = args.K
    cfg = asymptotics.config(K)
    branches = []
    rows = []
    for b in asymptotics.branch_constants(K):
        det = asymptotics.jacobian_certificate(K, b)
        exact_det = asymptotics.jacobian_certificate(K, b, form="exact")
        branches.append({
            "label": b.label,
            "b_tilde0": float(b.b_tilde0),
            "c_tilde0": float(b.c_tilde0),
            "jacobian_det": float(det),
            "jacobian_det_exact_form": float(exact_det),
            "exact": {"b_tilde0": _scalar(b.b_tilde0), "c_tilde0": _scalar(b.c_tilde0),
                      "jacobian_det": _scalar(det)} if b.exact else None,
            "b_scaling": b.b_scaling,
            "c_scaling": b.c_scaling,
        })
        rows.append([b.label, b.b_tilde0, b.c_tilde0, det])

    payload = {"K": K, "beta": _scalar(cfg.beta), "c0": _scalar(cfg.c0), "branches": branches}
    if K == 3:
        payload["reduced_cubic"] = [str(x) for x in asymptotics.k3_reduced_cubic()]
        payload["printed_cubic"] = [str(x) for x in asymptotics.PRINTED_K3_CUBIC]

    lines = [f"K = {K}   beta = {cfg.beta}   c0 = {cfg.c0}", ""]
    lines.append(f"{'branch':<8} {'b_tilde0':>24} {'c_tilde0':>24} {'jacobian_det':>24}")
    for row in rows:
        lines.append(f"{row[0]:<8} " + " ".join(f"{fmt(v):>24}" for v in row[1:]))
    return CommandOutput(payload, ["branch", "b_tilde0", "c_tilde0", "jacobian_det"], rows, "\n".join(lines))


def cmd_expand(args, settings: Settings) -> CommandOutput:
    mode = ScalarMode.RATIONAL if args.exact else ScalarMode.FLOAT
    series = plseries.expand(args.K, args.branch, args.order, mode, settings)
    kernel = series.kernel_amplitudes()
    rows = [[n, cn, un.coefficient(1), kernel[n - 1], un.degree]
            for n, (un, cn) in enumerate(zip(series.u, series.c), start=1)]
    lines = [f"K = {series.K}  branch = {series.label}  order = {series.order}  ({mode.value})", ""]
    for n, cn, f1, fK, degree in rows:
        lines.append(f"n={n:<3} c_n={fmt(cn):>26}  F_K[u_n]={fmt(fK):>26}  degree={degree}")
    return CommandOutput(series.to_dict(), ["n", "c_n", "F1_u_n", "FK_u_n", "degree"], rows, "\n".join(lines))


def _solution_output(result: solver.SolveResult) -> CommandOutput:
    rows = [[k, v] for k, v in enumerate(result.profile.coeffs)]
    lines = [
        f"K = {result.K}  branch = {result.label}  a = {fmt(result.a)}",
        f"c            = {fmt(result.velocity)}",
        f"measured_b   = {fmt(result.measured_b)}",
        f"residual_sup = {fmt(result.residual_sup)}",
        f"iterations   = {result.newton_iters}   N = {result.N}",
    ]
    return CommandOutput(result.to_dict(), ["k", "coefficient"], rows, "\n".join(lines))


def cmd_solve(args, settings: Settings) -> CommandOutput:
    result = solver.solve_wilton(args.K, args.branch, args.a, N=args.N,
                                 seed_order=args.seed_order, settings=settings)
    return _solution_output(result)


def cmd_stokes(args, settings: Settings) -> CommandOutput:
    result = solver.stokes_solve(args.beta, args.a, N=args.N, seed_order=args.seed_order, settings=settings)
    return _solution_output(result)


def cmd_sweep(args, settings: Settings) -> CommandOutput:
    path = solver.continue_branch(args.K, args.branch, args.a_max, args.steps, N=args.N,
                                  seed_order=args.seed_order, settings=settings)
    header = ["a", "c", "measured_b", "residual_sup", "iters"]
    rows = [[r.a, r.velocity, r.measured_b, r.residual_sup, r.newton_iters] for r in path.results]
    payload = {"K": path.K, "branch": path.label,
               "rows": [dict(zip(header, row)) for row in rows],
               "steps": [asdict(s) for s in path.steps]}
    return CommandOutput(payload, header, rows, render_csv(header, rows), default_format="csv")


def cmd_validate(args, settings: Settings) -> CommandOutput:
    report = validation.run_validation(args.K_range, args.a_grid, args.orders, settings)
    rows = [[r.check, r.K, r.branch, r.measured, r.expected, "PASS" if r.passed else "FAIL"]
            for r in report.rows]
    return CommandOutput(report.to_dict(), ["check", "K", "branch", "measured", "expected", "status"],
                         rows, report.render(), failed=not report.passed)


def cmd_fig1(args, settings: Settings) -> CommandOutput:
    figure = svg_figures.build_fig1(args.a, args.branch3, args.seed_order, settings)
    out_dir = Path(args.out_dir)
    for name, svg in figure.svgs().items():
        write_atomic(out_dir / name, svg)
    header = ["panel", "x", "numeric", "asymptotic"]
    csv_path = out_dir / "fig1.csv"
    write_atomic(csv_path, render_csv(header, figure.csv_rows()))

    deviations = figure.deviations()
    lines = [f"fig1 at a = {fmt(figure.a)} -> {out_dir}"]
    lines += [f"  panel {k}: max |u/a - leading order| = {fmt(v)}" for k, v in deviations.items()]
    payload = {"a": figure.a, "deviations": deviations,
               "files": sorted(list(figure.svgs()) + ["fig1.csv"])}
    return CommandOutput(payload, ["panel", "deviation"], [[k, v] for k, v in deviations.items()],
                         "\n".join(lines))


COMMANDS = {
    "constants": cmd_constants,
    "expand": cmd_expand,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "stokes": cmd_stokes,
    "validate": cmd_validate,
    "fig1": cmd_fig1,
}


# ============================================================================
# ARGUMENT PARSING
# ============================================================================

def _number(text: str):
    """Accept p/q rationals as well as decimals"""
    try:
        return Fraction(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _k_range(text: str) -> List[int]:
    values = []
    try:
        for part in filter(None, text.split(",")):
            if "-" in part:
                lo, hi = part.split("-", 1)
                values.extend(range(int(lo), int(hi) + 1))
            else:
                values.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad K range: {text!r} (use e.g. 2-6 or 2,3,7)")
    return values


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list: {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    fmt_group = common.add_mutually_exclusive_group()
    fmt_group.add_argument("--json", dest="format", action="store_const", const="json", help="JSON payload")
    fmt_group.add_argument("--csv", dest="format", action="store_const", const="csv", help="CSV payload")
    common.add_argument("--out", help="write the payload to this file instead of stdout")
    common.add_argument("--seed-order", type=int, default=2, help="expansion order used to seed Newton")
    common.add_argument("--exact", action="store_true", help="exact rational arithmetic (K >= 4, expand)")
    common.add_argument("--tol", type=float, help="Newton tolerance (default 1e-12)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings only")

    parser = argparse.ArgumentParser(prog="wilton_cli",
                                     description="Wilton ripples and Stokes waves of the Kawahara equation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="branch constants and Jacobians")
    p.add_argument("--K", type=int, required=True)

    p = sub.add_parser("expand", parents=[common], help="order-by-order amplitude expansion")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--branch", required=True)
    p.add_argument("--order", type=int, default=2)

    p = sub.add_parser("solve", parents=[common], help="Galerkin-Newton solve at one amplitude")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--branch", required=True)
    p.add_argument("--a", type=float, default=0.01)
    p.add_argument("--N", type=int)

    p = sub.add_parser("sweep", parents=[common], help="continuation in the amplitude")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--branch", required=True)
    p.add_argument("--a-max", dest="a_max", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--N", type=int)

    p = sub.add_parser("stokes", parents=[common], help="Stokes wave at a non-resonant beta")
    p.add_argument("--beta", type=_number, required=True)
    p.add_argument("--a", type=float, default=0.01)
    p.add_argument("--N", type=int)

    p = sub.add_parser("validate", parents=[common], help="run the acceptance suite")
    p.add_argument("--K-range", dest="K_range", type=_k_range, default=list(validation.DEFAULT_K_VALUES))
    p.add_argument("--a-grid", dest="a_grid", type=_float_list, default=list(validation.DEFAULT_A_GRID))
    p.add_argument("--orders", type=_int_list, default=list(validation.DEFAULT_ORDERS))

    p = sub.add_parser("fig1", parents=[common], help="three comparison panels as SVG + CSV")
    p.add_argument("--a", type=float, default=0.01)
    p.add_argument("--out-dir", dest="out_dir", default="fig1_output")
    p.add_argument("--branch3", default="3", help="K=3 branch shown in panel c")
    return parser


def _parameters(args) -> Dict:
    skip = {"format", "out", "verbose", "quiet", "command"}
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(verbose=args.verbose, quiet=args.quiet)

    try:
        settings = load_settings(newton_tol=args.tol)
        output = COMMANDS[args.command](args, settings)
        mode = "rational" if args.exact else "float"
        manifest = RunManifest.create(args.command, _parameters(args), mode)
        emit(output, args, manifest)
        if output.failed:
            raise ValidationFailedError("At least one validation row failed")
        return 0
    except WiltonError as e:
        logger.error(e.message)
        for suggestion in e.suggestions:
            logger.error(f"  - {suggestion}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
