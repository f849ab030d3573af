"""Command-line front end: ``wpgap <group> <command> [options]``.

Reports go to standard output (or ``-o``); failures print one JSON object
``{"error", "message", "exit_code"}`` on standard error and exit with the
code of the raised :class:`~wpgap.errors.WPGapError` subclass.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import expectation, gap, testfunctions, trace, volumes
from .constants import load_constants
from .errors import InputFileError, PreconditionError, UsageError, WPGapError
from .report import FORMATS, emit_report, emit_rows

# ---------------------------------------------------------------------------
# Input helpers


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputFileError(f"file {path} does not exist")
    return p.read_text()


def _load_table(path: str) -> volumes.VolumeTable:
    return volumes.parse_volume_table(_read_text(path), provenance=f"ingested:{Path(path).name}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise PreconditionError(f"cannot read number list {text!r}") from None


def _grid(text: str) -> list[float]:
    """``start:stop:num`` for an inclusive linear grid, or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise PreconditionError("grid must be start:stop:num")
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        if num < 1:
            raise PreconditionError("grid needs at least one point")
        return [float(x) for x in np.linspace(start, stop, num)]
    return _float_list(text)


def _genus_value(text: str) -> int:
    """Integers written either plainly or as ``1e6``."""
    value = float(text)
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"{text} is not an integer")
    return int(value)


def _constants(args) -> dict:
    overrides = {k: getattr(args, k, None) for k in ("beta", "c1", "eps1")}
    return load_constants(getattr(args, "constants", None), overrides)


def _family(args, g: int | None = None) -> testfunctions.TestFunctionFamily:
    if getattr(args, "T", None) is not None:
        return testfunctions.TestFunctionFamily(args.T)
    return testfunctions.TestFunctionFamily.for_genus(g)


# ---------------------------------------------------------------------------
# volumes


def cmd_volumes_gen(args):
    table = volumes.generate_volumes(args.gmax, args.nmax, args.cap)
    text = volumes.serialize_volume_table(
        table, header=f"Weil-Petersson volumes, g <= {args.gmax}, n <= {args.nmax}")
    if args.output:
        Path(args.output).write_text(text)
        return {"entries": len(table), "g_max": args.gmax, "n_max": args.nmax, "file": args.output}
    return text


def _verify_checks(table: volumes.VolumeTable, seed: int, samples: int, reference: volumes.VolumeTable | None):
    rng = np.random.default_rng(seed)
    checks = []
    if (0, 3) in table:
        ok = table.constant(0, 3) == volumes.PiRational(1, 1, 0)
        checks.append({"name": "V_0_3_is_one", "gating": True, "passed": ok, "detail": str(table.constant(0, 3))})
    worst = None
    violations = 0
    for g, n in table:
        poly = table[(g, n)]
        if n == 0:
            continue
        for _ in range(samples):
            xs = rng.uniform(0.0, 10.0, size=n)
            margin = float(volumes.sinh_ratio_margin(poly, xs, 30))
            worst = margin if worst is None else min(worst, margin)
            violations += margin < 0
    checks.append({"name": "sinh_ratio_margin_nonnegative", "gating": True, "passed": violations == 0,
                   "detail": {"samples_per_entry": samples, "violations": int(violations), "min_margin": worst}})
    strict = volumes.cusp_reduction_violations(table, min_b=2)
    checks.append({"name": "cusp_reduction_b_at_least_2", "gating": True, "passed": not strict,
                   "detail": [[a, b] for a, b, _, _ in strict]})
    loose = volumes.cusp_reduction_violations(table, min_b=0)
    checks.append({"name": "cusp_reduction_all_b", "gating": False, "passed": not loose,
                   "detail": [[a, b] for a, b, _, _ in loose]})
    if reference is not None:
        shared = [k for k in table if k in reference]
        mismatched = [list(k) for k in shared if table[k] != reference[k]]
        checks.append({"name": "matches_reference", "gating": True,
                       "passed": bool(shared) and not mismatched,
                       "detail": {"shared": len(shared), "mismatched": mismatched}})
    return checks


def cmd_volumes_verify(args):
    table = _load_table(args.table)
    reference = _load_table(args.reference) if args.reference else None
    checks = _verify_checks(table, args.seed, args.samples, reference)
    passed = all(c["passed"] for c in checks if c["gating"])
    report = {"table": Path(args.table).name, "entries": len(table), "seed": args.seed,
              "passed": passed, "checks": checks}
    if not passed:
        args._exit_code = 1
    return report


def cmd_volumes_eval(args):
    table = _load_table(args.table)
    poly = table[(args.g, args.n)]
    lengths = _float_list(args.lengths) if args.lengths else []
    value = volumes.evaluate(poly, lengths, args.precision)
    digits = args.precision or volumes.default_precision()
    return {"g": args.g, "n": args.n, "lengths": lengths,
            "value": volumes.mpmath.nstr(value, digits), "constant_term": str(poly.constant_term)}


def cmd_volumes_sep_sum(args):
    table = _load_table(args.table)
    total, ratio = volumes.separating_sum(table, args.g, args.n, args.precision)
    return {"g": args.g, "n": args.n, "separating_sum": float(total), "ratio_to_1_plus_n2_over_g": float(ratio)}


def cmd_volumes_mz_ratio(args):
    table = _load_table(args.table)
    return {"g": args.g, "n": args.n, "mz_ratio": float(volumes.mz_ratio(table, args.g, args.n, args.precision))}


# ---------------------------------------------------------------------------
# testfn


def cmd_testfn_table(args):
    fam = testfunctions.TestFunctionFamily(args.T)
    names = {"f": ("x", "f_T"), "fhat": ("t", "f_T_hat_it"), "k": ("rho", "k_T")}[args.kind]
    return [dict(zip(names, row)) for row in testfunctions.table_rows(fam, args.kind, _grid(args.points))]


def cmd_testfn_abel_check(args):
    rows = []
    for T in _float_list(args.T):
        fam = testfunctions.TestFunctionFamily(T)
        forward, raw = testfunctions.abel_forward_at_zero(fam, detail=True)
        f0 = testfunctions.f1_eval(0.0)
        k_direct = testfunctions.inverse_abel_kT(fam, 0.0)
        k_spec = testfunctions.k_zero_spectral(fam)
        rows.append({
            "T": T,
            "f1_0": f0,
            "forward": forward,
            "forward_unnormalised": raw,
            "forward_rel_error": abs(forward - f0) / f0,
            "k0_direct": k_direct,
            "k0_spectral": k_spec,
            "k0_rel_diff": abs(k_direct - k_spec) / abs(k_direct),
        })
    return rows


def cmd_testfn_ceps(args):
    Ts = _float_list(args.T)
    t_grid = list(np.linspace(0.0, 0.5, args.grid))
    overall, per_T = testfunctions.empirical_C_eps(Ts, args.eps, t_grid, per_T=True)
    return {"eps": args.eps, "T": Ts, "grid_points": args.grid, "C_eps": overall,
            "per_T": [{"T": T, "C_eps": c} for T, c in zip(Ts, per_T)]}


# ---------------------------------------------------------------------------
# trace


def _spectrum(args) -> trace.LengthSpectrum:
    return trace.parse_length_spectrum(_read_text(args.spectrum), oriented=not args.unoriented)


def cmd_trace_certify(args):
    spec = _spectrum(args)
    topo = trace.SurfaceTopology(args.g, args.n)
    consts = trace.TraceConstants(args.eps, args.C, args.nu)
    fam = _family(args, args.g)
    return trace.certify(spec, topo, consts, fam)


def cmd_trace_positivity(args):
    spec = _spectrum(args)
    topo = trace.SurfaceTopology(args.g, args.n)
    fam = _family(args, args.g)
    geo = trace.geometric_side(spec, fam)
    fh = trace.fhat_half(fam)
    defect = geo - fh + args.nu * topo.n * topo.g
    return {"g": args.g, "n": args.n, "T": fam.T, "nu": args.nu, "geometric": geo,
            "fhat_half": fh, "defect": defect, "valid": defect >= 0}


# ---------------------------------------------------------------------------
# bound


def _bound_table(args, g: int, n: int):
    if args.mode != "exact":
        return None
    if args.table:
        return _load_table(args.table)
    return volumes.generate_volume_entries(expectation.required_volumes(g, n))


def cmd_bound_total(args):
    consts = _constants(args)
    table = _bound_table(args, args.g, args.n)
    return expectation.total_bound(args.g, args.n, args.mode, table, consts)


def cmd_bound_sweep(args):
    consts = _constants(args)
    rows = []
    gs = sorted({int(round(x)) for x in np.geomspace(2, args.gmax, args.points)})
    for alpha in _float_list(args.alpha):
        for g in gs:
            n = gap.cusp_count(g, alpha) if alpha > 0 else args.n
            table = _bound_table(args, g, n)
            rep = expectation.total_bound(g, n, args.mode, table, consts).as_dict()
            rows.append({"alpha": alpha, "g": g, "n": n, "mode": rep["mode"],
                         **{f"term_{k}": rep[f"term_{k}"] for k in expectation.TERMS},
                         "total": rep["total"],
                         **{f"ratio_{k}": v for k, v in rep["ratios"].items()}})
    return rows


# ---------------------------------------------------------------------------
# gap


def cmd_gap_value(args):
    p = gap.GapParameters(args.alpha, args.eps, _constants(args)["beta"])
    return {"alpha": p.alpha, "eps": p.eps, "gap": gap.gap_value(p),
            "gap_limit_eps_to_0": float(gap.gap_limit(p.alpha))}


def cmd_gap_tail(args):
    beta = _constants(args)["beta"]
    return {"g": args.g, "n": args.n, "eps": args.eps, "beta": beta, "variant": args.variant,
            "threshold": gap.markov_threshold(args.g, args.n, args.eps),
            "tail": gap.tail_bound(args.g, args.n, args.eps, beta, args.variant)}


def cmd_gap_sweep(args):
    beta = _constants(args)["beta"]
    top = int(math.floor(math.log10(args.gmax) + 1e-9))
    gs = [10 ** j for j in range(1, top + 1)]
    return gap.sweep_rows(args.alpha, args.eps, beta, gs, args.variant)


# ---------------------------------------------------------------------------
# Parser


def _add_common(p):
    p.add_argument("--format", choices=FORMATS, default=None, help="report format")
    p.add_argument("-o", "--output", default=None, help="write the report to this file")
    p.add_argument("--seed", type=int, default=0, help="seed for randomised checks (64-bit)")
    p.add_argument("--precision", type=int, default=None,
                   help=f"decimal digits for exact evaluation (default from {volumes.PRECISION_ENV})")


def _add_constants(p):
    p.add_argument("--constants", default=None, help="JSON file overriding the constants table")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--c1", type=float, default=None)
    p.add_argument("--eps1", type=float, default=None)


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of printing usage and exiting."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wpgap", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    def command(group_parsers, name, func, fmt="json", help=None):
        p = group_parsers.add_parser(name, help=help)
        _add_common(p)
        p.set_defaults(func=func, default_format=fmt)
        return p

    vol = groups.add_parser("volumes", help="Weil-Petersson volume tables").add_subparsers(dest="command", required=True)
    p = command(vol, "gen", cmd_volumes_gen, help="generate a volume table")
    p.add_argument("--gmax", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--cap", type=int, default=volumes.DEFAULT_COMPLEXITY_CAP, help="largest 3g-3+n allowed")
    p = command(vol, "verify", cmd_volumes_verify, help="check table invariants")
    p.add_argument("--table", required=True)
    p.add_argument("--reference", default=None, help="second table to compare exactly")
    p.add_argument("--samples", type=int, default=100, help="random length vectors per entry")
    p = command(vol, "eval", cmd_volumes_eval, help="evaluate one volume polynomial")
    p.add_argument("--table", required=True)
    p.add_argument("-g", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--lengths", default="", help="comma separated boundary lengths")
    p = command(vol, "sep-sum", cmd_volumes_sep_sum, help="separating volume sum")
    p.add_argument("--table", required=True)
    p.add_argument("-g", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p = command(vol, "mz-ratio", cmd_volumes_mz_ratio, help="large-genus volume ratio")
    p.add_argument("--table", required=True)
    p.add_argument("-g", type=int, required=True)
    p.add_argument("-n", type=int, required=True)

    tf = groups.add_parser("testfn", help="test function transforms").add_subparsers(dest="command", required=True)
    p = command(tf, "table", cmd_testfn_table, fmt="csv", help="tabulate f_T, its transform or k_T")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--kind", choices=("f", "fhat", "k"), default="f")
    p.add_argument("--points", default="0:1:11", help="start:stop:num or a comma list")
    p = command(tf, "abel-check", cmd_testfn_abel_check, help="Abel transform identities")
    p.add_argument("--T", default="2,8,27.63", help="comma separated T values")
    p = command(tf, "ceps", cmd_testfn_ceps, help="empirical constant for the transform lower bound")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--T", default="8,16,28", help="comma separated T values")
    p.add_argument("--grid", type=int, default=32, help="points of the t grid on [0, 1/2]")

    tr = groups.add_parser("trace", help="trace inequality certificate").add_subparsers(dest="command", required=True)
    for name, func in (("certify", cmd_trace_certify), ("positivity", cmd_trace_positivity)):
        p = command(tr, name, func)
        p.add_argument("--spectrum", required=True, help="CSV with header length,multiplicity")
        p.add_argument("-g", type=int, required=True)
        p.add_argument("-n", type=int, required=True)
        p.add_argument("--nu", type=float, default=0.0)
        p.add_argument("--T", type=float, default=None, help="override T = 4 log g")
        p.add_argument("--unoriented", action="store_true", help="entries are unoriented geodesics")
        if name == "certify":
            p.add_argument("--eps", type=float, required=True)
            p.add_argument("--C", type=float, required=True)

    bd = groups.add_parser("bound", help="expectation bound terms").add_subparsers(dest="command", required=True)
    p = command(bd, "total", cmd_bound_total, help="four-term bound for one (g, n)")
    p.add_argument("-g", type=int, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--mode", choices=expectation.MODES, default="exact")
    p.add_argument("--table", default=None, help="volume table (exact mode generates one if absent)")
    _add_constants(p)
    p = command(bd, "sweep", cmd_bound_sweep, fmt="csv", help="bound ratios over a genus grid")
    p.add_argument("--alpha", default="0", help="comma separated cusp exponents; n = floor(g^alpha)")
    p.add_argument("-n", type=int, default=1, help="cusp count used when alpha = 0")
    p.add_argument("--gmax", type=_genus_value, default=10 ** 6)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--mode", choices=expectation.MODES, default="stirling")
    p.add_argument("--table", default=None)
    _add_constants(p)

    gp = groups.add_parser("gap", help="gap size and probability tail").add_subparsers(dest="command", required=True)
    p = command(gp, "value", cmd_gap_value, help="gap as a function of alpha and eps")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    _add_constants(p)
    p = command(gp, "tail", cmd_gap_tail, help="Markov threshold and tail bound")
    p.add_argument("-g", type=_genus_value, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--variant", choices=gap.TAIL_VARIANTS, default="n")
    _add_constants(p)
    p = command(gp, "sweep", cmd_gap_sweep, fmt="csv", help="gap, threshold and tail over g = 10^j")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--gmax", type=_genus_value, default=10 ** 6)
    p.add_argument("--variant", choices=gap.TAIL_VARIANTS, default="n")
    _add_constants(p)
    return parser


def _render(result, fmt: str) -> str:
    if isinstance(result, str):
        return result
    if isinstance(result, list):
        return emit_rows(result, fmt)
    return emit_report(result, fmt)


def _error(exc: Exception, code: int, kind: str) -> int:
    payload = {"error": kind, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not 0 <= args.seed < 2 ** 64:
            raise PreconditionError("seed must be a 64-bit unsigned integer")
        if args.precision is not None and args.precision < 15:
            raise PreconditionError("precision must be at least 15")
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except WPGapError as exc:
        return _error(exc, exc.exit_code, exc.kind)
    saved = os.environ.get(volumes.PRECISION_ENV)
    if args.precision is not None:
        os.environ[volumes.PRECISION_ENV] = str(args.precision)
    args._exit_code = 0
    try:
        result = args.func(args)
        text = _render(result, args.format or args.default_format)
    except WPGapError as exc:
        return _error(exc, exc.exit_code, exc.kind)
    except OSError as exc:
        return _error(exc, 1, "error")
    finally:
        if saved is None:
            os.environ.pop(volumes.PRECISION_ENV, None)
        else:
            os.environ[volumes.PRECISION_ENV] = saved
    if args.output and args.func is not cmd_volumes_gen:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return args._exit_code


if __name__ == "__main__":
    sys.exit(main())
