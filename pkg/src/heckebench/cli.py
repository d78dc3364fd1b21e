"""heckebench command line: reproducible experiments with JSON/CSV output.

Exit codes: 0 success, 1 a numeric tolerance was missed (a structured report
is printed), 2 usage error.  Every run that writes --out also writes
<out>.manifest.json; wall-clock and thread-count fields live under its
"timing" key, which is left out of the manifest id.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

THREADS_ENV = "HECKEBENCH_THREADS"


class UsageError(ValueError):
    pass


class ToleranceFailure(RuntimeError):
    def __init__(self, report: dict):
        super().__init__(report.get("reason", "tolerance failure"))
        self.report = report


# ---------------------------------------------------------------------------
# serialization


def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float at 17 significant digits and sorted keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def extended(value, bits: int) -> dict:
    """An extended-precision number as a decimal string with its precision."""
    import mpmath
    with mpmath.workprec(bits):
        return {"decimal": mpmath.nstr(+value, int(bits * math.log10(2))), "precisionBits": bits}


def threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer")
    return n


def _versions() -> dict:
    import mpmath
    import scipy
    from . import __version__
    return {"heckebench": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "mpmath": mpmath.__version__}


def build_manifest(command: str, params: dict, settings: dict, started: float) -> dict:
    body = {
        "command": command,
        "parameters": params,
        "settings": settings,
        "versions": _versions(),
        "determinism": "no random numbers are drawn; outputs depend only on the parameters",
    }
    ident = hashlib.sha256(dumps(body).encode()).hexdigest()[:16]
    body["id"] = ident
    body["timing"] = {"wallSeconds": time.perf_counter() - started,
                      "finishedAt": datetime.now(timezone.utc).isoformat(),
                      "threads": threads()}
    return body


def _emit(args, doc, manifest: dict, csv_text: str | None = None) -> None:
    if isinstance(doc, dict):
        doc = {**doc, "manifest": manifest["id"]}
    text = csv_text if csv_text is not None else dumps(doc) + "\n"
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        Path(str(out) + ".manifest.json").write_text(dumps(manifest) + "\n")
        if csv_text is not None and doc is not None:
            sys.stdout.write(dumps(doc) + "\n")
    else:
        sys.stdout.write(text)
        if csv_text is not None and doc is not None:
            sys.stdout.write(dumps(doc) + "\n")


def _quad(est) -> dict:
    return {"value": complex(est.value), "error": float(est.error), "ratio": float(est.ratio),
            "levels": list(est.levels)}


# ---------------------------------------------------------------------------
# helpers


def _load_psi(path):
    from .windows import TestFunction
    if path is None:
        return TestFunction.default(1.0)
    try:
        return TestFunction.load(path)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read test function from {path}: {exc}") from None


def _basis(k: int, n_max: int = 1000, calibrate: bool = True, level: int | None = None):
    from .eigen import eigenbasis
    from .observables import DEFAULT_LEVEL, norm_rule, petersson_norm_calibrate
    from .qexpansion import cusp_dimension
    if k < 12 or k % 2 or cusp_dimension(k) == 0:
        raise UsageError(f"S_{k} has no cusp forms at level 1")
    B = eigenbasis(k, n_max)
    if calibrate:
        petersson_norm_calibrate(B, norm_rule(k, level if level is not None else DEFAULT_LEVEL))
    return B


def _index(B, i: int, flag: str):
    if not 1 <= i <= B.dim:
        raise UsageError(f"{flag} must lie in 1..{B.dim}")
    return B[i - 1]


# ---------------------------------------------------------------------------
# subcommands; each returns (document, settings, csv text or None)


def cmd_basis(a):
    from .qexpansion import default_truncation, miller_basis
    N = a.nmax or default_truncation(a.weight)
    B = miller_basis(a.weight, N)
    return B.to_json(), {"truncation": N}, None


def cmd_eigen(a):
    # evaluating F for the calibration needs more terms than a short table
    B = _basis(a.weight, max(a.nmax, 1000), calibrate=not a.no_calibrate)
    doc = B.to_json(a.nmax)
    doc["diagnostics"] = B.diagnostics
    return doc, {"nmax": a.nmax, "calibrated": not a.no_calibrate}, None


def cmd_inner(a):
    from .observables import inner_product, norm_rule
    B = _basis(a.weight, level=a.level)
    f, g = _index(B, a.f, "--f"), _index(B, a.g, "--g")
    if a.psi is None and not a.constant:
        psi = _load_psi(None)
    else:
        psi = None if a.constant else _load_psi(a.psi)
    rule = norm_rule(a.weight, a.level) if psi is None else None
    est = inner_product(psi, f, g, rule)
    doc = {"weight": a.weight, "f": a.f, "g": a.g, "weightFunction": "1" if psi is None else psi.to_json(),
           "inner": _quad(est)}
    return doc, {"level": a.level}, None


def cmd_unfold_check(a):
    from .observables import poincare_strip_lhs, rankin_selberg_check, unfold_poincare_rhs
    from .windows import RadialWindow
    if a.s != 2.0:
        raise UsageError("only s = 2 is supported for the Rankin-Selberg check")
    if a.m == 0:
        raise UsageError("--m must be nonzero")
    n_max = 20000
    B = _basis(a.weight, n_max)
    f = B[0]
    g = B[1] if B.dim > 1 else B[0]
    w = RadialWindow.for_scale(1.0)
    lhs = poincare_strip_lhs(a.m, w, f, f)
    rhs = unfold_poincare_rhs(a.m, w, f, f)
    rel_p = abs(lhs.value - rhs) / abs(rhs)
    checks = {"poincare": {"m": a.m, "strip": _quad(lhs), "series": rhs, "relDev": rel_p}}
    for name, (u, v) in {"rankinSelbergSame": (f, f), "rankinSelbergCross": (f, g)}.items():
        r = rankin_selberg_check(u, v)
        checks[name] = {"quadrature": _quad(r.quadrature), "series": r.series, "terms": r.terms,
                        "relDev": r.relative_deviation}
    doc = {"weight": a.weight, "s": a.s, "checks": checks, "tolerance": 1e-4}
    worst = max(c["relDev"] for c in checks.values())
    if worst >= 1e-4:
        raise ToleranceFailure({"reason": "unfolding identity missed 1e-4", **doc})
    return doc, {"tolerance": 1e-4, "nmax": n_max}, None


def cmd_massq(a):
    from .observables import JNearForm, mass_observable
    psi = _load_psi(a.psi)
    try:
        with open(a.coeffs) as fh:
            F = JNearForm.from_json(a.weight, json.load(fh))
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read coefficients from {a.coeffs}: {exc}") from None
    B = _basis(a.weight)
    for j, _ in F.components:
        _index(B, j, "component index")
    obs = mass_observable(F, psi, B)
    doc = {"weight": a.weight, "J": F.J, "direct": _quad(obs.direct), "bilinear": obs.bilinear,
           "bilinearError": obs.bilinear_error, "psiMass": obs.psi_mass,
           "discrepancy": obs.discrepancy, "routeGap": obs.route_gap}
    return doc, {"psi": psi.to_json()}, None


def cmd_l4(a):
    from .observables import l4_parseval
    B = _basis(a.weight)
    B2 = _basis(2 * a.weight)
    rec = l4_parseval(B[0], B2)
    doc = {"weight": a.weight, "l4": _quad(rec.l4), "parsevalSum": rec.parseval_sum,
           "partialSums": rec.partial_sums, "relDev": rec.relative_deviation, "tolerance": 1e-3}
    if rec.relative_deviation >= 1e-3:
        raise ToleranceFailure({"reason": "Parseval identity missed 1e-3", **doc})
    return doc, {"tolerance": 1e-3}, None


def cmd_bounds(a):
    from .bounds import bound_report
    try:
        i, j = (int(v) for v in a.pair.split(","))
    except ValueError:
        raise UsageError("--pair takes two indices, e.g. 1,2") from None
    n_max = int(a.x) + 10
    B = _basis(a.weight, max(1000, n_max))
    _index(B, i, "--pair"), _index(B, j, "--pair")
    rep = bound_report(B, i, j, _load_psi(a.psi), a.x, delta1=a.delta1)
    return rep.to_json(), {"x": a.x, "delta1": a.delta1}, None


def cmd_optimize(a):
    import mpmath
    from .bounds import optimize_exponent
    try:
        r = optimize_exponent(a.delta1, a.bits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = r.to_json()
    doc["L"] = float(r.L)
    doc["LExtended"] = extended(r.L, a.bits)
    doc["delta1"] = extended(r.delta1, a.bits)
    with mpmath.workprec(a.bits):
        doc["minusL"] = extended(-r.L, a.bits)
    doc["gridCheck"] = r.grid_ok
    if not r.grid_ok:
        raise ToleranceFailure({"reason": "grid min-max disagrees with the closed form", **doc})
    return doc, {"bits": a.bits}, None


def cmd_mertens(a):
    from .bounds import mertens_check
    try:
        r = mertens_check(a.delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = r.to_json()
    if r.degenerate:
        doc["note"] = "a factor 1 - delta/p vanishes; the product is identically zero"
    elif not r.bounded:
        raise ToleranceFailure({"reason": "ratios leave a factor 3 band around their median", **doc})
    return doc, {}, None


def cmd_decor_scan(a):
    from .bounds import SCAN_COLUMNS, decor_scan, parse_weights
    try:
        ks = parse_weights(a.weights)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    psi = _load_psi(a.psi)
    scan = decor_scan(ks, psi, a.delta1, workers=threads())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for row in scan.rows:
        w.writerow([v if isinstance(v, int) else format_float(v) for v in row.as_tuple()])
    bad = [r.as_tuple()[:3] for r in scan.rows
           if not math.isfinite(r.abs_inner) or r.quad_error >= 0.1 * r.abs_inner]
    report = {"rows": len(scan.rows), "weights": [k for k, _ in scan.max_pair()]}
    try:
        report["fit"] = scan.fit.to_json()
    except ValueError as exc:
        report["fit"] = {"skipped": str(exc)}
    if bad:
        raise ToleranceFailure({"reason": "quadrature error at or above 10% of the value",
                                "pairs": bad, **report})
    return report, {"psi": psi.to_json(), "delta1": a.delta1}, buf.getvalue()


def cmd_selftest(a):
    from .acceptance import NON_REPRODUCIBLE, run_all
    only = {int(v) for v in a.only.split(",")} if a.only else None
    results = run_all(only)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    doc = {"checks": [r.to_json() for r in results], "passed": all(r.passed for r in results),
           "note": NON_REPRODUCIBLE}
    if not doc["passed"]:
        raise ToleranceFailure({"reason": "selftest failed", **doc})
    return doc, {}, None


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heckebench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="write the primary artifact here (plus <out>.manifest.json)")
        sp.set_defaults(func=fn)
        return sp

    sp = add("basis", cmd_basis, "Miller basis of S_k as exact q-expansions")
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--nmax", type=int, default=None)

    sp = add("eigen", cmd_eigen, "Hecke eigenbasis with normalized eigenvalues")
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--nmax", type=int, default=1000)
    sp.add_argument("--no-calibrate", action="store_true", help="skip computing log a_f(1)")

    sp = add("inner", cmd_inner, "<psi F_f, F_g> with a quadrature error estimate")
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--f", type=int, required=True)
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--psi", help="test function JSON (default: centered bump at M = 1)")
    sp.add_argument("--constant", action="store_true", help="use the weight function 1 instead of psi")
    sp.add_argument("--level", type=int, default=2)

    sp = add("unfold-check", cmd_unfold_check, "incomplete Poincare and Rankin-Selberg unfolding")
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--s", type=float, default=2.0)

    sp = add("massq", cmd_massq, "<psi, |F|^2> for a J-near eigenform")
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--coeffs", required=True)
    sp.add_argument("--psi")

    sp = add("l4", cmd_l4, "L4 norm against Parseval over the weight-2k basis")
    sp.add_argument("--weight", type=int, required=True)

    sp = add("bounds", cmd_bounds, "prime products and shifted sums for one pair")
    sp.add_argument("--weight", type=int, required=True)
    sp.add_argument("--pair", required=True)
    sp.add_argument("--x", type=float, default=1e5)
    sp.add_argument("--psi")
    sp.add_argument("--delta1", default="soundararajan-thorner")

    sp = add("optimize", cmd_optimize, "the min-max exponent in extended precision")
    sp.add_argument("--delta1", required=True, help="preset (soundararajan-thorner, grc) or number")
    sp.add_argument("--bits", type=int, default=256)

    sp = add("mertens", cmd_mertens, "prod (1 - delta/p) (log x)^delta up to 1e7")
    sp.add_argument("--delta", type=float, required=True)

    sp = add("decor-scan", cmd_decor_scan, "<psi F_i, F_j> over a range of weights (CSV)")
    sp.add_argument("--weights", default="24:60:4")
    sp.add_argument("--psi")
    sp.add_argument("--delta1", default="soundararajan-thorner")

    sp = add("selftest", cmd_selftest, "run the acceptance checks")
    sp.add_argument("--only", help="comma-separated check numbers")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    try:
        threads()
        doc, settings, csv_text = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"heckebench {args.command}: {exc}\n")
        return 2
    except ToleranceFailure as exc:
        sys.stdout.write(dumps({"status": "fail", **exc.report}) + "\n")
        return 1
    _emit(args, doc, build_manifest(args.command, params, settings, started), csv_text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
