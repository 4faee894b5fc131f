"""Command line: ``qlob verify``, ``qlob eval`` and ``qlob limit``.

Exit codes: 0 when every requested check passes, 1 when one fails,
2 for usage errors (unknown names, bad parameter values).
"""

import argparse
import csv
import io
import itertools
import json
import math
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import checks
from .context import QContext, QlobError
from .poisson import PoissonParams, pkernel_scalar, qnu_series
from .qbessel import i2, j1_zero, j2_zero, k2
from .qkernels import qexp_E, qexp_e, qgamma, theta0

DEFAULTS = {"q": 0.5, "delta": 0, "nu": 0.5, "s": 1.0, "cutoff": 60, "tol": None, "format": "json"}


class UsageError(Exception):
    pass


@dataclass
class VerificationReport:
    check_name: str
    params: dict
    residual: float
    tolerance: float
    passed: bool
    runtime_ms: int
    details: dict = None


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    return x if x is None or isinstance(x, str) else str(x)


def _validate(opts):
    if not 0.0 < opts["q"] < 1.0:
        raise UsageError(f"q must lie in (0, 1), got {opts['q']}")
    if opts["delta"] not in (0, 1, 2):
        raise UsageError(f"delta must be 0, 1 or 2, got {opts['delta']}")
    if opts["s"] <= 0:
        raise UsageError("s must be positive")
    if opts["cutoff"] < 1:
        raise UsageError("cutoff must be a positive integer")
    if opts["tol"] is not None and opts["tol"] <= 0:
        raise UsageError("tol must be positive")


def run_check(name, timing=True, **params):
    """Run one registered check and return its :class:`VerificationReport`."""
    if name not in checks.CHECKS:
        raise UsageError(f"unknown check {name!r}; known: {', '.join(sorted(checks.CHECKS))}")
    opts = {k: v for k, v in DEFAULTS.items() if k != "format"}
    opts.update({k: v for k, v in params.items() if v is not None})
    _validate(opts)
    tol = opts["tol"] if opts["tol"] is not None else checks.DEFAULT_TOL[name]
    cp = checks.CheckParams(
        q=opts["q"], delta=int(opts["delta"]), nu=opts["nu"], s=opts["s"], cutoff=int(opts["cutoff"])
    )
    start = time.perf_counter()
    residual, details = checks.CHECKS[name](cp)
    elapsed = int(round(1000 * (time.perf_counter() - start))) if timing else 0
    residual = float(residual)
    shown = {"q": cp.q, "delta": cp.delta, "nu": cp.nu, "s": cp.s, "M": cp.cutoff, "tol": tol}
    return VerificationReport(name, shown, residual, tol, residual <= tol, elapsed, _plain(details))


def _write_table(rows, fields, fmt, out):
    if fmt == "json":
        json.dump([_plain(r) for r in rows], out, indent=2)
        out.write("\n")
        return
    w = csv.DictWriter(out, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in fields})


def _report_rows(reports):
    rows = []
    for r in reports:
        row = {"check_name": r.check_name, **r.params}
        row.update(residual=r.residual, tolerance=r.tolerance, passed=r.passed, runtime_ms=r.runtime_ms)
        rows.append(row)
    return rows


REPORT_FIELDS = ["check_name", "q", "delta", "nu", "s", "M", "tol", "residual", "tolerance", "passed", "runtime_ms"]


# --- eval --------------------------------------------------------------------


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _grid(args, name):
    """Values of one grid axis from ``--<name>`` lists or a q-lattice range."""
    given = getattr(args, name, None)
    if given is not None:
        return _floats(given)
    if args.lattice is not None and name in ("x", "a", "h", "b"):
        lo, hi = (int(v) for v in args.lattice.split(":"))
        return [args.q_value**m for m in range(lo, hi + 1)]
    if args.num is not None and name == "x":
        return list(np.linspace(args.start, args.stop, args.num))
    return None


def _eval_rows(fn, args, ctx):
    nus = _floats(args.nu) if args.nu is not None else [DEFAULTS["nu"]]
    xs = _grid(args, "x")
    if fn == "theta0":
        return [{"q": ctx.q, "value": theta0(ctx)}], ["q"]
    if fn == "qgamma":
        if args.nu is None and xs is not None:
            nus = xs
        return [_row(lambda nu=nu: qgamma(nu, ctx), nu=nu) for nu in nus], ["nu"]
    if fn in ("qexp-e", "qexp-E", "j1", "j2"):
        f = {"qexp-e": qexp_e, "qexp-E": qexp_E, "j1": j1_zero, "j2": j2_zero}[fn]
        xs = xs if xs is not None else [0.5]
        return [_row(lambda x=x: f(x, ctx), x=x) for x in xs], ["x"]
    if fn in ("i2", "k2"):
        f = i2 if fn == "i2" else k2
        xs = xs if xs is not None else [1.0]
        return [_row(lambda n=n, x=x: f(n, x, ctx), nu=n, x=x) for n in nus for x in xs], ["nu", "x"]
    if fn in ("pkernel", "qnu"):
        axes = [_grid(args, k) or [v] for k, v in (("a", 0.5), ("h", 1.0), ("b", 0.5))]
        f = pkernel_scalar if fn == "pkernel" else qnu_series
        rows = []
        for n in nus:
            p = PoissonParams(n)
            for a, h, b in itertools.product(*axes):
                rows.append(_row(lambda a=a, h=h, b=b: f(p, a, h, b, ctx), nu=n, a=a, h=h, b=b))
        return rows, ["nu", "a", "h", "b"]
    raise UsageError(f"unknown function {fn!r}")


EVAL_FUNCTIONS = ("qexp-e", "qexp-E", "qgamma", "theta0", "j1", "j2", "i2", "k2", "pkernel", "qnu")


def _row(compute, **inputs):
    row = dict(inputs)
    try:
        v = complex(np.asarray(compute()).item())
        row.update(re=v.real, im=v.imag, error="")
    except QlobError as err:
        row.update(re=math.nan, im=math.nan, error=f"{type(err).__name__}: {err}")
    return row


# --- argument handling ---------------------------------------------------------


def _add_common(p):
    p.add_argument("--q", type=float)
    p.add_argument("--delta", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--cutoff", type=int, help="lattice bound M")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--config", help="JSON file with the same keys; flags win")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="qlob", description="q-deformed Fourier and Poisson checks")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a named check, or 'all'")
    v.add_argument("check")
    _add_common(v)
    v.add_argument("--nu", type=float)
    v.add_argument("--tol", type=float)
    v.add_argument("--no-timing", action="store_true", help="report runtime_ms as 0")

    e = sub.add_parser("eval", help="tabulate a function on a grid")
    e.add_argument("function", choices=EVAL_FUNCTIONS)
    _add_common(e)
    e.add_argument("--nu", help="comma separated orders")
    e.add_argument("--x", help="comma separated arguments")
    e.add_argument("--a")
    e.add_argument("--h")
    e.add_argument("--b")
    e.add_argument("--lattice", help="m0:m1, use q^m for m in the range")
    e.add_argument("--start", type=float, default=0.0)
    e.add_argument("--stop", type=float, default=1.0)
    e.add_argument("--num", type=int)

    lim = sub.add_parser("limit", help="discrepancies from the q -> 1 limits")
    lim.add_argument("--nu", type=float, default=0.5)
    lim.add_argument("--q", default=",".join(str(q) for q in checks.LIMIT_QS))
    lim.add_argument("--format", choices=("json", "csv"))
    lim.add_argument("--config")
    return parser


def _options(args):
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, ValueError) as err:
            raise UsageError(f"cannot read config: {err}") from err
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        opts.update(loaded)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and not (key == "nu" and isinstance(val, str)):
            opts[key] = val
    return opts


def _verify(args, out):
    opts = _options(args)
    names = sorted(checks.CHECKS) if args.check == "all" else [args.check]
    params = {k: opts[k] for k in ("q", "delta", "nu", "s", "cutoff", "tol")}
    reports = [run_check(n, timing=not args.no_timing, **params) for n in names]
    if opts["format"] == "csv":
        _write_table(_report_rows(reports), REPORT_FIELDS, "csv", out)
    else:
        body = [_plain(asdict(r)) for r in reports]
        json.dump(body[0] if len(body) == 1 else body, out, indent=2, sort_keys=True)
        out.write("\n")
    return 0 if all(r.passed for r in reports) else 1


def _eval(args, out):
    opts = _options(args)
    _validate({**opts, "tol": None})
    ctx = QContext(q=opts["q"], delta=int(opts["delta"]), s=opts["s"], lattice_cutoff=int(opts["cutoff"]))
    args.q_value = ctx.q
    rows, inputs = _eval_rows(args.function, args, ctx)
    _write_table(rows, inputs + ["re", "im", "error"], opts["format"], out)
    return 0


def _limit(args, out):
    opts = _options(args)
    qs = _floats(args.q)
    if any(not 0.0 < q < 1.0 for q in qs):
        raise UsageError("every q must lie in (0, 1)")
    rows = checks.limit_table(args.nu, qs)
    _write_table(rows, ["q", "qgamma", "pkernel", "k2_shape"], opts["format"], out)
    return 0


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return {"verify": _verify, "eval": _eval, "limit": _limit}[args.command](args, out)
    except UsageError as err:
        print(f"qlob: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
