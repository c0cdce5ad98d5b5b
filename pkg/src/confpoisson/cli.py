"""``veritool`` command line.

Subcommands
-----------
verify {euclid,heis}
    Run verification suites and print a report.
constants
    Print the closed-form constants for ``(n, a)``.
poisson eval {euclid,heis}
    Evaluate a Poisson transform at given points.
sweep {euclid,heis}
    Run suites over a grid of ``a`` values.
juhl
    Print the coefficient tree of a Juhl operator.

Settings may also come from a flat ``key = value`` file passed with
``--config``; command-line flags take precedence.  Exit status is 0 when
every check passes, 1 when any fails and 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import euclid_poisson as ep
from . import heis_poisson as hp
from . import io as cpio
from . import juhl
from .checks import ConfigError, SUITES, SuiteConfig, run_suite, validate
from .params import ModelParams, ParameterRangeError
from .specfun import model_constants

FIELD_NAMES = {"euclid": "euclidean", "euclidean": "euclidean",
               "heis": "heisenberg", "heisenberg": "heisenberg"}
CONFIG_KEYS = {"field": str, "n": int, "a": float, "suite": str, "seed": int, "tol": float,
               "grid": float, "box": float, "json": "bool", "csv": str, "p": float}

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def read_config(path: str) -> Dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: Dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        kind = CONFIG_KEYS[key]
        try:
            if kind == "bool":
                if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(val)
                out[key] = val.lower() in ("true", "1", "yes")
            else:
                out[key] = kind(val)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value {val!r} for {key}") from None
    return out


def _merged(args: argparse.Namespace, key: str, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return args.file_config.get(key, default)


def _field(args: argparse.Namespace) -> str:
    name = _merged(args, "field")
    if name is None:
        raise ConfigError("field required (euclid or heis)")
    if name not in FIELD_NAMES:
        raise ConfigError(f"unknown field {name!r}")
    return FIELD_NAMES[name]


def _suites(args: argparse.Namespace) -> tuple:
    raw = _merged(args, "suite")
    if raw is None:
        return ()
    items = raw if isinstance(raw, list) else [raw]
    return tuple(s.strip() for item in items for s in str(item).split(",") if s.strip())


def _suite_config(args: argparse.Namespace, field: str, a: Optional[float] = None) -> SuiteConfig:
    cfg = SuiteConfig(field=field, n=_merged(args, "n"),
                      a=a if a is not None else _merged(args, "a"),
                      suites=_suites(args), seed=int(_merged(args, "seed", 0)),
                      tol=_merged(args, "tol"), grid=_merged(args, "grid"), box=_merged(args, "box"))
    validate(cfg)
    return cfg


def _write_csv(path: str, rows: Sequence[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _suite_config(args, _field(args))
    want_json = bool(_merged(args, "json", False))

    def progress(rec):
        print(f"[{rec.status.upper():5s}] {rec.check_id} ({rec.runtime:.1f}s)", file=sys.stderr)
    report = run_suite(cfg, progress=progress)
    print(report.to_json() if want_json else report.to_text())
    path = _merged(args, "csv")
    if path:
        _write_csv(path, report.to_csv_rows())
    return EXIT_OK if report.passed else EXIT_FAIL


def constants_record(n: int, a: float, p: float = 2.0) -> Dict[str, float]:
    """Constants of both geometries; entries outside their range are ``nan``."""
    out = {"n": n, "a": a, "p": p}
    for fld in ("euclidean", "heisenberg"):
        params = ModelParams(fld, n, a)
        if params.in_dirichlet_range():
            mc = model_constants(params, p).as_dict()
        else:
            mc = {}
        keys = ("c_real", "iso_real", "lp_bound_real") if fld == "euclidean" else (
            "c_heis", "iso_heis", "lp_bound_heis")
        for k in keys:
            out[k] = float(mc.get(k, math.nan))
    return out


def cmd_constants(args: argparse.Namespace) -> int:
    n, a = _merged(args, "n"), _merged(args, "a")
    if n is None or a is None:
        raise ConfigError("constants needs --n and --a")
    try:
        rec = constants_record(int(n), float(a), float(_merged(args, "p", 2.0)))
    except ParameterRangeError as exc:
        raise ConfigError(str(exc)) from None
    if _merged(args, "json", False):
        print(json.dumps(rec, indent=2, allow_nan=True))
    else:
        w = max(len(k) for k in rec)
        for k, v in rec.items():
            print(f"{k.ljust(w)}  {v!r}")
    path = _merged(args, "csv")
    if path:
        _write_csv(path, [["name", "value"]] + [[k, repr(v)] for k, v in rec.items()])
    return EXIT_OK


def _boundary_data(kind: str, params: ModelParams):
    if params.euclidean:
        table = {"one": ep.constant_one, "kinv": lambda: ep.kinv_boundary(params),
                 "gaussian": lambda: ep.gaussian(np.zeros(params.n - 1), 1.0)}
    else:
        table = {"one": hp.heis_constant_one, "kinv": lambda: hp.heis_kinv_boundary(params),
                 "gaussian": hp.heis_gaussian}
    if kind not in table:
        raise ConfigError(f"unknown boundary data {kind!r}; choose from {sorted(table)}")
    return table[kind]()


def cmd_eval(args: argparse.Namespace) -> int:
    field = _field(args)
    n, a = _merged(args, "n"), _merged(args, "a")
    if n is None or a is None:
        raise ConfigError("poisson eval needs --n and --a")
    try:
        params = ModelParams(field, int(n), float(a))
        params.require_formula_range()
    except ParameterRangeError as exc:
        raise ConfigError(str(exc)) from None
    dim = params.n if params.euclidean else 2 * params.n + 1
    pts: List[List[float]] = []
    for spec in args.point or []:
        try:
            pts.append([float(x) for x in spec.split(",")])
        except ValueError:
            raise ConfigError(f"bad point {spec!r}") from None
    if args.points:
        _, arr, _, _ = cpio.read_eval_csv(args.points)
        pts.extend(arr.tolist())
    if not pts or any(len(p) != dim for p in pts):
        raise ConfigError(f"need points with {dim} coordinates")
    points = np.array(pts)
    f = _boundary_data(args.data, params)
    tol = float(_merged(args, "tol", 1e-10))
    if params.euclidean:
        vals, errs = ep.poisson_transform_real(f, points, params, tol=tol, return_error=True)
        names = [f"x{i + 1}" for i in range(dim)]
    else:
        vals, errs = hp.heis_poisson_transform(f, points, params, tol=tol, return_error=True)
        names = [f"{c}{i + 1}" for i in range(params.n) for c in "xy"] + ["t"]
    if _merged(args, "json", False):
        print(json.dumps({"params": {"field": field, "n": params.n, "a": params.a},
                          "data": args.data, "points": points.tolist(),
                          "values": vals.tolist(), "errors": errs.tolist()}, indent=2))
    else:
        for p, v, e in zip(points, vals, errs):
            print(" ".join(f"{x:.6g}" for x in p), f"{v:.15g}", f"{e:.2e}")
    path = _merged(args, "csv")
    if path:
        cpio.write_eval_csv(path, points, vals, errs, names)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    field = _field(args)
    if args.a_values:
        try:
            a_list = [float(x) for x in args.a_values.split(",")]
        except ValueError:
            raise ConfigError(f"bad --a-values {args.a_values!r}") from None
    elif args.a_range:
        lo, hi, steps = args.a_range
        a_list = list(np.linspace(float(lo), float(hi), int(steps)))
    else:
        raise ConfigError("sweep needs --a-values or --a-range")
    reports = [run_suite(_suite_config(args, field, a)) for a in a_list]
    if _merged(args, "json", False):
        print(json.dumps([r.as_dict() for r in reports], indent=2, allow_nan=True))
    else:
        rows = [("a", "check", "status", "measured", "expected")]
        for a, rep in zip(a_list, reports):
            for rec in rep.records:
                rows.append((f"{a:g}", rec.check_id, rec.status.upper(), f"{rec.measured:.6g}",
                             f"{rec.expected:.6g}"))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        for r in rows:
            print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    path = _merged(args, "csv")
    if path:
        rows = [["a"] + reports[0].to_csv_rows()[0]] if reports else []
        for a, rep in zip(a_list, reports):
            rows += [[repr(float(a))] + r for r in rep.to_csv_rows()[1:]]
        _write_csv(path, rows)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_juhl(args: argparse.Namespace) -> int:
    n, a = _merged(args, "n"), _merged(args, "a")
    if n is None or a is None:
        raise ConfigError("juhl needs --n and --a")
    try:
        params = ModelParams("heisenberg", int(n), float(a))
        op = juhl.juhl_build(juhl.juhl_parameter(params), args.k, params.n)
    except (ParameterRangeError, juhl.DegenerateParameterError) as exc:
        raise ConfigError(str(exc)) from None
    print(op.to_sexpr())
    if args.expand:
        for word, c in sorted(op.expand().items()):
            print(f"{c}\t{' '.join(word) or 'id'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, field: bool = True) -> None:
    if field:
        p.add_argument("field", nargs="?", choices=sorted(FIELD_NAMES), help="geometry")
    p.add_argument("--n", type=int, help="dimension index")
    p.add_argument("--a", type=float, help="weight exponent")
    p.add_argument("--tol", type=float, help="quadrature tolerance")
    p.add_argument("--json", action="store_true", default=None, help="JSON output")
    p.add_argument("--csv", metavar="PATH", help="also write a CSV file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="veritool", description=__doc__.split("\n")[0])
    parser.add_argument("--config", metavar="FILE", help="key = value settings file")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    _common(v)
    v.add_argument("--suite", action="append",
                   help=f"suite name, repeatable or comma separated: "
                        f"{', '.join(sorted(SUITES))}, acceptance")
    v.add_argument("--seed", type=int)
    v.add_argument("--grid", type=float, help="finest grid spacing")
    v.add_argument("--box", type=float, help="half-width of grid boxes")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("constants", help="closed-form constants")
    _common(c, field=False)
    c.add_argument("--p", type=float, help="L^p exponent for the bound constants (default 2)")
    c.set_defaults(func=cmd_constants)

    pe = sub.add_parser("poisson", help="Poisson transform utilities")
    psub = pe.add_subparsers(dest="action", required=True)
    ev = psub.add_parser("eval", help="evaluate P_a f at points")
    _common(ev)
    ev.add_argument("--data", default="kinv", help="boundary data: one, kinv or gaussian")
    ev.add_argument("--point", action="append", help="comma-separated coordinates")
    ev.add_argument("--points", metavar="CSV", help="evaluation CSV with coordinate columns")
    ev.set_defaults(func=cmd_eval)

    sw = sub.add_parser("sweep", help="run suites over a grid of a values")
    _common(sw)
    grp = sw.add_mutually_exclusive_group()
    grp.add_argument("--a-values", help="comma-separated a values")
    grp.add_argument("--a-range", nargs=3, metavar=("LO", "HI", "STEPS"))
    sw.add_argument("--suite", action="append")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--grid", type=float)
    sw.add_argument("--box", type=float)
    sw.set_defaults(func=cmd_sweep)

    j = sub.add_parser("juhl", help="print a Juhl operator tree")
    _common(j, field=False)
    j.add_argument("--k", type=int, default=1, help="order")
    j.add_argument("--expand", action="store_true", help="also print the expanded words")
    j.set_defaults(func=cmd_juhl)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.file_config = read_config(args.config) if args.config else {}
        return args.func(args)
    except (ConfigError, ParameterRangeError) as exc:
        print(f"veritool: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
