"""Command-line experiment runner.

Every subcommand writes CSV files into the output directory (``--out``,
else ``$PLAPLACE_OUT``, else ``./results``).  Options may also come from a
``key = value`` file given with ``--config``; values in the file win over
flags, with a warning.

Exit codes: 0 converged, 2 configuration error, 3 divergence guard tripped,
4 iteration limit reached, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import experiments
from .grid import make_grid, sample, write_csv
from .problem import Problem
from .reference import boundary_function, exact_solution
from .solvers import SolverConfig, solve
from .stencil import POINTS_TO_LEVEL

log = logging.getLogger("plaplace")

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_MAX_ITERS, EXIT_IO = 0, 2, 3, 4, 5
OUT_ENV = "PLAPLACE_OUT"
MAX_N = 4097


class ConfigError(ValueError):
    def __init__(self, key, msg):
        super().__init__(f"{key}: {msg}")
        self.key = key


# ---------------------------------------------------------------------------
# value parsing

def _number(s: str) -> float:
    s = s.strip()
    if s.lower() in ("inf", "infinity"):
        return math.inf
    return float(Fraction(s)) if "/" in s else float(s)


def _list(s, conv, sep=","):
    if isinstance(s, (list, tuple)):
        return list(s)
    return [conv(t) for t in str(s).split(sep) if t.strip()]


def _alphas(s):
    if str(s).strip() == "dyadic":
        return [2.0 ** -k for k in range(1, 19)] + [0.0]
    return _list(s, _number)


CONVERTERS = {
    "n": lambda s: _list(s, int),
    "p": lambda s: _list(s, _number),
    "alpha": _alphas,
    "stencil": int,
    "levels": lambda s: _list(s, int),
    "h": lambda s: _list(s, _number),
    "point": lambda s: _list(s, _number),
    "boundary": lambda s: _list(s, str.strip, ";"),
    "exact": lambda s: _list(s, str.strip),
    "tol": _number,
    "max_iters": int,
    "rhs": _number,
    "method": str,
    "init": str,
    "stop": str,
    "name": str,
    "out": str,
}


def _add_common(sp, *keys):
    if "n" in keys:
        sp.add_argument("--n", default="129", help="grid nodes per side; comma list")
    if "stencil" in keys:
        sp.add_argument("--stencil", default="17", help="5, 9 or 17 points")
    if "p" in keys:
        sp.add_argument("--p", default="inf", help="p in [2, inf]; comma list")
    if "solver" in keys:
        sp.add_argument("--method", default="semi-implicit",
                        help="explicit, semi-implicit (sweep also accepts both)")
        sp.add_argument("--tol", default="1e-6")
        sp.add_argument("--max-iters", dest="max_iters", default="1000")
        sp.add_argument("--init", default="harmonic", help="harmonic or zero")
        sp.add_argument("--stop", default="change", help="change or estimate")
    sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./results)")
    sp.add_argument("--name", default=None, help="prefix for output files")
    sp.add_argument("--config", default=None, help="key = value file; its values win over flags")
    sp.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plaplace", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve Delta_p u = g and write the field and report")
    _add_common(sp, "n", "stencil", "p", "solver")
    sp.add_argument("--boundary", default="aronsson",
                    help="boundary data name[:c=..]; several separated by ';'")
    sp.add_argument("--exact", default=None, help="exact solution for the error history")
    sp.add_argument("--rhs", default="0", help="constant right-hand side g")

    sp = sub.add_parser("sweep", help="error-vs-iteration sweeps over n, or the rate sweep over alpha")
    _add_common(sp, "n", "stencil", "p", "solver")
    sp.add_argument("--exact", default="aronsson", help="exact solution(s), comma list")
    sp.add_argument("--alpha", default=None,
                    help="alpha = 1/p values (comma list, or dyadic for 1/2, 1/4, ..., 2^-18, 0); selects the rate sweep")

    sp = sub.add_parser("consistency", help="operator error at a point against h and stencil")
    _add_common(sp)
    sp.add_argument("--point", default="0.5,0.25")
    sp.add_argument("--h", default="1/32,1/64,1/128")
    sp.add_argument("--levels", default="1,2,3")

    sp = sub.add_parser("failure-demo", help="centred-difference scheme with Aronsson data")
    _add_common(sp, "n")
    sp.set_defaults(n="201")
    sp.add_argument("--boundary", default="aronsson")
    sp.add_argument("--tol", default="1e-8")
    sp.add_argument("--max-iters", dest="max_iters", default="5000")

    sp = sub.add_parser("contraction-model", help="linear-model contraction factor against n")
    _add_common(sp, "n")
    sp.set_defaults(n="4,8,16,32,64,128,256,512,1024,1025")

    return ap


# ---------------------------------------------------------------------------
# config files

def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}", f"expected key = value, got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    if not args.config:
        return args
    try:
        cfg = read_config(args.config)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
    command = cfg.pop("command", args.command)
    if command != args.command:
        raise ConfigError("command", f"file is for {command!r}, not {args.command!r}")
    defaults = vars(parser.parse_args([args.command]))
    for k, v in cfg.items():
        if k not in vars(args) or k in ("config", "command", "verbose"):
            raise ConfigError(k, f"unknown key for {args.command}")
        cur = getattr(args, k)
        if cur is not None and cur != defaults.get(k) and str(cur) != v:
            log.warning("config file overrides --%s=%s with %s", k.replace("_", "-"), cur, v)
        setattr(args, k, v)
    return args


def resolve(args: argparse.Namespace) -> dict:
    """Convert and validate every option; nothing is allocated yet."""
    cfg = {}
    for k, v in vars(args).items():
        if k in ("command", "config", "verbose") or v is None:
            cfg[k] = v
            continue
        conv = CONVERTERS.get(k, str)
        try:
            cfg[k] = conv(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(k, f"cannot parse {v!r} ({exc})") from None

    for n in cfg.get("n") or []:
        if not 3 <= n <= MAX_N:
            raise ConfigError("n", f"{n} outside [3, {MAX_N}]")
    if "stencil" in cfg:
        if cfg["stencil"] not in POINTS_TO_LEVEL:
            raise ConfigError("stencil", f"{cfg['stencil']} is not one of 5, 9, 17")
        cfg["level"] = POINTS_TO_LEVEL[cfg["stencil"]]
    for p in cfg.get("p") or []:
        if not p >= 2:
            raise ConfigError("p", f"{p} outside [2, inf]")
    for a in cfg.get("alpha") or []:
        if not 0 <= a <= 0.5:
            raise ConfigError("alpha", f"{a} outside [0, 1/2]")
    if "tol" in cfg and not cfg["tol"] > 0:
        raise ConfigError("tol", "must be positive")
    if "max_iters" in cfg and cfg["max_iters"] < 1:
        raise ConfigError("max_iters", "must be at least 1")
    method = cfg.get("method")
    if method is not None:
        allowed = ("explicit", "semi-implicit") + (("both",) if args.command == "sweep" else ())
        if method not in allowed:
            raise ConfigError("method", f"{method!r} not in {allowed}")
    if cfg.get("init") not in (None, "harmonic", "zero"):
        raise ConfigError("init", f"{cfg['init']!r} not harmonic or zero")
    if cfg.get("stop") not in (None, "change", "estimate"):
        raise ConfigError("stop", f"{cfg['stop']!r} not change or estimate")
    for key in ("boundary", "exact"):
        names = cfg.get(key)
        if names is None:
            continue
        for name in names if isinstance(names, list) else [names]:
            try:
                boundary_function(name)
            except (KeyError, ValueError) as exc:
                raise ConfigError(key, str(exc).strip('"')) from None
    if args.command == "consistency":
        if len(cfg["point"]) != 2:
            raise ConfigError("point", "expected x,y")
        if any(not h > 0 for h in cfg["h"]):
            raise ConfigError("h", "must be positive")
        if any(lv not in (1, 2, 3) for lv in cfg["levels"]):
            raise ConfigError("levels", "levels are 1, 2, 3")
    out = cfg.get("out") or os.environ.get(OUT_ENV) or "results"
    cfg["out"] = Path(out)
    return cfg


# ---------------------------------------------------------------------------
# subcommands; each returns an exit code

def _tag(p) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


def _status_code(statuses) -> int:
    if "diverged" in statuses:
        return EXIT_DIVERGED
    if "max_iters" in statuses:
        return EXIT_MAX_ITERS
    return EXIT_OK


def _solver_config(cfg, method) -> SolverConfig:
    return SolverConfig(method=method, tol=cfg["tol"], max_iters=cfg["max_iters"],
                        init=cfg["init"], stop=cfg["stop"])


def cmd_solve(cfg) -> int:
    statuses = []
    prefix = cfg["name"] or "solve"
    for n in cfg["n"]:
        grid = make_grid(experiments.SQUARE, n)
        for p in cfg["p"]:
            for bspec in cfg["boundary"]:
                problem = Problem(grid, p, boundary_function(bspec), rhs=cfg["rhs"],
                                  level=cfg["level"], name=bspec)
                exact = sample(exact_solution(cfg["exact"][0]), grid) if cfg["exact"] else None
                u, report = solve(problem, _solver_config(cfg, cfg["method"]), exact=exact)
                stem = f"{prefix}_n{n}_p{_tag(p)}_s{cfg['stencil']}_{bspec.replace(':', '_')}"
                write_csv(u, cfg["out"] / f"{stem}_field.csv",
                          comment=f"p={_tag(p)} stencil={cfg['stencil']} boundary={bspec} "
                                  f"method={cfg['method']} status={report.status}")
                report.write_csv(cfg["out"] / f"{stem}_report.csv")
                log.info("%s: %s in %d iterations", stem, report.status, report.iterations)
                statuses.append(report.status)
    return _status_code(statuses)


def cmd_sweep(cfg) -> int:
    if cfg["alpha"] is not None:
        return cmd_rate(cfg)
    methods = ("explicit", "semi-implicit") if cfg["method"] == "both" else (cfg["method"],)
    prefix = cfg["name"] or "sweep"
    statuses = []
    for p in cfg["p"]:
        for ex in cfg["exact"]:
            runs = experiments.iteration_sweep(
                cfg["n"], methods, p=p, boundary=ex, level=cfg["level"], tol=cfg["tol"],
                max_iters=cfg["max_iters"], init=cfg["init"])
            for (method, n), (_, report) in runs.items():
                stem = f"{prefix}_{method}_n{n}_p{_tag(p)}_{ex}"
                report.write_csv(cfg["out"] / f"{stem}.csv")
                statuses.append(report.status)
    return _status_code(statuses)


def cmd_rate(cfg) -> int:
    prefix = cfg["name"] or "rate"
    if len(cfg["n"]) != 1:
        raise ConfigError("n", "the rate sweep takes a single n")
    fits, (slope, intercept), hist = experiments.rate_sweep(
        cfg["alpha"], n=cfg["n"][0], boundary=cfg["exact"][0], level=cfg["level"],
        tol=cfg["tol"], max_iters=cfg["max_iters"])
    with open(cfg["out"] / f"{prefix}_fits.csv", "w", newline="") as fh:
        fh.write(f"# ratefit-v1 n={cfg['n'][0]} slope={slope!r} intercept={intercept!r}\n")
        w = csv.writer(fh)
        w.writerow(["alpha", "mu", "fit_residual", "first", "last", "floor", "iterations", "status"])
        for f in fits:
            rep = hist[f.alpha][1]
            w.writerow([repr(f.alpha), repr(f.mu), repr(f.residual), f.first, f.last,
                        int(f.floor), rep.iterations, rep.status])
    with open(cfg["out"] / f"{prefix}_histories.csv", "w", newline="") as fh:
        fh.write("# ratehistory-v1 error is max |u^N - u_limit|\n")
        w = csv.writer(fh)
        w.writerow(["alpha", "iter", "error_max"])
        for a, (errs, _) in hist.items():
            for k, e in enumerate(errs, 1):
                w.writerow([repr(a), k, repr(e)])
    print(f"mu(alpha) = {slope:.4f} alpha + {intercept:.5f}")
    return EXIT_OK


def cmd_consistency(cfg) -> int:
    # u = x + xy: Delta_inf u = 2 u_x u_y u_xy / |grad u|**2
    x0, y0 = cfg["point"]
    ux, uy = 1.0 + y0, x0
    exact = 2.0 * ux * uy / (ux * ux + uy * uy)
    rows = experiments.consistency_study(lambda x, y: x + x * y, exact, (x0, y0),
                                         levels=cfg["levels"], hs=cfg["h"])
    prefix = cfg["name"] or "consistency"
    with open(cfg["out"] / f"{prefix}.csv", "w", newline="") as fh:
        fh.write(f"# consistency-v1 u=x+xy point=({x0!r},{y0!r}) exact={exact!r}\n")
        w = csv.DictWriter(fh, fieldnames=["level", "h", "dtheta", "value", "error"])
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return EXIT_OK


def cmd_failure(cfg) -> int:
    prefix = cfg["name"] or "failure"
    code = EXIT_OK
    for n in cfg["n"]:
        demo = experiments.failure_demo(n, cfg["boundary"][0], cfg["tol"], cfg["max_iters"])
        write_csv(demo.field, cfg["out"] / f"{prefix}_n{n}_field.csv",
                  comment=f"centred scheme boundary={cfg['boundary'][0]}")
        with open(cfg["out"] / f"{prefix}_n{n}_summary.csv", "w", newline="") as fh:
            fh.write("# failure-v1 distances over |x|,|y| <= 1/2\n")
            w = csv.writer(fh)
            w.writerow(["n", "dist_cone_diff", "dist_aronsson", "cone_residual", "iterations", "delta"])
            w.writerow([n, repr(demo.dist_cone), repr(demo.dist_aronsson),
                        repr(demo.cone_residual), demo.iterations, repr(demo.delta)])
        print(f"n={n}: distance to |x|-|y| {demo.dist_cone:.4g}, to aronsson {demo.dist_aronsson:.4g}")
        if demo.delta > cfg["tol"]:
            code = EXIT_MAX_ITERS
    return code


def cmd_contraction(cfg) -> int:
    prefix = cfg["name"] or "contraction"
    with open(cfg["out"] / f"{prefix}.csv", "w", newline="") as fh:
        fh.write("# contraction-v1\n")
        w = csv.writer(fh)
        w.writerow(["n", "rate"])
        for n, r in experiments.contraction_table(cfg["n"]):
            w.writerow([n, repr(r)])
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "consistency": cmd_consistency,
    "failure-demo": cmd_failure,
    "contraction-model": cmd_contraction,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = merge_config(args, parser)
        cfg = resolve(args)
    except ConfigError as exc:
        print(f"plaplace: config error in {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg["out"].mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"plaplace: config error in {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"plaplace: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
