"""Command-line front end: ``rescount <command> [options]``.

Exit codes: 0 success, 1 check failed, 2 numerical failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bound as bnd
from . import counting as cnt
from . import io
from . import model as mdl
from .config import ConfigError, RunConfig, parse_complex, parse_grid
from .errors import RescountError
from .geometry import StripIndex
from .modes import ModeIndex
from .zeros import zero_positions

EXIT_OK, EXIT_FAIL, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.output_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _report(obj):
    print(io.dumps(obj))


def _check(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
    return bool(ok)


# --- commands -------------------------------------------------------------------

def cmd_constants(cfg: RunConfig, args) -> int:
    rep = cnt.c_d(cfg.d, cfg.quad_tol)
    thetas = np.asarray(cfg.theta_grid)
    out = {
        "d": cfg.d,
        "cd_boundary": rep.boundary,
        "cd_double": rep.double,
        "rel_diff": rep.rel_diff,
        "agreement_ok": rep.ok,
        "weyl_coefficient": cnt.weyl_coefficient(cfg.d),
        "h_d": {"theta": thetas, "value": [cnt.h_d(t, cfg.d, cfg.quad_tol) for t in thetas]},
        "dim_harmonics": [cnt.dim_harmonics(l, cfg.d) for l in range(51)],
        "config": cfg.as_dict(),
    }
    io.write_json(_out(cfg) / "constants.json", out)
    _report(out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def _fit_or_none(table, min_span):
    try:
        return cnt.fit_residual_exponent(table, min_span=min_span)
    except cnt.DegenerateFitError:
        return None


def cmd_weyl(cfg: RunConfig, args) -> int:
    table = cnt.weyl_table(cfg.r_grid, cfg.d, cache_dir=cfg.cache_dir)
    out = _out(cfg)
    io.write_csv(out / "weyl.csv", "counting", _table_columns(table), cfg.as_dict())
    fit = _fit_or_none(table, args.min_span)
    io.save_residual_plot(out / "weyl.svg", table.r, table.residual, "Weyl residual", fit)
    ok = fit is None or fit.exponent <= cfg.d - 1 + 0.15
    _report({"fit": fit.as_dict() if fit else None, "ok": ok})
    return EXIT_OK if ok else EXIT_FAIL


def _table_columns(table):
    return {"r": table.r, "count": table.count, "leading": table.leading, "residual": table.residual}


def cmd_resonances(cfg: RunConfig, args) -> int:
    r_max = max(cfg.r_grid)
    rows = {k: [] for k in ("d", "l", "nu", "k", "re_z", "im_z", "re_pole", "im_pole", "mult")}
    for l in range(int(np.floor(2 * r_max)) + 1):
        mode = ModeIndex(cfg.d, l)
        ks, _, z = mdl.mode_resonances(mode, r_max, cfg.sigma, cfg.c)
        pole = -mode.nu * z
        mult = cnt.dim_harmonics(l, cfg.d)
        for k, zz, p in zip(ks, z, pole):
            for key, v in (("d", cfg.d), ("l", l), ("nu", mode.nu), ("k", int(k)), ("re_z", zz.real),
                           ("im_z", zz.imag), ("re_pole", p.real), ("im_pole", p.imag), ("mult", mult)):
                rows[key].append(v)
    out = _out(cfg)
    io.write_csv(out / "resonances.csv", "resonances", rows, cfg.as_dict())
    poles = np.array(rows["re_pole"]) + 1j * np.array(rows["im_pole"])
    io.save_scatter(out / "resonances.svg", poles, np.sign(np.array(rows["k"]) - 0.5),
                    f"model poles, r <= {r_max:g}")
    _report({"poles": len(poles), "r_max": r_max})
    return EXIT_OK


def cmd_count(cfg: RunConfig, args) -> int:
    table = cnt.model_table(cfg.r_grid, cfg.d, cfg.sigma, cfg.c, workers=args.workers)
    out = _out(cfg)
    cols = _table_columns(table)
    cols.update(table.extra)
    io.write_csv(out / "count.csv", "counting", cols, cfg.as_dict())
    fit = _fit_or_none(table, args.min_span)
    io.write_json(out / "count_fit.json", fit.as_dict() if fit else {"below_noise": True})
    io.save_residual_plot(out / "count.svg", table.r, table.residual, "model count residual", fit)
    ok = fit is None or fit.exponent <= cfg.d - 0.6
    _report({"fit": fit.as_dict() if fit else None, "ok": ok})
    return EXIT_OK if ok else EXIT_FAIL


def bound_spread(report: bnd.BoundReport) -> float:
    """Relative spread across r of the per-r maximum normalized excess."""
    _, sup = report.sup_over_theta()
    return float((sup.max() - sup.min()) / sup.max())


def cmd_bound(cfg: RunConfig, args) -> int:
    if max(cfg.theta_grid) > np.pi / 2 or min(cfg.theta_grid) < 0:
        raise ConfigError("bound needs theta_grid inside [0, pi/2]")
    rep = bnd.bound_report(cfg.r_grid, cfg.theta_grid, cfg.d, cfg.A_plumb, quad_tol=1e-8)
    io.write_csv(_out(cfg) / "bound.csv", "stefanov", rep.columns(), cfg.as_dict())
    spread = bound_spread(rep)
    ok = bool(np.all(np.isfinite(rep.sum)) and spread < 0.2)
    _report({"spread": spread, "max_excess": float(rep.correction_fit.max()), "ok": ok})
    return EXIT_OK if ok else EXIT_FAIL


def _load_table(path, d):
    name, meta, cols = io.read_csv(path)
    if name != "counting":
        raise ConfigError(f"{path} is not a counting table")
    lead = cols["leading"]
    return cnt.CountingTable(cols["r"], cols["count"], lead, metadata={"d": meta.get("d", d), **meta})


def cmd_smooth(cfg: RunConfig, args) -> int:
    d = cfg.d
    if args.table:
        table = _load_table(args.table, d)
        d = int(table.metadata.get("d", d))
        source = str(args.table)
    else:
        p = d - args.delta
        r = np.geomspace(10, 1000, 16)
        table = cnt.CountingTable.from_function(lambda t: t ** d + t ** p, r, 1.0, d)
        source = f"synthetic t^{d} + t^{p:g}"
    N_fit, n_fit = cnt.smooth_exponent_transfer(table, args.delta, min_span=args.min_span)
    limit = d - args.delta / 2
    ok = n_fit.amplitude == 0 or n_fit.exponent <= limit + 0.1
    out = {"source": source, "delta": args.delta, "N_fit": N_fit.as_dict(), "n_fit": n_fit.as_dict(),
           "n_exponent_limit": limit, "ok": ok}
    io.write_json(_out(cfg) / "smooth.json", out)
    _report(out)
    return EXIT_OK if ok else EXIT_FAIL


# --- self tests -------------------------------------------------------------------

def _selftest(command: str, cfg: RunConfig) -> int:
    checks = []
    if command == "constants":
        checks.append(_check("dim H_2 (d=3) = 5", cnt.dim_harmonics(2, 3) == 5))
        checks.append(_check("h_d(0) = 0", cnt.h_d(0.0, cfg.d) == 0))
        checks.append(_check("vol B^3 = 4 pi/3", abs(cnt.vol_ball(3) - 4 * np.pi / 3) < 1e-14))
    elif command == "weyl":
        x = zero_positions(0.5, 10.0)
        checks.append(_check("zeros of J_1/2 are k pi", np.allclose(x, np.pi * np.arange(1, 4), atol=1e-10)))
    elif command == "resonances":
        s = StripIndex(nu=100.5, k=3)
        res = mdl.solve_rho(s)
        checks.append(_check("F vanishes at the solved root", abs(mdl.F(s, res.rho)) < 1e-10))
        checks.append(_check("n_plus = 0 for l >= 2r", mdl.n_plus(ModeIndex(3, 20), 10.0) == 0))
    elif command == "count":
        r = np.geomspace(10, 1000, 12)
        fit = cnt.fit_power(r, r ** 2)
        checks.append(_check("exact r^2 residual gives exponent 2", abs(fit.exponent - 2) < 1e-10))
    elif command == "bound":
        c1 = bnd.BoundConfig(r=20.0, theta=0.5)
        checks.append(_check("I_l over an empty interval is 0", bnd.i_l(20.0, 1.1, 1.1, 2.5) == 0))
        lo = bnd.stefanov_sum(c1)
        hi = bnd.stefanov_sum(bnd.BoundConfig(r=20.0, theta=0.5, A_plumb=10.0))
        checks.append(_check("sum is monotone in A_plumb", hi > lo))
    elif command == "smooth":
        t = cnt.CountingTable(np.array([np.e]), np.array([2]), np.array([0.0]), metadata={"d": 3},
                              moduli=np.array([1.0]), weights=np.array([1.0]))
        checks.append(_check("one pole at 1, r = e gives N = 1",
                             abs(cnt.integrate_count(t).count[0] - 1) < 1e-14))
        r = np.geomspace(10, 1000, 12)
        N_fit, n_fit = cnt.smooth_exponent_transfer(
            cnt.CountingTable.from_function(lambda x: x ** 3, r, 1.0, 3), 0.75)
        checks.append(_check("exact power has no residual", N_fit.amplitude == 0 and n_fit.amplitude == 0))
    return EXIT_OK if all(checks) else EXIT_FAIL


# --- entry point -------------------------------------------------------------------

COMMANDS = {
    "constants": cmd_constants,
    "weyl": cmd_weyl,
    "resonances": cmd_resonances,
    "count": cmd_count,
    "bound": cmd_bound,
    "smooth": cmd_smooth,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--d", type=int)
    common.add_argument("--sigma", type=str)
    common.add_argument("--c", type=float)
    common.add_argument("--k0", type=int)
    common.add_argument("--quad-tol", type=float)
    common.add_argument("--r-grid", type=str, help="comma list or start:stop:step")
    common.add_argument("--theta-grid", type=str, help="comma list or start:stop:step")
    common.add_argument("--theta", type=float, help="single angle (shorthand for --theta-grid)")
    common.add_argument("--cache-dir", type=str)
    common.add_argument("--out", type=str, help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--min-span", type=float, default=8.0,
                        help="smallest r_max/r_min accepted by exponent fits")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--selftest", action="store_true", help="run the quick built-in checks only")

    parser = _Parser(prog="rescount", description="Resonance counting experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "smooth":
            p.add_argument("table", nargs="?", help="counting CSV; a synthetic table if omitted")
            p.add_argument("--delta", type=float, default=0.75)
    return parser


def _config_from_args(args) -> RunConfig:
    theta_grid = args.theta_grid
    if args.theta is not None:
        theta_grid = [args.theta]
    overrides = {
        "d": args.d,
        "sigma": parse_complex(args.sigma) if args.sigma is not None else None,
        "c": args.c,
        "k0": args.k0,
        "quad_tol": args.quad_tol,
        "r_grid": parse_grid(args.r_grid) if args.r_grid is not None else None,
        "theta_grid": parse_grid(theta_grid) if theta_grid is not None else None,
        "cache_dir": args.cache_dir,
        "output_dir": args.out,
        "seed": args.seed,
    }
    return RunConfig.load(args.config, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.selftest:
            return _selftest(args.command, cfg)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except RescountError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("last", "residual"):
            if getattr(exc, attr, None) is not None:
                diag[attr] = io.jsonable(getattr(exc, attr))
        print(io.dumps(diag), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
