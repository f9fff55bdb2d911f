"""Command-line entry point: ``slp <subcommand>``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .adapt import LepskiConfig, beta_mle, lepski_select, plugin_fit, split_halves
from .config import PRESETS, Config, describe_defaults, load_config
from .errors import ConfigError, NumericalError
from .estimators import EstimatorConfig, Sample, fit_curve
from .output import emit_csv, emit_plot, read_csv
from .rates import classify_region, sar, tlr
from .simharness import ExperimentConfig, run_rules
from .spread import SpreadContext, solve_spread

SEED_ENV = "SLP_SEED"


def rule_label(rule: str) -> str:
    return f"SSR-{rule[-1]}"


def resolve_seed(flag: Optional[int], config_seed: int) -> int:
    """--seed beats the SLP_SEED variable, which beats the config file."""
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return config_seed


def _out(args, name: str) -> str:
    os.makedirs(args.output_dir, exist_ok=True)
    return os.path.join(args.output_dir, name)


def read_sample(path: str) -> Sample:
    """Rows x, y, origin with origin 'source' or 'target'."""
    try:
        header, rows = read_csv(path)
    except OSError as exc:
        raise ConfigError(f"cannot read input {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cols = {name.strip(): i for i, name in enumerate(header)}
    missing = [c for c in ("x", "y", "origin") if c not in cols]
    if missing:
        raise ConfigError(f"{path}: missing columns {missing}")
    try:
        data = [(float(r[cols["x"]]), float(r[cols["y"]]), r[cols["origin"]].strip()) for r in rows if r]
        return Sample.from_rows(data)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _ctx(cfg: Config, n: int, n_T: int, beta: float) -> SpreadContext:
    try:
        return SpreadContext(n, n_T, beta, cfg.density("source"), cfg.density("target"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_spread(args, cfg: Config) -> int:
    sec = cfg["spread"]
    k = args.x_grid if args.x_grid is not None else sec["grid_size"]
    if k < 2:
        raise ConfigError("--x-grid must be at least 2")
    ctx = _ctx(cfg, sec["n"], sec["n_T"], sec["beta"])
    x = np.linspace(0.0, 1.0, k)
    t = solve_spread(ctx, x, tol=sec["tol"])
    path = emit_csv(({"x": a, "t": b} for a, b in zip(x.tolist(), t.tolist())), ("x", "t"), _out(args, "spread.csv"))
    print(f"wrote {path}")
    return 0


def _estimator_config(sec) -> EstimatorConfig:
    try:
        return EstimatorConfig(
            beta=sec["beta"],
            kappa=sec["kappa"],
            c_bandwidth=sec["c_bandwidth"],
            order_l=sec["order_l"],
            sigma_bar=sec["sigma_bar"],
            T1=sec["T1"],
        )
    except ValueError as exc:
        raise ConfigError(f"[estimate] {exc}") from exc


def cmd_estimate(args, cfg: Config) -> int:
    sec = cfg["estimate"]
    s = read_sample(args.input)
    ecfg = _estimator_config(sec)
    grid = np.linspace(0.0, 1.0, sec["grid_size"])
    if sec["gate"] == "plugin":
        fit = plugin_fit(grid, s, ecfg, (sec["a_lo"], sec["a_hi"]), sec["mode"])
        curve = fit.curve
        print(f"source Beta({fit.source.a1:.6g}, {fit.source.a2:.6g})  target Beta({fit.target.a1:.6g}, {fit.target.a2:.6g})")
    else:
        if s.n + s.n_T == 0:
            raise ConfigError(f"{args.input}: no rows")
        curve = fit_curve(grid, s, _ctx(cfg, s.n, s.n_T, ecfg.beta), ecfg, sec["mode"])
    path = emit_csv(
        ({"x": a, "fhat": b} for a, b in zip(grid.tolist(), curve.tolist())), ("x", "fhat"), _out(args, "estimate.csv")
    )
    print(f"wrote {path}")
    return 0


def _rate_row(n, n_T, a, beta, consts):
    r = tlr(n, n_T, a, beta, consts)
    return {
        "n": n,
        "n_T": n_T,
        "region": r.region,
        "rate": r.rate_value,
        "sar": sar(n, n_T, a, beta, consts),
        "slp": r.slp,
        "p": r.p,
        "q": r.q,
        "r": r.r,
        "s": r.s,
    }


RATE_COLUMNS = ("n", "n_T", "region", "rate", "sar", "slp", "p", "q", "r", "s")


def cmd_rate(args, cfg: Config) -> int:
    sec = cfg["rate"]
    a, beta, consts = sec["a"], sec["beta"], sec["consts"]
    if sec["n"] + sec["n_T"] < 1:
        raise ConfigError("[rate] n + n_T must be at least 1")
    row = _rate_row(sec["n"], sec["n_T"], a, beta, consts)
    res = tlr(sec["n"], sec["n_T"], a, beta, consts)
    print(f"region = {row['region']}")
    print(f"exponents = n^-{row['p']:.6g} n_T^-{row['q']:.6g} (n_T/n)^{row['r']:.6g} (n+n_T)^-{row['s']:.6g}")
    print(f"rate = {row['rate']:.12g}")
    print(f"sar = {row['sar']:.12g}")
    print(f"slp = {'yes' if row['slp'] else 'no'}")
    if res.log_factor:
        print("note = extra log n factor at a = 2 + 1/(2 beta)")
    if args.sweep:
        rows = [_rate_row(n, m, a, beta, consts) for n in sec["sweep_n"] for m in sec["sweep_nT"]]
        print(f"wrote {emit_csv(rows, RATE_COLUMNS, _out(args, 'rate_sweep.csv'))}")
    if args.pairs:
        print(f"wrote {check_pairs(args.pairs, a, beta, consts, _out(args, 'rate_check.csv'))}")
    return 0


def check_pairs(path: str, a: float, beta: float, consts, out_path: str) -> str:
    """Compare (n, n_T) rows of a series file against the closed-form region and SAR."""
    try:
        header, rows = read_csv(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    cols = {name: i for i, name in enumerate(header)}
    if "n" not in cols or "n_T" not in cols:
        raise ConfigError(f"{path}: needs columns n and n_T")
    out = []
    for r in rows:
        if not r:
            continue
        n, n_T = float(r[cols["n"]]), float(r[cols["n_T"]])
        region = classify_region(n, n_T, a, beta, consts)
        rec = {"n": int(n), "n_T": int(n_T), "region": region, "log_sar_theory": math.log(sar(n, n_T, a, beta, consts))}
        rec["log_sar_observed"] = float(r[cols["log_sar"]]) if "log_sar" in cols else float("nan")
        rec["region_match"] = (r[cols["region"]] == region) if "region" in cols else True
        out.append(rec)
    schema = ("n", "n_T", "region", "log_sar_theory", "log_sar_observed", "region_match")
    return emit_csv(out, schema, out_path)


def cmd_adapt(args, cfg: Config) -> int:
    sec = cfg["adapt"]
    s = read_sample(args.input)
    first, _ = split_halves(s)
    bounds = (sec["a_lo"], sec["a_hi"])
    row = {}
    for role, pop in (("source", first.source_only()), ("target", first.target_only())):
        if len(pop) >= 2:
            a1, a2 = beta_mle(pop.x, bounds)
        else:
            a1 = a2 = float("nan")
        row[f"{role}_a1"], row[f"{role}_a2"] = a1, a2
    try:
        lcfg = LepskiConfig(
            beta_lo=sec["beta_lo"],
            beta_hi=sec["beta_hi"],
            kappa=sec["kappa"],
            trim=sec["trim"],
            c_sel=sec["c_sel"],
            c_shrink=sec["c_shrink"],
            eval_grid_size=sec["eval_grid_size"],
        )
    except ValueError as exc:
        raise ConfigError(f"[adapt] {exc}") from exc
    try:
        res = lepski_select(first, lcfg)
    except ValueError as exc:
        raise ConfigError(f"{args.input}: {exc}") from exc
    row.update(beta_hat=res.beta_hat, tau_hat=res.tau_hat, tau_low=res.tau_low, tau_star=res.tau_star)
    for key, value in row.items():
        print(f"{key} = {value:.12g}" if isinstance(value, float) else f"{key} = {value}")
    print(f"wrote {emit_csv([row], tuple(row), _out(args, 'adapt.csv'))}")
    return 0


CELL_COLUMNS = ("n", "n_T", "rep", "L_source", "L_target", "L_pool")
SERIES_COLUMNS = ("n", "n_T", "log_n", "log_sar", "region")


def experiment_from_config(cfg: Config, preset: str, seed: int) -> ExperimentConfig:
    sec = cfg["simulate"]
    n_list, reps = PRESETS[preset]
    try:
        return ExperimentConfig(
            a=sec["a"],
            beta=sec["beta"],
            n_list=sec["n_list"] or n_list,
            c4_sl=sec["c4_sl"],
            c4_tl=sec["c4_tl"],
            rule_consts=sec["rule_consts"],
            f_id=sec["f_id"],
            sigma=sec["sigma"],
            c_bandwidth=sec["c_bandwidth"],
            grid_N=sec["grid_N"],
            replications=sec["replications"] or reps,
            base_seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"[simulate] {exc}") from exc


def cmd_simulate(args, cfg: Config) -> int:
    sec = cfg["simulate"]
    seed = resolve_seed(args.seed, sec["seed"])
    base = experiment_from_config(cfg, args.preset, seed)
    workers = args.workers if args.workers is not None else sec["workers"]
    runs = run_rules(base, sec["rules"], workers)
    slopes = []
    for rule, run in runs.items():
        label = rule_label(rule)
        emit_csv(
            ({k: getattr(c, k) for k in CELL_COLUMNS} for c in run.cells), CELL_COLUMNS, _out(args, f"cells_{label}.csv")
        )
        emit_csv(
            ({k: getattr(p, k) for k in SERIES_COLUMNS} for p in run.series),
            SERIES_COLUMNS,
            _out(args, f"series_{label}.csv"),
        )
        slopes.append(
            {"rule": label, "slope": run.slope, "intercept": run.intercept, "theory_slope": run.cfg.theory_slope()}
        )
        print(f"{label}: slope {run.slope:.4f} (theory {run.cfg.theory_slope():.4f})")
    emit_csv(slopes, ("rule", "slope", "intercept", "theory_slope"), _out(args, "slopes.csv"))
    series = {rule_label(r): [(p.n, p.log_sar) for p in run.series] for r, run in runs.items()}
    title = f"a = {base.a:g}, beta = {base.beta:g}, {base.f_id}"
    emit_plot(series, _out(args, "log_sar.svg"), title=title)
    print(f"wrote outputs to {args.output_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="sectioned key = value config file (defaults apply when omitted)")
    common.add_argument("--output-dir", default=".", help="directory for output files (default: .)")
    common.add_argument("--seed", type=int, help=f"base seed; overrides {SEED_ENV} and the config file")

    parser = argparse.ArgumentParser(
        prog="slp",
        description="Spread-function bandwidths, pooled regression estimators and transfer-learning rates.",
        epilog=describe_defaults(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spread", parents=[common], help="tabulate t_n(x) on an equispaced grid")
    p.add_argument("--x-grid", type=int, help="number of grid points on [0, 1] (default: [spread] grid_size)")
    p.set_defaults(func=cmd_spread)

    p = sub.add_parser("estimate", parents=[common], help="fit f on a grid from a sample CSV (x, y, origin)")
    p.add_argument("--input", required=True, help="CSV with columns x, y, origin")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("rate", parents=[common], help="closed-form rate, region, SAR and SLP flag")
    p.add_argument("--sweep", action="store_true", help="also write rate_sweep.csv over the configured grid")
    p.add_argument("--pairs", help="series CSV with n, n_T columns to cross-check against theory")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("adapt", parents=[common], help="Beta MLE per population and Lepski smoothness estimate")
    p.add_argument("--input", required=True, help="CSV with columns x, y, origin")
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo log-SAR series for the SSR rules")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk", help="desk (default) or paper scale")
    p.add_argument("--workers", type=int, help="worker processes (default: [simulate] workers)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"slp: config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"slp: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
