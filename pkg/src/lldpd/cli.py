"""Command-line entry point: fit, test, simulate, report, plot.

Every output file is written atomically and accompanied by a sidecar
manifest (`<output>.manifest.txt`) of key=value lines recording the command,
its configuration, the master seed where applicable, artifact paths, and
wall time.  All numeric CSV output round-trips at printed precision.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .asymptotics import DEFAULT_REPORT_GRID, discrepancy_report, report_to_csv
from .estimation import ConstraintSpec, ConvergenceError, fit_mdpde, fit_restricted
from .model import ModelParams
from .outcome import TestOutcome
from .rao import rao_composite, rao_simple_alpha, rao_simple_beta, rao_simple_full
from .simulation import RejectionTable, SimulationConfig, run_level_study, run_power_study
from .svg import line_chart
from .wald import wald_composite, wald_simple_alpha, wald_simple_beta, wald_simple_full

__all__ = ["main", "entry"]


class CliError(Exception):
    """User-facing failure; printed to stderr with a nonzero exit."""


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_manifest(out_path: str, command: str, config: dict, artifacts, started: float) -> None:
    lines = [f"command={command}"]
    for key in config:
        lines.append(f"{key}={config[key]}")
    for art in artifacts:
        lines.append(f"artifact={art}")
    lines.append(f"wall_time_seconds={time.time() - started:.3f}")
    _atomic_write(out_path + ".manifest.txt", "\n".join(lines) + "\n")


def read_observations(path: str) -> np.ndarray:
    """One positive real per line; `#` starts a comment; blank lines skipped."""
    values = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                try:
                    v = float(line)
                except ValueError:
                    raise CliError(f"{path}:{lineno}: not a number: {line!r}")
                if not np.isfinite(v) or v <= 0.0:
                    raise CliError(f"{path}:{lineno}: observations must be finite and > 0, got {line!r}")
                values.append(v)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    if not values:
        raise CliError(f"{path}: no observations found")
    return np.array(values)


def parse_config(path: str) -> dict:
    """key=value lines; `#` comments; comma lists for grids."""
    out: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    return out


_CONFIG_KEYS = {
    "study",
    "population_alpha",
    "population_beta",
    "null_alpha",
    "known_beta",
    "tau_grid",
    "n_grid",
    "eps_grid",
    "contaminant_scales",
    "replications",
    "significance",
    "master_seed",
}


def _float_list(raw: str, key: str):
    try:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip() != "")
    except ValueError:
        raise CliError(f"config key {key!r}: malformed comma list: {raw!r}")


def build_simulation_config(raw: dict, replications_override=None) -> tuple[SimulationConfig, str]:
    for key in raw:
        if key not in _CONFIG_KEYS:
            raise CliError(f"unknown config key: {key!r}")
    if "master_seed" not in raw:
        raise CliError("config is missing required key 'master_seed' (no silent default)")
    study = raw.get("study", "level")
    if study not in ("level", "power"):
        raise CliError(f"config key 'study' must be 'level' or 'power', got {study!r}")

    def fget(key, default=None):
        if key in raw:
            try:
                return float(raw[key])
            except ValueError:
                raise CliError(f"config key {key!r}: not a number: {raw[key]!r}")
        if default is None:
            raise CliError(f"config is missing required key {key!r}")
        return default

    tau_grid = _float_list(raw["tau_grid"], "tau_grid") if "tau_grid" in raw else None
    if not tau_grid:
        raise CliError("config is missing required key 'tau_grid'")
    n_grid = _float_list(raw["n_grid"], "n_grid") if "n_grid" in raw else None
    if not n_grid:
        raise CliError("config is missing required key 'n_grid'")
    eps_grid = _float_list(raw.get("eps_grid", "0.0"), "eps_grid")
    scales = _float_list(raw.get("contaminant_scales", "3.0"), "contaminant_scales")
    try:
        master_seed = int(raw["master_seed"])
    except ValueError:
        raise CliError(f"config key 'master_seed': not an integer: {raw['master_seed']!r}")
    replications = int(replications_override if replications_override is not None else fget("replications", 2000.0))
    try:
        cfg = SimulationConfig(
            population=ModelParams(fget("population_alpha"), fget("population_beta")),
            null_alpha=fget("null_alpha"),
            known_beta=fget("known_beta"),
            tau_grid=tau_grid,
            n_grid=tuple(int(n) for n in n_grid),
            eps_grid=eps_grid,
            contaminant_scales=scales,
            replications=replications,
            significance=fget("significance", 0.05),
            master_seed=master_seed,
        )
    except ValueError as exc:
        raise CliError(str(exc))
    return cfg, study


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_fit(args) -> int:
    started = time.time()
    x = read_observations(args.input)
    if args.fix_alpha is not None and args.fix_beta is not None:
        raise CliError("--fix-alpha and --fix-beta are mutually exclusive")
    try:
        if args.fix_alpha is not None:
            est = fit_restricted(x, args.tau, ConstraintSpec.fix_alpha(args.fix_alpha))
        elif args.fix_beta is not None:
            est = fit_restricted(x, args.tau, ConstraintSpec.fix_beta(args.fix_beta))
        else:
            est = fit_mdpde(x, args.tau, multistart=args.multistart)
    except (ConvergenceError, ValueError) as exc:
        raise CliError(f"fit failed: {exc}")
    print(f"alpha_hat={est.params.alpha:.10g}")
    print(f"beta_hat={est.params.beta:.10g}")
    print(f"tau={est.tau:.6f}")
    print(f"objective={est.objective_at_opt:.10g}")
    print(f"converged={est.converged}")
    print(f"iterations={est.iterations}")
    print(f"gradient_norm={est.gradient_norm:.3e}")
    if args.out:
        header = "alpha_hat,beta_hat,tau,objective,converged,iterations,gradient_norm"
        row = (
            f"{est.params.alpha:.17g},{est.params.beta:.17g},{est.tau:.6f},"
            f"{est.objective_at_opt:.17g},{int(est.converged)},{est.iterations},{est.gradient_norm:.17g}"
        )
        _atomic_write(args.out, header + "\n" + row + "\n")
        _write_manifest(
            args.out,
            "fit",
            {"input": args.input, "tau": args.tau, "n": x.size,
             "fix_alpha": args.fix_alpha, "fix_beta": args.fix_beta},
            [args.out],
            started,
        )
    return 0


def _parse_null(spec: str) -> dict:
    out: dict = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise CliError(f"bad null spec component {part!r}; expected alpha=... or beta=...")
        key, value = part.split("=", 1)
        key = key.strip()
        if key not in ("alpha", "beta"):
            raise CliError(f"null spec keys must be alpha/beta, got {key!r}")
        if key in out:
            raise CliError(f"duplicate {key!r} in null spec")
        try:
            out[key] = float(value)
        except ValueError:
            raise CliError(f"bad value in null spec: {part!r}")
    if not out:
        raise CliError("empty null spec")
    return out


def _cmd_test(args) -> int:
    started = time.time()
    x = read_observations(args.input)
    null = _parse_null(args.null)
    if args.known_alpha is not None and args.known_beta is not None:
        raise CliError("at most one of --known-alpha/--known-beta may be given")
    wald_family = args.family == "wald"
    try:
        if "alpha" in null and "beta" in null:
            if args.known_alpha is not None or args.known_beta is not None:
                raise CliError("a full two-parameter null leaves nothing known to fix")
            p0 = ModelParams(null["alpha"], null["beta"])
            out = wald_simple_full(x, p0, args.tau) if wald_family else rao_simple_full(x, p0, args.tau)
            kind = "simple-full"
        elif "alpha" in null:
            if args.known_alpha is not None:
                raise CliError("--known-alpha conflicts with a null on alpha")
            if args.known_beta is not None:
                out = (
                    wald_simple_alpha(x, null["alpha"], args.known_beta, args.tau)
                    if wald_family
                    else rao_simple_alpha(x, null["alpha"], args.known_beta, args.tau)
                )
                kind = "simple-alpha"
            else:
                c = ConstraintSpec.fix_alpha(null["alpha"])
                out = wald_composite(x, c, args.tau) if wald_family else rao_composite(x, c, args.tau)
                kind = "composite-alpha"
        else:
            if args.known_beta is not None:
                raise CliError("--known-beta conflicts with a null on beta")
            if args.known_alpha is not None:
                out = (
                    wald_simple_beta(x, null["beta"], args.known_alpha, args.tau)
                    if wald_family
                    else rao_simple_beta(x, null["beta"], args.known_alpha, args.tau)
                )
                kind = "simple-beta"
            else:
                c = ConstraintSpec.fix_beta(null["beta"])
                out = wald_composite(x, c, args.tau) if wald_family else rao_composite(x, c, args.tau)
                kind = "composite-beta"
    except (ConvergenceError, ValueError, np.linalg.LinAlgError) as exc:
        raise CliError(f"test failed: {exc}")

    print(f"family={args.family}")
    print(f"kind={kind}")
    print(f"statistic={out.statistic:.10g}")
    print(f"df={out.df}")
    print(f"p_value={out.p_value:.10g}")
    print(f"reject_at_0.05={out.reject_at(0.05)}")
    if abs(args.level - 0.05) > 1e-12:
        print(f"reject_at_{args.level:g}={out.reject_at(args.level)}")
    if args.out:
        header = "family,kind,tau,statistic,df,p_value,reject_at_level,level"
        row = (
            f"{args.family},{kind},{out.tau:.6f},{out.statistic:.17g},{out.df},"
            f"{out.p_value:.17g},{int(out.reject_at(args.level))},{args.level:.6f}"
        )
        _atomic_write(args.out, header + "\n" + row + "\n")
        _write_manifest(
            args.out,
            "test",
            {"input": args.input, "family": args.family, "null": args.null,
             "tau": args.tau, "level": args.level},
            [args.out],
            started,
        )
    return 0


def _cmd_simulate(args) -> int:
    started = time.time()
    raw = parse_config(args.config)
    cfg, study = build_simulation_config(raw, args.replications)
    runner = run_level_study if study == "level" else run_power_study
    table = runner(cfg, workers=args.workers)
    _atomic_write(args.out, table.to_csv_text())
    manifest = {
        "config_file": args.config,
        "study": study,
        "population_alpha": cfg.population.alpha,
        "population_beta": cfg.population.beta,
        "null_alpha": cfg.null_alpha,
        "known_beta": cfg.known_beta,
        "tau_grid": ",".join(f"{t:g}" for t in cfg.tau_grid),
        "n_grid": ",".join(str(n) for n in cfg.n_grid),
        "eps_grid": ",".join(f"{e:g}" for e in cfg.eps_grid),
        "contaminant_scales": ",".join(f"{s:g}" for s in cfg.contaminant_scales),
        "replications": cfg.replications,
        "significance": cfg.significance,
        "master_seed": cfg.master_seed,
        "workers": args.workers,
        "flagged_cells": ";".join(table.flagged) if table.flagged else "none",
    }
    _write_manifest(args.out, "simulate", manifest, [args.out], started)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    for note in table.flagged:
        print(f"flagged: {note}", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    started = time.time()
    rows = discrepancy_report(DEFAULT_REPORT_GRID)
    _atomic_write(args.out, report_to_csv(rows))
    _write_manifest(args.out, "report", {"grid": "default"}, [args.out], started)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


_PLOT_KINDS = ("level-vs-n", "level-vs-eps", "power-vs-n", "power-vs-eps")


def _cmd_plot(args) -> int:
    started = time.time()
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {args.input}: {exc}")
    try:
        table = RejectionTable.from_csv_text(text)
    except ValueError as exc:
        raise CliError(str(exc))
    rows = [r for r in table.rows if r.family == args.family]
    if not rows:
        raise CliError(f"table has no rows for family {args.family!r}")

    against_n = args.kind.endswith("-vs-n")
    x_of = (lambda r: r.n) if against_n else (lambda r: r.eps)
    fixed_of = (lambda r: (r.eps, r.alpha_tilde)) if against_n else (lambda r: (r.n, r.alpha_tilde))
    fixed = {fixed_of(r) for r in rows}
    if len(fixed) > 1:
        raise CliError(
            f"ambiguous table for {args.kind}: multiple values of the non-axis dimensions {sorted(fixed)}"
        )
    taus = sorted({r.tau for r in rows})
    series = []
    for tau in taus:
        pts = sorted((x_of(r), r.rate) for r in rows if r.tau == tau)
        series.append((f"tau={tau:g}", [p[0] for p in pts], [p[1] for p in pts]))
    ylabel = "empirical level" if args.kind.startswith("level") else "empirical power"
    xlabel = "sample size n" if against_n else "contamination proportion"
    svg_text = line_chart(series, xlabel=xlabel, ylabel=ylabel, ref_y=args.level, title=args.kind)
    _atomic_write(args.out, svg_text)
    _write_manifest(
        args.out,
        "plot",
        {"input": args.input, "kind": args.kind, "family": args.family, "level": args.level},
        [args.out],
        started,
    )
    print(f"wrote {args.out} ({len(series)} series)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lldpd",
        description="Robust log-logistic estimation and testing via density power divergence.",
    )
    parser.add_argument("--version", action="version", version=f"lldpd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the robust estimator to a data file")
    p_fit.add_argument("--input", required=True, help="text file, one observation per line")
    p_fit.add_argument("--tau", type=float, default=0.0, help="tuning constant (0 = maximum likelihood)")
    p_fit.add_argument("--fix-alpha", type=float, default=None, help="fix the scale, fit the shape only")
    p_fit.add_argument("--fix-beta", type=float, default=None, help="fix the shape, fit the scale only")
    p_fit.add_argument("--multistart", action="store_true", help="use 5 jittered deterministic restarts")
    p_fit.add_argument("--out", default=None, help="optional CSV output path")
    p_fit.set_defaults(func=_cmd_fit)

    p_test = sub.add_parser("test", help="run a Wald-type or Rao-type hypothesis test")
    p_test.add_argument("--family", choices=("wald", "rao"), required=True)
    p_test.add_argument("--null", required=True, help="alpha=A | beta=B | alpha=A,beta=B")
    p_test.add_argument("--tau", type=float, default=0.0)
    p_test.add_argument("--input", required=True)
    p_test.add_argument("--known-alpha", type=float, default=None, help="treat the scale as known")
    p_test.add_argument("--known-beta", type=float, default=None, help="treat the shape as known")
    p_test.add_argument("--level", type=float, default=0.05)
    p_test.add_argument("--out", default=None, help="optional CSV output path")
    p_test.set_defaults(func=_cmd_test)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo level/power study from a config file")
    p_sim.add_argument("config", help="key=value config file")
    p_sim.add_argument("--out", required=True, help="rejection-table CSV output path")
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--replications", type=int, default=None, help="override the config replication count")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rep = sub.add_parser("report", help="closed-form vs quadrature discrepancy report")
    p_rep.add_argument("--out", required=True, help="CSV output path")
    p_rep.set_defaults(func=_cmd_report)

    p_plot = sub.add_parser("plot", help="render a rejection table as an SVG line chart")
    p_plot.add_argument("--input", required=True, help="rejection-table CSV")
    p_plot.add_argument("--kind", choices=_PLOT_KINDS, required=True)
    p_plot.add_argument("--family", choices=("wald", "rao"), default="wald")
    p_plot.add_argument("--level", type=float, default=0.05, help="reference line height")
    p_plot.add_argument("--out", required=True, help="SVG output path")
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
