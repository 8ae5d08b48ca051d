"""Command line driver for reproducible sampling experiments.

Subcommands:

    sample     run N parallel chains, write per-chain draw CSVs + manifest
    reference  generate (or reuse cached) reference draws and moments
    metrics    standardized-error tables and figures for a finished run
    sweep      sample+metrics across one hyperparameter's value list
    figure     the data (CSV + PNG) behind the probe-map, histogram,
               condition-field, and error-curve reports

Every command is deterministic given (config, seed); reruns produce
byte-identical result files.  Wall-clock timing goes to a timing.json
sidecar that is explicitly outside that contract.  Exit codes: 2 bad
usage/config, 3 I/O failure, 4 a long-run reference refused to converge.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np
from scipy import stats

from . import diagnostics, plotting, runio
from .config import (
    ExperimentConfig,
    UsageError,
    build_experiment_config,
    parse_config_file,
    resolve_out_dir,
)
from .models import build_model
from .reference import ReferenceError, ReferenceSet, analytic_reference, longrun_reference
from .runner import chain_seeds, run_chains
from .samplers import DrGhmcConfig, DrHmcConfig
from .stepsize import pilot_mass_diag, pilot_points, reference_step_size

ANALYTIC_MODELS = ("funnel", "gaussian", "normal100")


# ---------------------------------------------------------------------------
# shared plumbing


def _add_override_flags(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--model", help="target density name")
    parser.add_argument("--dim", type=int, help="dimension for funnel/gaussian")
    parser.add_argument("--data", help="path to a model data file")
    parser.add_argument("--sampler", help="drghmc | drhmc | ghmc | hmc")
    parser.add_argument("--chains", type=int)
    parser.add_argument("--budget", type=int, help="gradient evaluations per chain")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--gamma", type=float, help="momentum refresh damping")
    parser.add_argument("--max-proposals", dest="max_proposals", type=int)
    parser.add_argument("--reduction", type=float, help="step size reduction factor")
    parser.add_argument("--step-size", dest="step_size", type=float)
    parser.add_argument("--step-size-factor", dest="step_size_factor", type=float)
    parser.add_argument("--steps", type=int, help="leapfrog steps (hmc/drhmc)")
    parser.add_argument("--trajectory-length", dest="trajectory_length", type=float)
    parser.add_argument("--first-steps", dest="first_steps", type=int)
    parser.add_argument("--mass", help="identity | pilot")
    parser.add_argument("--init", help="reference | origin")
    parser.add_argument("--reference", help="reference directory")
    parser.add_argument("--out", help="output directory")


_OVERRIDE_KEYS = (
    "model", "dim", "data", "sampler", "chains", "budget", "seed", "workers",
    "gamma", "max_proposals", "reduction", "step_size", "step_size_factor",
    "steps", "trajectory_length", "first_steps", "mass", "init", "reference", "out",
)


def _experiment_config(args) -> ExperimentConfig:
    file_values = parse_config_file(args.config) if args.config else None
    overrides = {key: getattr(args, key, None) for key in _OVERRIDE_KEYS}
    return build_experiment_config(file_values, overrides)


def _build_model(cfg: ExperimentConfig):
    try:
        return build_model(cfg.model, dim=cfg.dim, data_path=cfg.data)
    except (ValueError, OSError) as err:
        if isinstance(err, OSError):
            raise
        raise UsageError(str(err)) from err


def _load_reference(ref_dir) -> ReferenceSet:
    try:
        return ReferenceSet.load(ref_dir)
    except FileNotFoundError as err:
        raise UsageError(f"no reference found under {ref_dir}: {err}") from err


def _resolve_sampler(cfg: ExperimentConfig, model, reference):
    """Pilot-tune step size and mass as configured; returns
    (kernel config, dict of resolved values for the manifest)."""
    pilot_grads = 0
    if cfg.step_size is not None:
        eps = cfg.step_size
        eps_ref = None
    else:
        points = pilot_points(model, reference, seed=cfg.seed)
        eps_ref, pilot_grads = reference_step_size(model, points, seed=cfg.seed)
        eps = cfg.step_size_factor * eps_ref
    mass = None
    mass_grads = 0
    if cfg.mass == "pilot":
        mass, mass_grads = pilot_mass_diag(model, eps_ref or eps, seed=cfg.seed)
    if cfg.sampler in ("drghmc", "ghmc"):
        kernel = DrGhmcConfig(
            max_proposals=cfg.max_proposals if cfg.sampler == "drghmc" else 1,
            damping=cfg.gamma,
            step_size=eps,
            reduction=cfg.reduction,
            first_steps=cfg.first_steps,
            mass=mass,
            seed=cfg.seed,
        )
    else:
        kernel = DrHmcConfig(
            max_proposals=cfg.max_proposals if cfg.sampler == "drhmc" else 1,
            step_size=eps,
            reduction=cfg.reduction,
            steps=cfg.steps,
            trajectory_length=cfg.trajectory_length,
            mass=mass,
            seed=cfg.seed,
        )
    resolved = {
        "step_size": eps,
        "pilot_step_size": eps_ref,
        "pilot_gradient_evals": pilot_grads + mass_grads,
        "mass_diag": None if mass is None else mass.diag.tolist(),
    }
    return kernel, resolved


def _initial_positions(cfg: ExperimentConfig, model, reference) -> np.ndarray:
    rng = np.random.default_rng([cfg.seed, 0x1817])
    if cfg.init == "reference" and reference is not None:
        idx = rng.integers(0, reference.count, size=cfg.chains)
        return reference.draws[idx]
    return 0.1 * rng.standard_normal((cfg.chains, model.dim))


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {key: getattr(cfg, key) for key in vars(cfg)}


# ---------------------------------------------------------------------------
# sample


def cmd_sample(args) -> int:
    started = time.time()
    cfg = _experiment_config(args)
    model = _build_model(cfg)
    reference = _load_reference(cfg.reference) if cfg.reference else None
    if reference is not None and reference.dim != model.dim:
        raise UsageError(
            f"reference dimension {reference.dim} does not match model dimension {model.dim}"
        )
    kernel, resolved = _resolve_sampler(cfg, model, reference)
    inits = _initial_positions(cfg, model, reference)
    seeds = chain_seeds(cfg.seed, cfg.chains)
    results = run_chains(
        model, cfg.sampler, kernel, inits, cfg.budget, seeds=seeds, workers=cfg.workers
    )
    out = resolve_out_dir(cfg.out, f"run-{cfg.model}-{cfg.sampler}-s{cfg.seed}")
    out.mkdir(parents=True, exist_ok=True)
    for i, result in enumerate(results):
        runio.write_chain_csv(out / runio.chain_file_name(i), result)
    manifest = {
        "command": "sample",
        "model": model.name,
        "dim": model.dim,
        "sampler": cfg.sampler,
        "chains": cfg.chains,
        "budget": cfg.budget,
        "seed": cfg.seed,
        "chain_seeds": seeds,
        "config": _config_echo(cfg),
        "resolved": resolved,
        "gradient_evals": [r.grad_evals for r in results],
        "divergences": [r.divergences for r in results],
        "balance_guards": [r.balance_guards for r in results],
        "accept_rates": [r.accept_rate for r in results],
        "draw_files": [runio.chain_file_name(i) for i in range(len(results))],
    }
    runio.write_json(out / "manifest.json", manifest)
    runio.write_json(out / "timing.json", {"wall_time_s": time.time() - started})
    print(f"sample: {cfg.chains} chains of {cfg.model} via {cfg.sampler} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# reference


def cmd_reference(args) -> int:
    started = time.time()
    name = args.model
    if name is None:
        raise UsageError("reference needs --model")
    try:
        model = build_model(name, dim=args.dim, data_path=args.data)
    except ValueError as err:
        raise UsageError(str(err)) from err
    count = args.draws
    if count is None:
        count = 100_000 if name in ANALYTIC_MODELS else 10_000
    out = resolve_out_dir(args.out, f"ref-{model.name}-d{model.dim}-s{args.seed}")
    manifest_path = out / "manifest.json"
    wanted = {
        "command": "reference",
        "model": model.name,
        "dim": model.dim,
        "draws": count,
        "seed": args.seed,
    }
    if manifest_path.exists():
        have = runio.read_json(manifest_path)
        if all(have.get(k) == v for k, v in wanted.items()):
            print(f"reference: cache hit -> {out}")
            return 0
    if name in ANALYTIC_MODELS:
        rho = getattr(model, "rho", None)
        reference = analytic_reference(name, model.dim, count, args.seed, rho=rho)
    else:
        reference = longrun_reference(
            model,
            count=count,
            seed=args.seed,
            iterations=args.iterations,
            workers=args.workers or 4,
        )
    reference.save(out)
    wanted["provenance"] = reference.provenance
    runio.write_json(manifest_path, wanted)
    runio.write_json(out / "timing.json", {"wall_time_s": time.time() - started})
    print(f"reference: {reference.count} {reference.provenance} draws of {model.name} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# metrics


def _error_tables(manifest, chains, reference, grid_points):
    budget = manifest["budget"]
    grid = diagnostics.budget_grid(max(budget, 2), points=grid_points)
    reports = [
        diagnostics.error_curve(chain, reference, grid, chain_id=i)
        for i, chain in enumerate(chains)
    ]
    return grid, reports


def _summary_rows(reports):
    rows, summaries = [], {}
    for f in diagnostics.FUNCTIONS:
        finals = np.array([rep.errors[f][-1] for rep in reports])
        box = diagnostics.box_summary(finals)
        summaries[f] = box
        rows.append(
            [
                f,
                box["mean"],
                box["median"],
                box["q25"],
                box["q75"],
                box["whisker_lo"],
                box["whisker_hi"],
                len(box["outliers"]),
                "|".join(runio.fmt(v) for v in box["outliers"]),
            ]
        )
    return rows, summaries


def cmd_metrics(args) -> int:
    run_dir = Path(args.run)
    try:
        manifest, chains = runio.load_run(run_dir)
    except FileNotFoundError as err:
        raise UsageError(f"no run found under {run_dir}: {err}") from err
    reference = _load_reference(args.reference)
    dim = chains[0].draws.shape[1]
    if reference.dim != dim:
        raise UsageError(
            f"reference dimension {reference.dim} does not match run dimension {dim}"
        )
    out = Path(args.out) if args.out else run_dir / "metrics"
    out.mkdir(parents=True, exist_ok=True)

    grid, reports = _error_tables(manifest, chains, reference, args.grid_points)

    rows = []
    for f in diagnostics.FUNCTIONS:
        for rep in reports:
            for b, e in zip(rep.budgets, rep.errors[f]):
                rows.append([f, int(b), rep.chain_id, e])
    runio.write_table(out / "curves.csv", ["f", "budget", "chain", "error"], rows)

    agg_rows = []
    curve_plots = {}
    for f in diagnostics.FUNCTIONS:
        stackd = np.vstack([rep.errors[f] for rep in reports])
        mean = stackd.mean(axis=0)
        median = np.median(stackd, axis=0)
        for j, b in enumerate(grid):
            agg_rows.append([f, int(b), mean[j], median[j]])
        curve_plots[f"{f} mean"] = (grid, mean)
        curve_plots[f"{f} median"] = (grid, median)
    runio.write_table(out / "curves_agg.csv", ["f", "budget", "mean", "median"], agg_rows)

    final_rows = [
        [f, rep.chain_id, rep.errors[f][-1]]
        for f in diagnostics.FUNCTIONS
        for rep in reports
    ]
    runio.write_table(out / "errors.csv", ["f", "chain", "error"], final_rows)

    summary_rows, summaries = _summary_rows(reports)
    runio.write_table(
        out / "summary.csv",
        ["f", "mean", "median", "q25", "q75", "whisker_lo", "whisker_hi",
         "n_outliers", "outliers"],
        summary_rows,
    )

    if args.pooled:
        pooled = np.concatenate([c.draws for c in chains], axis=0)
        pooled_rows = [
            [f, diagnostics.standardized_error(pooled, reference, f)]
            for f in diagnostics.FUNCTIONS
        ]
        runio.write_table(out / "pooled_errors.csv", ["f", "error"], pooled_rows)

    plotting.plot_error_curves(curve_plots, out / "error_curves.png")
    plotting.plot_box_table(summaries, out / "error_box.png")
    print(f"metrics: {len(chains)} chains -> {out}")
    return 0


# ---------------------------------------------------------------------------
# sweep


SWEEP_PARAMS = {
    "gamma": ("gamma", float),
    "K": ("max_proposals", int),
    "r": ("reduction", float),
    "c": ("step_size_factor", float),
}


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise UsageError(f"sweep parameter must be one of {tuple(SWEEP_PARAMS)}")
    field_name, caster = SWEEP_PARAMS[args.param]
    try:
        values = [caster(v) for v in args.values.split(",") if v.strip()]
    except ValueError as err:
        raise UsageError(f"bad --values list: {err}") from err
    if not values:
        raise UsageError("sweep needs at least one value")
    base = _experiment_config(args)
    if base.reference is None:
        raise UsageError("sweep needs --reference for its error metrics")
    reference = _load_reference(base.reference)
    out = resolve_out_dir(base.out, f"sweep-{base.model}-{args.param}")
    out.mkdir(parents=True, exist_ok=True)

    combined = []
    box_by_value = {}
    for value in values:
        sub_out = out / f"{args.param}_{value:g}"
        sub_args = argparse.Namespace(**vars(args))
        setattr(sub_args, field_name, value)
        sub_args.out = str(sub_out / "run")
        cmd_sample(sub_args)
        metrics_args = argparse.Namespace(
            run=str(sub_out / "run"),
            reference=base.reference,
            out=str(sub_out / "metrics"),
            grid_points=args.grid_points,
            pooled=False,
        )
        cmd_metrics(metrics_args)
        manifest, chains = runio.load_run(sub_out / "run")
        grid, reports = _error_tables(manifest, chains, reference, args.grid_points)
        for f in diagnostics.FUNCTIONS:
            finals = np.array([rep.errors[f][-1] for rep in reports])
            box = diagnostics.box_summary(finals)
            combined.append(
                [args.param, f"{value:g}", f, box["mean"], box["median"], box["q25"],
                 box["q75"], box["whisker_lo"], box["whisker_hi"], len(box["outliers"])]
            )
            if f == "theta":
                box_by_value[f"{args.param}={value:g}"] = box
    runio.write_table(
        out / "sweep_summary.csv",
        ["param", "value", "f", "mean", "median", "q25", "q75",
         "whisker_lo", "whisker_hi", "n_outliers"],
        combined,
    )
    plotting.plot_box_table(box_by_value, out / "sweep.png")
    print(f"sweep: {args.param} over {values} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# figure


def _parse_grid(spec: str, default) -> np.ndarray:
    if spec is None:
        lo, hi, n = default
    else:
        try:
            lo_s, hi_s, n_s = spec.split(":")
            lo, hi, n = float(lo_s), float(hi_s), int(n_s)
        except ValueError as err:
            raise UsageError(f"grid spec must look like lo:hi:n, got {spec!r}") from err
    return np.linspace(lo, hi, n)


def cmd_figure(args) -> int:
    out = resolve_out_dir(args.out, f"figure-{args.name}")
    out.mkdir(parents=True, exist_ok=True)
    if args.name == "stepsize_map":
        xs = _parse_grid(args.x_grid, (-6.0, 6.0, 9))
        ys = _parse_grid(args.y_grid, (-6.0, 6.0, 9))
        rows = diagnostics.stepsize_probe_map(
            xs, ys, dim=args.dim or 10, trials=args.trials, seed=args.seed,
            step_size=2.0, reduction=4.0, max_proposals=10,
        )
        runio.write_table(
            out / "stepsize_map.csv",
            ["x", "y", "mean_accepted_eps", "accepted", "trials"], rows,
        )
        plotting.plot_stepsize_map(rows, out / "stepsize_map.png")
    elif args.name == "condition_field":
        xs = _parse_grid(args.x_grid, (-8.0, 8.0, 17))
        ys = _parse_grid(args.y_grid, (-8.0, 8.0, 17))
        rows = diagnostics.condition_number_field(xs, ys, dim=args.dim or 10)
        runio.write_table(
            out / "condition_field.csv",
            ["x", "y", "neg_log_density", "condition_number"], rows,
        )
        plotting.plot_condition_field(rows, out / "condition_field.png")
    elif args.name == "funnel_hist":
        if not args.run:
            raise UsageError("funnel_hist needs --run")
        _, chains = runio.load_run(args.run)
        pooled = np.concatenate([c.draws for c in chains], axis=0)
        counts, edges = diagnostics.marginal_histogram(
            pooled, dim=0, bins=args.bins, value_range=(-12.0, 12.0)
        )
        rows = [[edges[i], edges[i + 1], int(counts[i])] for i in range(len(counts))]
        runio.write_table(out / "funnel_hist.csv", ["bin_lo", "bin_hi", "count"], rows)
        plotting.plot_histogram(
            counts, edges, out / "funnel_hist.png",
            overlay_cdf=lambda q: stats.norm.cdf(q, scale=3.0),
            xlabel="x (log scale coordinate)",
        )
    elif args.name == "error_curves":
        if not args.run or not args.reference:
            raise UsageError("error_curves needs --run and --reference")
        manifest, chains = runio.load_run(args.run)
        reference = _load_reference(args.reference)
        grid, reports = _error_tables(manifest, chains, reference, args.grid_points)
        rows, curves = [], {}
        for f in diagnostics.FUNCTIONS:
            stacked = np.vstack([rep.errors[f] for rep in reports])
            mean = stacked.mean(axis=0)
            median = np.median(stacked, axis=0)
            for j, b in enumerate(grid):
                rows.append([f, int(b), mean[j], median[j]])
            curves[f"{f} mean"] = (grid, mean)
        runio.write_table(out / "error_curves.csv", ["f", "budget", "mean", "median"], rows)
        plotting.plot_error_curves(curves, out / "error_curves.png")
    else:
        raise UsageError(
            "unknown figure name; choose from stepsize_map, funnel_hist, "
            "condition_field, error_curves"
        )
    print(f"figure: {args.name} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drghmc",
        description="Delayed rejection generalized HMC experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="run chains and persist draws")
    _add_override_flags(p_sample)
    p_sample.set_defaults(func=cmd_sample)

    p_ref = sub.add_parser("reference", help="generate reference draws")
    p_ref.add_argument("--model", required=True)
    p_ref.add_argument("--dim", type=int)
    p_ref.add_argument("--data")
    p_ref.add_argument("--draws", type=int,
                       help="reference size (default 1e5 analytic, 1e4 long-run)")
    p_ref.add_argument("--seed", type=int, default=1)
    p_ref.add_argument("--iterations", type=int, help="long-run iterations per chain")
    p_ref.add_argument("--workers", type=int)
    p_ref.add_argument("--out")
    p_ref.set_defaults(func=cmd_reference)

    p_metrics = sub.add_parser("metrics", help="error tables for a run")
    p_metrics.add_argument("--run", required=True)
    p_metrics.add_argument("--reference", required=True)
    p_metrics.add_argument("--out")
    p_metrics.add_argument("--grid-points", dest="grid_points", type=int, default=50)
    p_metrics.add_argument("--pooled", action="store_true",
                           help="also report errors of the pooled draws")
    p_metrics.set_defaults(func=cmd_metrics)

    p_sweep = sub.add_parser("sweep", help="sample+metrics across one parameter")
    p_sweep.add_argument("--param", required=True, help="gamma | K | r | c")
    p_sweep.add_argument("--values", required=True, help="comma separated list")
    p_sweep.add_argument("--grid-points", dest="grid_points", type=int, default=20)
    _add_override_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_fig = sub.add_parser("figure", help="report tables and figures")
    p_fig.add_argument("name", help="stepsize_map | funnel_hist | condition_field | error_curves")
    p_fig.add_argument("--run")
    p_fig.add_argument("--reference")
    p_fig.add_argument("--dim", type=int)
    p_fig.add_argument("--seed", type=int, default=1)
    p_fig.add_argument("--trials", type=int, default=100)
    p_fig.add_argument("--bins", type=int, default=60)
    p_fig.add_argument("--x-grid", dest="x_grid", help="lo:hi:n")
    p_fig.add_argument("--y-grid", dest="y_grid", help="lo:hi:n")
    p_fig.add_argument("--grid-points", dest="grid_points", type=int, default=50)
    p_fig.add_argument("--out")
    p_fig.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ReferenceError as err:
        print(f"reference not converged: {err}", file=sys.stderr)
        return 4
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
