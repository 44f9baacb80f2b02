"""Command-line harness.

Exit codes: 0 success, 2 usage/config error, 3 I/O or parse failure,
4 numerical failure.  HYPERCRIT_SEED overrides --seed when set.
"""

from __future__ import annotations

import functools
import json
import os
import sys

import click
import numpy as np

from . import hypergraph as hg
from .betas import BetaParams, classify, critical_profile, t_star
from .collapse import identify, sequential_patch_experiment
from .experiments import ExperimentConfig, run
from .limits import fit_exponent, ks_statistic
from .sampler import sample_modified_walk, sample_walk, sample_walk_summary
from .walk import (breadth_first_walk, excursions, giant_excursion_stats,
                   read_trace_csv, write_trace_csv)

__all__ = ["main"]


class _IOFailure(click.ClickException):
    exit_code = 3


class _NumericalFailure(click.ClickException):
    exit_code = 4


def _guarded(fn):
    """Map computation-time exceptions onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (OSError, hg.EdgeListParseError) as exc:
            raise _IOFailure(str(exc)) from exc
        except (ValueError, RuntimeError, ArithmeticError) as exc:
            raise _NumericalFailure(str(exc)) from exc

    return wrapper


def _resolve_seed(seed: int) -> int:
    env = os.environ.get("HYPERCRIT_SEED")
    if env is not None and env != "":
        try:
            return int(env)
        except ValueError:
            raise click.UsageError(f"HYPERCRIT_SEED must be an integer, got {env!r}")
    return seed


def _build_params(beta: str | None, critical_k: int | None, beta_k: float | None) -> BetaParams:
    if beta is not None and critical_k is not None:
        raise click.UsageError("--beta and --critical-k are mutually exclusive")
    if beta is not None:
        try:
            return BetaParams.from_text(beta)
        except ValueError as exc:
            raise click.UsageError(str(exc))
    if critical_k is not None:
        if beta_k is None:
            raise click.UsageError("--critical-k needs --beta-k")
        try:
            return critical_profile(critical_k, beta_k)
        except ValueError as exc:
            raise click.UsageError(str(exc))
    raise click.UsageError("specify coefficients with --beta or --critical-k/--beta-k")


def _params_options(fn):
    fn = click.option("--beta", type=str, default=None,
                      help='coefficients "beta2,beta3,..."')(fn)
    fn = click.option("--critical-k", type=int, default=None,
                      help="critical profile with departure index K")(fn)
    fn = click.option("--beta-k", type=float, default=None,
                      help="departure coefficient for --critical-k")(fn)
    return fn


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc


def _emit_report(report, fmt: str, out: str | None) -> None:
    _write_text(out, report.to_json() if fmt == "json" else report.to_csv())


@click.group()
def cli():
    """Poisson random hypergraph simulation and scaling analysis."""


@cli.command()
@click.option("--n", type=int, required=True, help="number of vertices")
@_params_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=str, default=None, help="edge-list file (default stdout)")
@_guarded
def generate(n, beta, critical_k, beta_k, seed, out):
    """Sample a Poisson random hypergraph and write its edge list."""
    params = _build_params(beta, critical_k, beta_k)
    rng = np.random.default_rng(np.random.SeedSequence(_resolve_seed(seed)))
    sampled = hg.sample(n, params, rng)
    _write_text(out, hg.dumps(sampled))


@cli.command()
@click.option("--infile", type=str, required=True, help="edge-list file")
@click.option("--patches", type=str, default=None,
              help="comma-separated vertex ids to patch")
@click.option("--delta", type=float, default=None,
              help="stop once more than N*delta vertices are identified")
@click.option("--budget", type=int, default=None, help="maximum number of patches")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=str, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@_guarded
def collapse(infile, patches, delta, budget, seed, out, fmt):
    """Collapse a stored hypergraph from explicit patches or sequentially."""
    loaded = hg.load(infile)
    if patches is not None:
        try:
            vertex_ids = [int(p) for p in patches.split(",") if p.strip() != ""]
        except ValueError:
            raise click.UsageError(f"bad patch list {patches!r}")
        identified = identify(loaded, vertex_ids)
        payload = {
            "schema_version": 1,
            "n_vertices": loaded.n_vertices,
            "patches_used": len(set(vertex_ids)),
            "identified_count": len(identified),
            "identified": sorted(identified) if len(identified) <= 1000 else None,
        }
    else:
        if delta is None and budget is None:
            raise click.UsageError("need --patches, --delta or --budget")
        rng = np.random.default_rng(np.random.SeedSequence(_resolve_seed(seed)))
        report = sequential_patch_experiment(loaded, rng, delta=delta,
                                             patch_budget=budget)
        payload = {
            "schema_version": 1,
            "n_vertices": report.n_vertices,
            "identified_count": report.identified_count,
            "patches_used": report.patches_used,
            "domain_size": report.domain_size,
            "stop_reason": report.stop_reason,
            "seed": _resolve_seed(seed),
        }
    if fmt == "json":
        _write_text(out, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        keys = sorted(k for k in payload if k != "identified")
        _write_text(out, ",".join(keys) + "\n"
                    + ",".join(str(payload[k]) for k in keys) + "\n")


@cli.command()
@click.option("--infile", type=str, required=True, help="edge-list file")
@click.option("--root-policy", type=click.Choice(["uniform-random", "lowest-index"]),
              default="uniform-random", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=str, default=None, help="trace CSV (default stdout)")
@_guarded
def walk(infile, root_policy, seed, out):
    """Breadth-first walk over a stored hypergraph; emits the trace CSV."""
    loaded = hg.load(infile)
    rng = np.random.default_rng(np.random.SeedSequence(_resolve_seed(seed)))
    trace = breadth_first_walk(loaded, rng, root_policy=root_policy)
    if out is None or out == "-":
        write_trace_csv(trace, sys.stdout)
    else:
        write_trace_csv(trace, out)


@cli.command("sample-walk")
@click.option("--n", type=int, required=True)
@_params_options
@click.option("--horizon", type=int, default=None)
@click.option("--delta", type=float, default=None,
              help="freeze patches after step floor(N*delta)")
@click.option("--budget", type=int, default=None, help="patch budget")
@click.option("--stream", is_flag=True, help="emit excursion boundaries only")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=str, default=None)
@_guarded
def sample_walk_cmd(n, beta, critical_k, beta_k, horizon, delta, budget, stream,
                    seed, out):
    """Simulate the walk from its sequential law, without a hypergraph."""
    params = _build_params(beta, critical_k, beta_k)
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=_resolve_seed(seed), spawn_key=(n, 0)))
    if stream:
        freeze = int(n * delta) if delta is not None else None
        summary = sample_walk_summary(n, params, rng, horizon=horizon,
                                      patch_budget=budget, freeze_after=freeze)
        lines = ["k,end_step,length"]
        lengths = summary.excursion_lengths
        for i, (end, length) in enumerate(zip(summary.excursion_ends, lengths), 1):
            lines.append(f"{i},{end},{length}")
        _write_text(out, "\n".join(lines) + "\n")
        return
    if delta is not None:
        if budget is not None:
            raise click.UsageError("--delta and --budget are exclusive here")
        trace = sample_modified_walk(n, params, rng, delta)
    else:
        trace = sample_walk(n, params, rng, horizon=horizon, patch_budget=budget)
    if out is None or out == "-":
        write_trace_csv(trace, sys.stdout)
    else:
        write_trace_csv(trace, out)


@cli.command()
@click.option("--n", "n_values", type=int, multiple=True, required=True,
              help="vertex count; repeat for a sweep")
@_params_options
@click.option("--observable", type=click.Choice(list(
    ("max-domain", "domain", "identified-fraction", "giant-fraction", "patch-count"))),
    default="max-domain", show_default=True)
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--delta", type=float, default=None)
@click.option("--budget", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--alpha-override", type=float, default=None,
              help="override the classified scaling exponent in the report")
@click.option("--per-trial", is_flag=True, help="include per-trial rows")
@click.option("--out", type=str, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@_guarded
def sweep(n_values, beta, critical_k, beta_k, observable, trials, delta, budget,
          seed, workers, alpha_override, per_trial, out, fmt):
    """Multi-N Monte Carlo sweep of a walk observable, with exponent fit."""
    params = _build_params(beta, critical_k, beta_k)
    config = ExperimentConfig(
        command="sweep", params=params, n_values=tuple(n_values), trials=trials,
        seed=_resolve_seed(seed), delta=delta, budget=budget,
        observable=observable, workers=workers, alpha_override=alpha_override)
    try:
        config.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc))
    report = run(config, keep_trials=per_trial)
    _emit_report(report, fmt, out)


@cli.command()
@_params_options
@click.option("--paths", type=int, default=1000, show_default=True,
              help="number of simulated limit-walk paths")
@click.option("--dt", type=float, default=1e-4, show_default=True)
@click.option("--min-window", type=float, default=None,
              help="quiet window before the infimum is accepted")
@click.option("--terminal-t", type=float, default=None,
              help="record path values at this time instead of the infimum")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--samples-out", type=str, default=None,
              help="write raw samples, one value per line")
@click.option("--out", type=str, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@_guarded
def limits(beta, critical_k, beta_k, paths, dt, min_window, terminal_t, seed,
           workers, samples_out, out, fmt):
    """Simulate the drifted Brownian limit walk ensemble."""
    params = _build_params(beta, critical_k, beta_k)
    config = ExperimentConfig(
        command="limits", params=params, trials=paths, seed=_resolve_seed(seed),
        workers=workers, dt=dt, min_window=min_window, terminal_t=terminal_t)
    try:
        config.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc))
    report = run(config)
    if samples_out is not None:
        _write_text(samples_out, "".join(repr(float(v)) + "\n" for v in report.samples))
    _emit_report(report, fmt, out)


@cli.command()
@click.option("--fit", "fit_file", type=str, default=None,
              help='CSV of "n,statistic" rows to fit a log-log exponent')
@click.option("--ks-a", type=str, default=None, help="sample file, one value per line")
@click.option("--ks-b", type=str, default=None, help="second sample file")
@click.option("--trace", "trace_file", type=str, default=None,
              help="trace CSV to summarize into excursions")
@click.option("--warmup", type=int, default=0, show_default=True)
@click.option("--out", type=str, default=None)
@_guarded
def analyze(fit_file, ks_a, ks_b, trace_file, warmup, out):
    """Post-process stored results: exponent fits, KS distances, excursions."""
    modes = sum(x is not None for x in (fit_file, ks_a, trace_file))
    if modes != 1:
        raise click.UsageError("choose exactly one of --fit, --ks-a/--ks-b, --trace")
    if fit_file is not None:
        rows = np.loadtxt(fit_file, delimiter=",", ndmin=2)
        fit = fit_exponent(rows[:, 0], rows[:, 1])
        payload = {"schema_version": 1, "mode": "fit", "slope": fit.slope,
                   "stderr": fit.stderr, "ci95": list(fit.ci95)}
    elif ks_a is not None:
        if ks_b is None:
            raise click.UsageError("--ks-a needs --ks-b")
        a = np.loadtxt(ks_a, ndmin=1)
        b = np.loadtxt(ks_b, ndmin=1)
        payload = {"schema_version": 1, "mode": "ks",
                   "ks_distance": ks_statistic(a, b),
                   "n_a": int(a.shape[0]), "n_b": int(b.shape[0])}
    else:
        trace = read_trace_csv(trace_file)
        records = excursions(trace)
        stats = giant_excursion_stats(trace, warmup_steps=warmup)
        payload = {
            "schema_version": 1, "mode": "trace",
            "n_vertices": trace.n_vertices, "steps": trace.n,
            "excursions": len(records),
            "lengths": [r.length for r in records] if len(records) <= 1000 else None,
            "giant_start": stats.start_step, "giant_length": stats.length,
            "first_return_after_warmup": stats.first_return_after_warmup,
        }
    _write_text(out, json.dumps(payload, sort_keys=True, indent=2) + "\n")


@cli.command()
@_params_options
@click.option("--beta1", type=float, default=0.0, show_default=True,
              help="extra patch intensity added to the threshold function")
@click.option("--curve-out", type=str, default=None,
              help='write the fluid curve z(t) as "t,value" CSV')
@click.option("--curve-points", type=int, default=1000, show_default=True)
@_guarded
def criticality(beta, critical_k, beta_k, beta1, curve_out, curve_points):
    """Print the criticality report for a coefficient vector."""
    params = _build_params(beta, critical_k, beta_k)
    report = classify(params)
    if curve_out is not None:
        from .betas import z_curve
        from .limits import write_curve_csv
        grid = np.linspace(0.0, 1.0, curve_points + 1)
        write_curve_csv(curve_out, grid, z_curve(params, grid))
    payload = {
        "schema_version": 1,
        "params": params.as_list(),
        "first_noncritical_k": report.label(),
        "mu_k": report.mu_k,
        "alpha_k": None if report.alpha_k is None else float(report.alpha_k),
        "t_star": report.t_star if beta1 == 0.0 else t_star(params, beta1),
        "regime": report.regime,
    }
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def main():
    cli(prog_name="hypercrit")


if __name__ == "__main__":
    main()
