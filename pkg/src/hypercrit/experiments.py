"""Seeded experiment runner: trial fan-out, aggregation, report schema.

Reports are deterministic functions of (config, seed): every trial draws
from its own substream keyed by (seed, N, trial index), workers only change
scheduling, and aggregation sorts by trial index before summarizing.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .betas import BetaParams, classify
from .limits import default_min_window, fit_exponent, wk_infimum, wk_values_at
from .sampler import sample_walk_summary

__all__ = ["ExperimentConfig", "AggregateReport", "trial_generator", "run",
           "SWEEP_OBSERVABLES"]

SCHEMA_VERSION = 1

SWEEP_OBSERVABLES = ("max-domain", "domain", "identified-fraction",
                     "giant-fraction", "patch-count")


def trial_generator(seed: int, n_value: int, trial: int) -> np.random.Generator:
    """Independent substream for one trial: SeedSequence(seed, key=(N, trial)).

    The spawn key makes streams independent of scheduling and worker count.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(n_value, trial))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class ExperimentConfig:
    """Validated inputs of one experiment run."""

    command: str
    params: BetaParams
    n_values: tuple[int, ...] = ()
    trials: int = 1
    seed: int = 0
    delta: float | None = None
    budget: int | None = None
    observable: str = "max-domain"
    workers: int = 1
    alpha_override: float | None = None
    # limit-walk extras
    dt: float = 1e-4
    min_window: float | None = None
    terminal_t: float | None = None

    def validate(self) -> None:
        if self.command not in ("sweep", "limits"):
            raise ValueError(f"unknown experiment command {self.command!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.command == "sweep":
            if not self.n_values:
                raise ValueError("sweep needs at least one N")
            if self.observable not in SWEEP_OBSERVABLES:
                raise ValueError(f"unknown observable {self.observable!r}")
            if self.observable in ("giant-fraction", "patch-count") and self.delta is None:
                raise ValueError(f"observable {self.observable!r} needs --delta")
            if self.observable == "identified-fraction" and self.budget is None:
                raise ValueError("observable 'identified-fraction' needs --budget")
        if self.command == "limits" and self.dt <= 0:
            raise ValueError("dt must be positive")

    def echo(self) -> dict:
        # Worker count deliberately omitted: it only affects scheduling, and
        # reports must be byte-identical for equal (config, seed).
        return {
            "command": self.command,
            "params": self.params.as_list(),
            "n_values": list(self.n_values),
            "trials": self.trials,
            "seed": self.seed,
            "delta": self.delta,
            "budget": self.budget,
            "observable": self.observable if self.command == "sweep" else None,
            "alpha_override": self.alpha_override,
            "dt": self.dt if self.command == "limits" else None,
            "min_window": self.min_window if self.command == "limits" else None,
            "terminal_t": self.terminal_t if self.command == "limits" else None,
        }


@dataclass
class AggregateReport:
    """Cross-trial statistics plus a config echo; serializes to JSON or CSV."""

    config: dict
    per_n: list[dict]
    exponent_fit: dict | None = None
    per_trial: list[dict] | None = None
    samples: np.ndarray | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "config": self.config,
            "per_n": self.per_n,
            "exponent_fit": self.exponent_fit,
        }
        if self.per_trial is not None:
            out["per_trial"] = self.per_trial
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    CSV_COLUMNS = ("n", "trials", "mean", "median", "sd", "q25", "q75", "slope")

    def to_csv(self) -> str:
        slope = "" if self.exponent_fit is None else repr(self.exponent_fit["slope"])
        lines = [",".join(self.CSV_COLUMNS)]
        for row in self.per_n:
            lines.append(",".join([str(row["n"]), str(row["trials"]),
                                   repr(row["mean"]), repr(row["median"]),
                                   repr(row["sd"]), repr(row["q25"]),
                                   repr(row["q75"]), slope]))
        return "\n".join(lines) + "\n"


def _summary_row(n_value: int, values: np.ndarray) -> dict:
    return {
        "n": int(n_value),
        "trials": int(values.shape[0]),
        "mean": float(values.mean()),
        "median": float(np.median(values)),
        "sd": float(values.std(ddof=1)) if values.shape[0] > 1 else 0.0,
        "q25": float(np.quantile(values, 0.25)),
        "q75": float(np.quantile(values, 0.75)),
    }


def _sweep_trial(config: ExperimentConfig, n_value: int, trial: int) -> float:
    rng = trial_generator(config.seed, n_value, trial)
    obs = config.observable
    if obs == "max-domain":
        summary = sample_walk_summary(n_value, config.params, rng)
        return float(summary.excursion_lengths.max())
    if obs == "domain":
        summary = sample_walk_summary(n_value, config.params, rng, patch_budget=1)
        return float(summary.n_steps)
    if obs == "identified-fraction":
        summary = sample_walk_summary(n_value, config.params, rng,
                                      patch_budget=config.budget)
        return summary.n_steps / n_value
    threshold_step = int(n_value * config.delta)
    if obs == "patch-count":
        # patches added before deletion threshold_step+1; the walk beyond
        # that step cannot change the count, so stop there
        summary = sample_walk_summary(n_value, config.params, rng,
                                      horizon=threshold_step)
        return float(1 + summary.excursion_ends.shape[0])
    summary = sample_walk_summary(n_value, config.params, rng,
                                  freeze_after=threshold_step)
    return summary.n_steps / n_value  # giant-fraction


def _map_trials(config: ExperimentConfig, n_value: int, fn) -> np.ndarray:
    jobs = range(config.trials)
    if config.workers == 1:
        values = [fn(config, n_value, t) for t in jobs]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            values = list(pool.map(lambda t: fn(config, n_value, t), jobs))
    return np.asarray(values, dtype=np.float64)


def _run_sweep(config: ExperimentConfig, keep_trials: bool) -> AggregateReport:
    per_n = []
    per_trial = [] if keep_trials else None
    medians = []
    for n_value in config.n_values:
        values = _map_trials(config, n_value, _sweep_trial)
        per_n.append(_summary_row(n_value, values))
        medians.append(np.median(values))
        if keep_trials:
            per_trial.extend({"n": int(n_value), "trial": t, "value": float(v)}
                             for t, v in enumerate(values))
    fit = None
    if len(config.n_values) >= 3 and all(m > 0 for m in medians):
        f = fit_exponent(config.n_values, medians)
        fit = {"slope": f.slope, "stderr": f.stderr, "ci95": list(f.ci95),
               "target": None}
        report = classify(config.params)
        if config.alpha_override is not None:
            fit["target"] = float(config.alpha_override)
        elif report.alpha_k is not None:
            fit["target"] = float(report.alpha_k)
    return AggregateReport(config=config.echo(), per_n=per_n,
                           exponent_fit=fit, per_trial=per_trial)


def _run_limits(config: ExperimentConfig, keep_trials: bool) -> AggregateReport:
    report = classify(config.params)
    if report.first_noncritical_k is None:
        raise ValueError("limit walk needs a non-critical departure coefficient")
    k, mu = report.first_noncritical_k, report.mu_k
    if config.terminal_t is None:
        window = config.min_window
        if window is None:
            window = default_min_window(k, mu)

        def one_trial(cfg, n_value, trial):
            rng = trial_generator(cfg.seed, n_value, trial)
            return wk_infimum(k, mu, cfg.dt, rng, min_window=window)
    else:
        def one_trial(cfg, n_value, trial):
            rng = trial_generator(cfg.seed, n_value, trial)
            return float(wk_values_at(k, mu, cfg.terminal_t, cfg.dt, 1, rng)[0])

    values = _map_trials(config, 0, one_trial)
    per_n = [_summary_row(0, values)]
    per_trial = None
    if keep_trials:
        per_trial = [{"n": 0, "trial": t, "value": float(v)}
                     for t, v in enumerate(values)]
    return AggregateReport(config=config.echo(), per_n=per_n, per_trial=per_trial,
                           samples=values)


def run(config: ExperimentConfig, keep_trials: bool = False) -> AggregateReport:
    """Execute the configured experiment; byte-identical for equal (config, seed)."""
    config.validate()
    if config.command == "sweep":
        return _run_sweep(config, keep_trials)
    return _run_limits(config, keep_trials)
