"""Limit objects and the statistics comparing finite-N runs against them.

Covers the drifted Brownian limit walk, rescaling of finite traces onto its
clock, Kolmogorov-Smirnov distances, log-log exponent fits, and the fluid
and fluctuation comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import linregress

from . import _kernels
from .betas import BetaParams, fluctuation_variance, t_star, z_curve, z_tilde
from .walk import WalkTrace

__all__ = [
    "WkPath",
    "RescaledWalk",
    "ExponentFit",
    "FluctuationEnsemble",
    "default_min_window",
    "simulate_wk",
    "wk_infimum",
    "wk_infimum_ensemble",
    "wk_values_at",
    "rescale_trace",
    "ks_statistic",
    "fit_exponent",
    "fluid_deviation",
    "fluctuation_extract",
    "write_curve_csv",
]

_SEGMENT_STEPS = 65_536
_MAX_ADAPTIVE_STEPS = 2 ** 33


def default_min_window(k: int, mu_k: float, base: float = 50.0) -> float:
    """Quiet window before the running minimum is declared final.

    ``base`` applies at unit drift; the window stretches by the natural time
    scale mu_k**(-2/(2k-3)) at which the drift term starts dominating the
    Brownian fluctuations.
    """
    if mu_k <= 0:
        raise ValueError("adaptive stopping needs positive drift")
    return base * mu_k ** (-2.0 / (2 * k - 3))


@dataclass
class WkPath:
    """Euler path of the limit walk B(t) + mu t^{k-1}/(k-1).

    Gaussian increments make grid values exact in law; the running minimum
    additionally samples each between-grid Brownian bridge minimum, so
    ``running_min`` is unbiased rather than grid-limited.
    """

    k: int
    mu: float
    dt: float
    values: np.ndarray  # path at 0, dt, 2dt, ...
    running_min: float
    argmin_time: float
    bridge_corrected: bool = True

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) * self.dt

    def value_at(self, t: float) -> float:
        idx = int(round(t / self.dt))
        if not 0 <= idx < self.values.shape[0]:
            raise ValueError(f"t = {t} beyond simulated horizon")
        return float(self.values[idx])


def _segments(rng, mu, k, dt, n_steps, bridge, collect):
    """Drive the kernel over fixed-size segments; optionally keep values."""
    x, rmin, last_min = 0.0, 0.0, 0
    step = 0
    chunks = [np.zeros(1)] if collect else None
    buf = np.empty(min(n_steps, _SEGMENT_STEPS) or 1, dtype=np.float64)
    while step < n_steps:
        m = min(_SEGMENT_STEPS, n_steps - step)
        out = buf[:m] if not collect else np.empty(m, dtype=np.float64)
        x, rmin, last_min = _kernels.wk_segment(
            rng, out, mu, k, dt, step, x, rmin, last_min, bridge)
        if collect:
            chunks.append(out)
        step += m
    values = np.concatenate(chunks) if collect else None
    return values, x, rmin, last_min, step


def simulate_wk(k: int, mu_k: float, dt: float, rng: np.random.Generator,
                min_window: float | None = None, horizon: float | None = None,
                bridge: bool = True) -> WkPath:
    """Simulate the limit walk, adaptively unless a fixed horizon is given.

    Adaptive mode extends the path until the running minimum has not moved
    for ``min_window`` time units (positive drift required: with mu_k <= 0
    the infimum is -infinity in law and the walk would never settle).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if k < 2:
        raise ValueError("k must be >= 2")
    if horizon is not None:
        n_steps = int(round(horizon / dt))
        values, _, rmin, last_min, _ = _segments(rng, mu_k, k, dt, n_steps, bridge, True)
        return WkPath(k=k, mu=mu_k, dt=dt, values=values, running_min=rmin,
                      argmin_time=last_min * dt, bridge_corrected=bridge)

    if mu_k <= 0:
        raise ValueError("adaptive stopping needs mu_k > 0 (infimum diverges otherwise)")
    if min_window is None:
        min_window = default_min_window(k, mu_k)
    window_steps = int(math.ceil(min_window / dt))
    x, rmin, last_min = 0.0, 0.0, 0
    step = 0
    chunks = [np.zeros(1)]
    while step - last_min < window_steps:
        m = min(_SEGMENT_STEPS, window_steps - (step - last_min))
        out = np.empty(m, dtype=np.float64)
        x, rmin, last_min = _kernels.wk_segment(
            rng, out, mu_k, k, dt, step, x, rmin, last_min, bridge)
        chunks.append(out)
        step += m
        if step > _MAX_ADAPTIVE_STEPS:
            raise RuntimeError("adaptive horizon failed to settle; increase dt or drift")
    return WkPath(k=k, mu=mu_k, dt=dt, values=np.concatenate(chunks),
                  running_min=rmin, argmin_time=last_min * dt,
                  bridge_corrected=bridge)


def wk_infimum(k: int, mu_k: float, dt: float, rng: np.random.Generator,
               min_window: float | None = None, bridge: bool = True) -> float:
    """One sample of -inf_{t>=0} of the limit walk, without storing the path."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if mu_k <= 0:
        raise ValueError("adaptive stopping needs mu_k > 0 (infimum diverges otherwise)")
    if min_window is None:
        min_window = default_min_window(k, mu_k)
    window_steps = int(math.ceil(min_window / dt))
    x, rmin, last_min = 0.0, 0.0, 0
    step = 0
    buf = np.empty(_SEGMENT_STEPS, dtype=np.float64)
    while step - last_min < window_steps:
        m = min(_SEGMENT_STEPS, window_steps - (step - last_min))
        x, rmin, last_min = _kernels.wk_segment(
            rng, buf[:m], mu_k, k, dt, step, x, rmin, last_min, bridge)
        step += m
        if step > _MAX_ADAPTIVE_STEPS:
            raise RuntimeError("adaptive horizon failed to settle; increase dt or drift")
    return -rmin


def wk_infimum_ensemble(k: int, mu_k: float, dt: float, n_paths: int,
                        rng: np.random.Generator, min_window: float | None = None,
                        bridge: bool = True) -> np.ndarray:
    """Independent -inf samples; the limit law of the rescaled patch count."""
    return np.array([wk_infimum(k, mu_k, dt, rng, min_window, bridge)
                     for _ in range(n_paths)])


def wk_values_at(k: int, mu_k: float, t: float, dt: float, n_paths: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Path values at time t across independent Euler paths."""
    n_steps = int(round(t / dt))
    out = np.empty(n_paths, dtype=np.float64)
    buf = np.empty(_SEGMENT_STEPS, dtype=np.float64)
    for i in range(n_paths):
        x, rmin, last_min = 0.0, 0.0, 0
        step = 0
        while step < n_steps:
            m = min(_SEGMENT_STEPS, n_steps - step)
            x, rmin, last_min = _kernels.wk_segment(
                rng, buf[:m], mu_k, k, dt, step, x, rmin, last_min, False)
            step += m
        out[i] = x
    return out


@dataclass
class RescaledWalk:
    """Finite trace read on the limit clock: t -> N^{-a/2} Z(floor(N^a t))."""

    trace: WalkTrace
    alpha: float

    def __call__(self, t):
        n_alpha = float(self.trace.n_vertices) ** self.alpha
        idx = np.floor(n_alpha * np.asarray(t, dtype=np.float64)).astype(np.int64)
        if np.any(idx < 0) or np.any(idx > self.trace.n):
            raise ValueError("time beyond the simulated horizon")
        out = self.trace.z[idx] * float(self.trace.n_vertices) ** (-self.alpha / 2.0)
        if np.isscalar(t):
            return float(out)
        return out


def rescale_trace(trace: WalkTrace, alpha: float) -> RescaledWalk:
    return RescaledWalk(trace=trace, alpha=float(alpha))


def ks_statistic(sample_a, sample_b=None, cdf: Callable | None = None) -> float:
    """Kolmogorov-Smirnov sup-distance, two-sample or against a cdf.

    The two-sample form evaluates both empirical cdfs at every observed
    point, which handles ties (lattice-valued walks) exactly.
    """
    a = np.sort(np.asarray(sample_a, dtype=np.float64))
    if a.size == 0:
        raise ValueError("empty sample")
    if (sample_b is None) == (cdf is None):
        raise ValueError("provide exactly one of sample_b or cdf")
    if cdf is not None:
        grid = np.arange(1, a.size + 1) / a.size
        theo = np.asarray(cdf(a), dtype=np.float64)
        return float(np.maximum(np.abs(grid - theo),
                                np.abs(grid - 1.0 / a.size - theo)).max())
    b = np.sort(np.asarray(sample_b, dtype=np.float64))
    if b.size == 0:
        raise ValueError("empty sample")
    points = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, points, side="right") / a.size
    cdf_b = np.searchsorted(b, points, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    stderr: float
    ci95: tuple[float, float]


def fit_exponent(n_values: Sequence[float], statistics: Sequence[float]) -> ExponentFit:
    """Least-squares slope of log(statistic) against log(N)."""
    n_arr = np.asarray(n_values, dtype=np.float64)
    s_arr = np.asarray(statistics, dtype=np.float64)
    if np.unique(n_arr).size < 3:
        raise ValueError("need at least 3 distinct N values for an exponent fit")
    if np.any(n_arr <= 0) or np.any(s_arr <= 0):
        raise ValueError("log-log fit needs positive inputs")
    result = linregress(np.log(n_arr), np.log(s_arr))
    stderr = float(result.stderr) if np.isfinite(result.stderr) else 0.0
    band = 1.96 * stderr
    return ExponentFit(slope=float(result.slope), intercept=float(result.intercept),
                       stderr=stderr, ci95=(float(result.slope) - band,
                                            float(result.slope) + band))


def fluid_deviation(trace: WalkTrace, params: BetaParams, t_max: float = 1.0,
                    t_star_value: float | None = None) -> float:
    """sup over the step grid of |Z(floor(Nt))/N - z(t ^ t*)|.

    A frozen trace is read as constant beyond its final step, matching the
    stopped walk the fluid limit describes.
    """
    if t_star_value is None:
        t_star_value = t_star(params)
    n_vertices = trace.n_vertices
    top = int(n_vertices * t_max)
    z_path = trace.z
    if top > trace.n:
        z_path = np.concatenate([z_path, np.full(top - trace.n, z_path[-1])])
    idx = np.arange(top + 1)
    curve = z_tilde(params, idx / n_vertices, t_star_value)
    return float(np.abs(z_path[:top + 1] / n_vertices - curve).max())


def write_curve_csv(sink, t, value) -> None:
    """Plot-ready curve as "t,value" rows."""
    lines = ["t,value"]
    lines.extend(f"{repr(float(a))},{repr(float(b))}" for a, b in zip(t, value))
    text = "\n".join(lines) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


@dataclass
class FluctuationEnsemble:
    """Centered, sqrt(N)-scaled walk values on a fixed time grid."""

    grid: np.ndarray
    values: np.ndarray  # (trials, grid)
    variance: np.ndarray
    trials: int

    def predicted_variance(self, params: BetaParams) -> np.ndarray:
        return np.array([fluctuation_variance(params, float(t)) for t in self.grid])

    def to_csv(self) -> str:
        lines = ["t,mean,variance,count"]
        means = self.values.mean(axis=0)
        for t, m, v in zip(self.grid, means, self.variance):
            lines.append(f"{repr(float(t))},{repr(float(m))},"
                         f"{repr(float(v))},{self.trials}")
        return "\n".join(lines) + "\n"


def fluctuation_extract(traces: Sequence[WalkTrace], params: BetaParams,
                        grid) -> FluctuationEnsemble:
    """(Z(floor(Nt)) - N z(t))/sqrt(N) per trace on the grid, with the variance curve.

    The grid must stay strictly below t*, where the unstopped fluid limit and
    its fluctuation law apply.
    """
    grid = np.asarray(grid, dtype=np.float64)
    ts = t_star(params)
    if np.any(grid < 0) or np.any(grid >= ts):
        raise ValueError(f"grid must lie in [0, t*) with t* = {ts:.6g}")
    rows = []
    for trace in traces:
        n_vertices = trace.n_vertices
        idx = (n_vertices * grid).astype(np.int64)
        if idx.max(initial=0) > trace.n:
            raise ValueError("trace too short for the requested grid")
        # Evaluate z at the realized grid points to avoid O(1/sqrt(N)) rounding bias.
        centered = trace.z[idx] - n_vertices * z_curve(params, idx / n_vertices)
        rows.append(centered / math.sqrt(n_vertices))
    values = np.asarray(rows)
    variance = values.var(axis=0, ddof=1) if len(rows) > 1 else np.zeros(grid.shape)
    return FluctuationEnsemble(grid=grid, values=values, variance=variance,
                               trials=len(rows))
