"""Sequential simulation of the breadth-first walk without a hypergraph.

Conditional on the walk state after i-1 deletions, the number of children of
the i-th deleted vertex is Binomial(N - (i-1) - Z(i-1) - P(i-1), rho(N, i-1))
with rho the collapsed two-edge presence probability.  Iterating that law
reproduces the walk of a materialized Poisson hypergraph exactly, at O(K)
work and O(1) state per step, which is what makes desk-scale sweeps at
N = 1e6..1e7 practical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .betas import BetaParams, two_edge_rate_coefficients
from .walk import WalkTrace

__all__ = [
    "WalkSummary",
    "sample_walk",
    "sample_modified_walk",
    "sample_walk_summary",
    "sample_domain_size",
    "sample_max_domain",
]

_STOP_NAMES = {
    _kernels.STOP_HORIZON: "horizon",
    _kernels.STOP_BUDGET: "budget-exhausted",
    _kernels.STOP_FROZEN: "frozen",
}


def _run(n_vertices, params, rng, horizon, patch_limit, freeze_step, record_children):
    if n_vertices < 1:
        raise ValueError("need at least one vertex")
    if horizon is None:
        horizon = n_vertices
    if not 0 <= horizon <= n_vertices:
        raise ValueError(f"horizon must lie in [0, N], got {horizon}")
    coef = two_edge_rate_coefficients(params, n_vertices)
    return _kernels.run_walk(rng, coef, n_vertices, horizon,
                             patch_limit=patch_limit, freeze_step=freeze_step,
                             record_children=record_children), horizon


def _stop_name(reason: int, n_steps: int, horizon: int, n_vertices: int) -> str:
    if reason == _kernels.STOP_HORIZON:
        return "completed" if n_steps == horizon == n_vertices else "horizon"
    return _STOP_NAMES[reason]


def sample_walk(n_vertices: int, params: BetaParams, rng: np.random.Generator,
                horizon: int | None = None,
                patch_budget: int | None = None) -> WalkTrace:
    """Draw the walk from its exact conditional law.

    With ``patch_budget`` the walk stops at the step that exhausts the budget
    (the next patch would be one too many); the trace's patch counter is then
    capped at the budget.
    """
    if patch_budget is not None and patch_budget < 1:
        raise ValueError("patch budget must be >= 1")
    limit = -1 if patch_budget is None else patch_budget
    (children, _, n_steps, reason), horizon = _run(
        n_vertices, params, rng, horizon, limit, -1, True)
    return WalkTrace.from_children(
        children, n_vertices,
        stop_reason=_stop_name(reason, n_steps, horizon, n_vertices),
        patch_cap=patch_budget)


def sample_modified_walk(n_vertices: int, params: BetaParams, rng: np.random.Generator,
                         delta: float) -> WalkTrace:
    """Walk with patches frozen after step floor(N*delta).

    After the freeze step no patch is added; the first time the walk drops
    below its past minimum it stops evolving (the trace ends there and is
    read as constant beyond).  ``delta = 1`` reproduces sample_walk exactly.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    freeze = int(n_vertices * delta)
    (children, _, n_steps, reason), horizon = _run(
        n_vertices, params, rng, None, -1, freeze, True)
    cap = None
    if reason == _kernels.STOP_FROZEN:
        cap = int(1 - np.minimum.accumulate(
            np.concatenate([[0], np.cumsum(np.asarray(children[:freeze]) - 1)])).min())
    return WalkTrace.from_children(
        children, n_vertices,
        stop_reason=_stop_name(reason, n_steps, horizon, n_vertices),
        patch_cap=cap)


@dataclass(frozen=True)
class WalkSummary:
    """Streaming view of a walk: excursion boundaries only, O(1) walk state."""

    n_vertices: int
    n_steps: int
    stop_reason: str
    excursion_ends: np.ndarray  # steps at which the walk set a new minimum

    @property
    def excursion_lengths(self) -> np.ndarray:
        return np.diff(np.concatenate([[0], self.excursion_ends]))

    @property
    def patches_used(self) -> int:
        """Patches consumed by the closed excursions (1 each)."""
        return int(self.excursion_ends.shape[0])


def sample_walk_summary(n_vertices: int, params: BetaParams, rng: np.random.Generator,
                        horizon: int | None = None,
                        patch_budget: int | None = None,
                        freeze_after: int | None = None) -> WalkSummary:
    """Run the walk without storing per-step children (streaming mode)."""
    if patch_budget is not None and freeze_after is not None:
        raise ValueError("budget and freeze modes are exclusive")
    limit = -1 if patch_budget is None else patch_budget
    freeze = -1 if freeze_after is None else freeze_after
    (_, newmin, n_steps, reason), horizon = _run(
        n_vertices, params, rng, horizon, limit, freeze, False)
    return WalkSummary(
        n_vertices=n_vertices,
        n_steps=int(n_steps),
        stop_reason=_stop_name(reason, n_steps, horizon, n_vertices),
        excursion_ends=newmin,
    )


def sample_domain_size(n_vertices: int, params: BetaParams,
                       rng: np.random.Generator) -> int:
    """Size of the identifiable set of a single uniformly placed patch.

    Exchangeability makes the first excursion of the walk distribute exactly
    as the domain of an arbitrary vertex.
    """
    summary = sample_walk_summary(n_vertices, params, rng, patch_budget=1)
    return int(summary.n_steps)


def sample_max_domain(n_vertices: int, params: BetaParams,
                      rng: np.random.Generator) -> int:
    """Largest identified set over a full sequential patching pass."""
    summary = sample_walk_summary(n_vertices, params, rng)
    return int(summary.excursion_lengths.max())
