"""Breadth-first ordering and walk over a materialized hypergraph.

The walk deletes vertices one per step; the children of a deleted vertex are
the unreached vertices joined to it by an edge that prior deletions have
collapsed down to a pair.  With C(i) children at step i the walk moves by
C(i) - 1, patches top it up whenever it would stall, and the vertices
identified from each patch appear as the excursions of the walk above its
past minima.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass

import numpy as np

from .collapse import _Incidence
from .hypergraph import Hypergraph

__all__ = [
    "WalkTrace",
    "ExcursionRecord",
    "GiantStats",
    "breadth_first_walk",
    "excursions",
    "excursion_lengths",
    "giant_excursion_stats",
    "write_trace_csv",
    "read_trace_csv",
]

ROOT_POLICIES = ("uniform-random", "lowest-index")


@dataclass
class WalkTrace:
    """Arrays of one walk: children C(1..n), walk Z(0..n), patches P(0..n).

    ``roots`` holds the steps whose vertex received a fresh patch.  For
    patch-frozen or budget-stopped walks, P is capped at the number of
    patches actually available, so Z(n) + P(n) = 0 marks the stall that
    ended the trace; everywhere else Z + P >= 1.
    """

    n_vertices: int
    children: np.ndarray
    z: np.ndarray
    p: np.ndarray
    roots: np.ndarray
    stop_reason: str = "completed"

    @property
    def n(self) -> int:
        return int(self.children.shape[0])

    @classmethod
    def from_children(cls, children, n_vertices: int, stop_reason: str = "completed",
                      patch_cap: int | None = None) -> "WalkTrace":
        children = np.asarray(children, dtype=np.int64)
        n = children.shape[0]
        z = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(children - 1, out=z[1:])
        running_min = np.minimum.accumulate(z)
        p = 1 - running_min
        if patch_cap is not None:
            np.minimum(p, patch_cap, out=p)
        newmin = np.flatnonzero(np.diff(running_min) < 0) + 1
        root_steps = [1] if n >= 1 else []
        root_steps.extend(int(s) + 1 for s in newmin if s < n)
        return cls(
            n_vertices=int(n_vertices),
            children=children,
            z=z,
            p=p,
            roots=np.asarray(root_steps, dtype=np.int64),
            stop_reason=stop_reason,
        )

    def new_minimum_steps(self) -> np.ndarray:
        running_min = np.minimum.accumulate(self.z)
        return np.flatnonzero(np.diff(running_min) < 0) + 1

    def validate(self) -> None:
        """Assert the defining trace invariants (tests and debugging)."""
        n = self.n
        assert self.z[0] == 0 and self.p[0] == 1
        assert np.array_equal(self.z[1:], np.cumsum(self.children - 1))
        # P follows 1 - min Z, capped at the patch supply when one was set;
        # the cap can only bind at the trace's final step.
        formula_p = 1 - np.minimum.accumulate(self.z)
        assert np.array_equal(self.p, np.minimum(formula_p, int(self.p.max())))
        assert np.array_equal(self.p[:n], formula_p[:n])
        if n:
            assert int((self.z + self.p)[:n].min()) >= 1
        assert int(self.children.sum()) + len(self.roots) == n


def breadth_first_walk(hypergraph: Hypergraph, rng: np.random.Generator | None = None,
                       root_policy: str = "uniform-random") -> WalkTrace:
    """Walk the hypergraph in breadth-first order and record the trace.

    Children discovered at the same step are appended in original label
    order.  When the frontier empties, a fresh root is patched: either the
    lowest unreached label (deterministic) or a uniformly random unreached
    vertex, which is the exchangeable choice the distributional limits use.
    """
    if root_policy not in ROOT_POLICIES:
        raise ValueError(f"unknown root policy {root_policy!r}")
    if root_policy == "uniform-random" and rng is None:
        raise ValueError("uniform-random root policy needs an rng")

    n = hypergraph.n_vertices
    index = _Incidence(hypergraph)
    remaining = index.edge_sizes.copy()
    # 0 = unreached, 1 = reached (queued), 2 = deleted
    status = np.zeros(n, dtype=np.uint8)
    queue: deque[int] = deque()
    children = np.empty(n, dtype=np.int64)
    roots = []
    lowest_unreached = 0

    for step in range(1, n + 1):
        if not queue:
            if root_policy == "lowest-index":
                while status[lowest_unreached] != 0:
                    lowest_unreached += 1
                v = lowest_unreached
            else:
                v = -1
                for _ in range(64):
                    cand = int(rng.integers(n))
                    if status[cand] == 0:
                        v = cand
                        break
                if v < 0:
                    free = np.flatnonzero(status == 0)
                    v = int(free[rng.integers(free.shape[0])])
            status[v] = 1
            queue.append(v)
            roots.append(step)
        v = queue.popleft()
        status[v] = 2
        kids = set()
        for e in index.incident_edges(v):
            remaining[e] -= 1
            if remaining[e] == 1:
                for w in index.members(e):
                    if status[w] != 2:
                        if status[w] == 0:
                            kids.add(int(w))
                        break
        ordered = sorted(kids)
        for w in ordered:
            status[w] = 1
            queue.append(w)
        children[step - 1] = len(ordered)

    trace = WalkTrace.from_children(children, n, stop_reason="completed")
    assert np.array_equal(trace.roots, np.asarray(roots, dtype=np.int64))
    return trace


@dataclass(frozen=True)
class ExcursionRecord:
    """One excursion above the past minimum: one patch's identified set."""

    start_step: int
    length: int
    is_giant_candidate: bool = False


def excursion_lengths(trace: WalkTrace) -> np.ndarray:
    """Lengths of the closed excursions, in walk order."""
    boundaries = trace.new_minimum_steps()
    return np.diff(np.concatenate([[0], boundaries]))


def excursions(trace: WalkTrace) -> list[ExcursionRecord]:
    """Split a complete trace at its new-minimum steps.

    The trace must end on a closed excursion (walks run to completion or
    stopped by the patch rules always do); otherwise the last identified set
    is still open and the split would be meaningless.
    """
    n = trace.n
    if n == 0:
        return []
    boundaries = trace.new_minimum_steps()
    if boundaries.size == 0 or boundaries[-1] != n:
        raise ValueError("incomplete trace: final excursion is still open")
    lengths = np.diff(np.concatenate([[0], boundaries]))
    giant = int(np.argmax(lengths))
    records = []
    start = 1
    for idx, length in enumerate(lengths):
        records.append(ExcursionRecord(start_step=start, length=int(length),
                                       is_giant_candidate=(idx == giant)))
        start += int(length)
    return records


@dataclass(frozen=True)
class GiantStats:
    start_step: int
    length: int
    first_return_after_warmup: int | None


def giant_excursion_stats(trace: WalkTrace, warmup_steps: int = 0,
                          reference_level: float | None = None) -> GiantStats:
    """Longest excursion (an open tail counts) plus the post-warmup return step.

    The return step is the first step >= warmup at which the walk is at or
    below the reference level, by default the running minimum at warmup.
    """
    n = trace.n
    if warmup_steps >= n:
        raise ValueError("warmup must be shorter than the trace")
    boundaries = trace.new_minimum_steps()
    segments = np.diff(np.concatenate([[0], boundaries]))
    starts = np.concatenate([[1], boundaries[:-1] + 1]) if boundaries.size else np.array([1])
    if boundaries.size == 0:
        segments = np.array([n])
    elif boundaries[-1] != n:  # open tail
        segments = np.concatenate([segments, [n - boundaries[-1]]])
        starts = np.concatenate([starts, [boundaries[-1] + 1]])
    best = int(np.argmax(segments))

    if reference_level is None:
        reference_level = float(np.minimum.accumulate(trace.z)[warmup_steps])
    hits = np.flatnonzero(trace.z[warmup_steps:] <= reference_level)
    first_return = int(hits[0]) + warmup_steps if hits.size else None
    return GiantStats(start_step=int(starts[best]), length=int(segments[best]),
                      first_return_after_warmup=first_return)


def write_trace_csv(trace: WalkTrace, sink) -> None:
    """Trace CSV: header "i,C,Z,P,is_root"; row 0 has Z(0), P(0) and no C."""
    own = isinstance(sink, (str, os.PathLike))
    fh = open(sink, "w", encoding="utf-8", newline="\n") if own else sink
    try:
        fh.write(f"# n_vertices={trace.n_vertices} stop_reason={trace.stop_reason}\n")
        fh.write("i,C,Z,P,is_root\n")
        fh.write(f"0,,{trace.z[0]},{trace.p[0]},\n")
        root_set = set(int(r) for r in trace.roots)
        for i in range(1, trace.n + 1):
            fh.write(f"{i},{trace.children[i - 1]},{trace.z[i]},{trace.p[i]},"
                     f"{1 if i in root_set else 0}\n")
    finally:
        if own:
            fh.close()


def read_trace_csv(source) -> WalkTrace:
    own = isinstance(source, (str, os.PathLike))
    fh = open(source, "r", encoding="utf-8") if own else source
    try:
        n_vertices = None
        stop_reason = "completed"
        line = fh.readline()
        if line.startswith("#"):
            for token in line[1:].split():
                key, _, value = token.partition("=")
                if key == "n_vertices":
                    n_vertices = int(value)
                elif key == "stop_reason":
                    stop_reason = value
            line = fh.readline()
        if line.strip() != "i,C,Z,P,is_root":
            raise ValueError(f"unexpected trace header {line.strip()!r}")
        rows = [row.strip().split(",") for row in fh if row.strip()]
        children = np.array([int(r[1]) for r in rows[1:]], dtype=np.int64)
        z = np.array([int(r[2]) for r in rows], dtype=np.int64)
        p = np.array([int(r[3]) for r in rows], dtype=np.int64)
        roots = np.array([int(r[0]) for r in rows[1:] if r[4] == "1"], dtype=np.int64)
        if n_vertices is None:
            n_vertices = children.shape[0]
        return WalkTrace(n_vertices=n_vertices, children=children, z=z, p=p,
                         roots=roots, stop_reason=stop_reason)
    finally:
        if own:
            fh.close()
