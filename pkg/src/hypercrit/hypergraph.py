"""Poisson random hypergraphs: sampling and edge-list persistence.

A hypergraph is a vertex count plus a multiset of hyperedges; each edge is a
strictly increasing vertex sequence of size >= 2.  Sampling draws, for every
supported size k, a Poisson(N*beta_k) total count and that many uniform
k-subsets, which by Poisson splitting gives every fixed k-set an independent
Poisson(N*beta_k / C(N,k)) multiplicity.
"""

from __future__ import annotations

import io
import os
from typing import Iterable, Iterator, Sequence

import numpy as np

from .betas import BetaParams

__all__ = ["Hypergraph", "EdgeListParseError", "sample", "save", "load"]


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the 1-based offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Hypergraph:
    """Immutable vertex count plus hyperedge multiset, grouped by edge size."""

    __slots__ = ("n_vertices", "edges_by_size")

    def __init__(self, n_vertices: int, edges: Iterable[Sequence[int]] = ()):
        if n_vertices < 1:
            raise ValueError("need at least one vertex")
        self.n_vertices = int(n_vertices)
        grouped: dict[int, list] = {}
        for edge in edges:
            tup = tuple(int(v) for v in edge)
            grouped.setdefault(len(tup), []).append(tup)
        by_size: dict[int, np.ndarray] = {}
        for k, rows in grouped.items():
            arr = np.sort(np.asarray(rows, dtype=np.int64), axis=1)
            self._validate(arr, k)
            arr.setflags(write=False)  # shared read-only across threads
            by_size[k] = arr
        self.edges_by_size = by_size

    @classmethod
    def _from_arrays(cls, n_vertices: int, by_size: dict[int, np.ndarray]) -> "Hypergraph":
        h = cls.__new__(cls)
        h.n_vertices = int(n_vertices)
        h.edges_by_size = {k: arr for k, arr in by_size.items() if arr.shape[0]}
        for arr in h.edges_by_size.values():
            arr.setflags(write=False)
        return h

    def _validate(self, arr: np.ndarray, k: int) -> None:
        if k < 2:
            raise ValueError("hyperedges have size >= 2")
        if arr.size and (arr.min() < 0 or arr.max() >= self.n_vertices):
            raise ValueError("vertex id out of range")
        if np.any(arr[:, 1:] == arr[:, :-1]):
            raise ValueError("hyperedge vertices must be distinct")

    @property
    def edge_count(self) -> int:
        return sum(arr.shape[0] for arr in self.edges_by_size.values())

    @property
    def total_edge_size(self) -> int:
        """Sum of |e| over all edges; the collapse work bound."""
        return sum(arr.size for arr in self.edges_by_size.values())

    @property
    def max_edge_size(self) -> int:
        return max(self.edges_by_size, default=0)

    def edges(self) -> Iterator[tuple[int, ...]]:
        for k in sorted(self.edges_by_size):
            for row in self.edges_by_size[k]:
                yield tuple(int(v) for v in row)

    def sorted_edges(self) -> list[tuple[int, ...]]:
        """Canonical multiset form: edges as tuples, lexicographically sorted."""
        return sorted(self.edges())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n_vertices == other.n_vertices
                and self.sorted_edges() == other.sorted_edges())

    def __repr__(self) -> str:
        return f"Hypergraph(n_vertices={self.n_vertices}, edges={self.edge_count})"


def _uniform_ksubsets(rng: np.random.Generator, n: int, k: int, m: int) -> np.ndarray:
    """m uniform k-subsets of range(n), rows sorted ascending, no rejection.

    Draws ordinal positions o_j ~ Uniform{0..n-1-j} and shifts each past the
    previously chosen values, the classic sequential-selection construction.
    """
    chosen = np.empty((m, 0), dtype=np.int64)
    for j in range(k):
        v = rng.integers(0, n - j, size=m)
        for p in range(j):
            v += v >= chosen[:, p]
        chosen = np.sort(np.concatenate([chosen, v[:, None]], axis=1), axis=1)
    return chosen


def sample(n_vertices: int, params: BetaParams, rng: np.random.Generator) -> Hypergraph:
    """Draw a Poisson random hypergraph on ``n_vertices`` vertices.

    Requires N >= K so that k-subsets exist for every supported size.
    """
    if n_vertices < params.max_size:
        raise ValueError(
            f"need N >= K = {params.max_size}, got N = {n_vertices}")
    by_size: dict[int, np.ndarray] = {}
    for k in range(2, params.max_size + 1):
        beta_k = params.beta(k)
        if beta_k == 0.0:
            continue
        count = int(rng.poisson(n_vertices * beta_k))
        if count:
            by_size[k] = _uniform_ksubsets(rng, n_vertices, k, count)
    return Hypergraph._from_arrays(n_vertices, by_size)


def save(hypergraph: Hypergraph, sink) -> None:
    """Write the edge-list format: "N=<int>" header, one edge per line."""
    own = isinstance(sink, (str, os.PathLike))
    fh = open(sink, "w", encoding="utf-8", newline="\n") if own else sink
    try:
        fh.write(f"N={hypergraph.n_vertices}\n")
        for edge in hypergraph.edges():
            fh.write(" ".join(str(v) for v in edge) + "\n")
    finally:
        if own:
            fh.close()


def load(source) -> Hypergraph:
    """Parse the edge-list format; raises EdgeListParseError with line numbers."""
    own = isinstance(source, (str, os.PathLike))
    fh = open(source, "r", encoding="utf-8") if own else source
    try:
        header = fh.readline()
        if not header.startswith("N=") or not header[2:].strip().isdigit():
            raise EdgeListParseError(1, f"expected header 'N=<integer>', got {header.strip()!r}")
        n_vertices = int(header[2:].strip())
        if n_vertices < 1:
            raise EdgeListParseError(1, "need at least one vertex")
        edges = []
        for line_no, line in enumerate(fh, start=2):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                vertices = [int(part) for part in text.split()]
            except ValueError:
                raise EdgeListParseError(line_no, f"non-integer vertex in {text!r}") from None
            if len(vertices) < 2:
                raise EdgeListParseError(line_no, "edge must have at least 2 vertices")
            if any(v < 0 or v >= n_vertices for v in vertices):
                raise EdgeListParseError(line_no, "vertex id out of range")
            if any(a >= b for a, b in zip(vertices, vertices[1:])):
                raise EdgeListParseError(line_no, "vertex ids must be strictly increasing")
            edges.append(tuple(vertices))
        return Hypergraph(n_vertices, edges)
    finally:
        if own:
            fh.close()


def loads(text: str) -> Hypergraph:
    return load(io.StringIO(text))


def dumps(hypergraph: Hypergraph) -> str:
    buf = io.StringIO()
    save(hypergraph, buf)
    return buf.getvalue()
