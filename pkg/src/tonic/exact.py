"""Exact triangle counts used as ground truth and as predictor inputs."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .stream import DELETE, INSERT, Edge, StreamEvent


@dataclass
class ExactCounts:
    """Global count, non-zero local counts and (optionally) heaviness of every edge.

    ``per_edge`` covers every edge of the graph, zero-heaviness ones included,
    because predictor rankings need the full edge universe.
    """

    global_count: int = 0
    local: dict[int, int] = field(default_factory=dict)
    per_edge: dict[Edge, int] | None = None

    @property
    def m(self) -> int:
        return 0 if self.per_edge is None else len(self.per_edge)


def adjacency(edges: Iterable[Edge]) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = defaultdict(set)
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def common_neighbors(adj, u: int, v: int) -> list[int]:
    a, b = adj.get(u, ()), adj.get(v, ())
    if len(a) > len(b):
        a, b = b, a
    return [w for w in a if w in b]


def count_exact(edges: Iterable[Edge], per_edge: bool = False) -> ExactCounts:
    edges = list(edges)
    adj = adjacency(edges)
    local: dict[int, int] = defaultdict(int)
    heaviness: dict[Edge, int] | None = {} if per_edge else None
    total = 0
    for u, v in edges:
        common = common_neighbors(adj, u, v)
        if heaviness is not None:
            heaviness[(u, v)] = len(common)
        hi = v if v > u else u
        # each triangle is reported once, from its lexicographically smallest edge
        for w in common:
            if w > hi:
                total += 1
                local[u] += 1
                local[v] += 1
                local[w] += 1
    return ExactCounts(total, dict(local), heaviness)


def count_wr_covered(stream: Iterable[StreamEvent], wr_size: int) -> dict[Edge, int]:
    """Per-edge number of triangles caught while the edge sat in a recency window.

    The window holds the ``wr_size`` edges preceding the current arrival. When
    an arrival closes triangle {u, v, w}, each earlier edge of the triangle that
    is still in the window is credited, and so is the arriving edge itself
    (it enters the window immediately) provided ``wr_size >= 1``.
    """
    if wr_size < 0:
        raise ValueError("wr_size must be non-negative")
    adj: dict[int, set[int]] = defaultdict(set)
    window: deque[Edge] = deque()
    in_window: set[Edge] = set()
    covered: dict[Edge, int] = {}
    for ev in stream:
        if ev.sign != INSERT:
            raise ValueError("count_wr_covered expects an insertion-only stream")
        u, v = ev.edge
        covered.setdefault(ev.edge, 0)
        for w in common_neighbors(adj, u, v):
            for e in ((u, w) if u < w else (w, u), (v, w) if v < w else (w, v)):
                if e in in_window:
                    covered[e] += 1
            if wr_size:
                covered[ev.edge] += 1
        adj[u].add(v)
        adj[v].add(u)
        if wr_size:
            window.append(ev.edge)
            in_window.add(ev.edge)
            if len(window) > wr_size:
                in_window.discard(window.popleft())
    return covered


def exact_prefix_counts(events: Sequence[StreamEvent], at: Iterable[int]) -> dict[int, int]:
    """Exact global count after each requested prefix length of an FD stream."""
    wanted = set(at)
    adj: dict[int, set[int]] = defaultdict(set)
    total = 0
    out: dict[int, int] = {}
    if 0 in wanted:
        out[0] = 0
    for t, ev in enumerate(events, 1):
        u, v = ev.edge
        if ev.sign == INSERT:
            if v not in adj[u]:
                total += len(common_neighbors(adj, u, v))
                adj[u].add(v)
                adj[v].add(u)
        elif ev.sign == DELETE and v in adj[u]:
            adj[u].discard(v)
            adj[v].discard(u)
            total -= len(common_neighbors(adj, u, v))
        if t in wanted:
            out[t] = total
    return out


def dump_exact_counts(path, counts: ExactCounts) -> None:
    with open(path, "w") as fh:
        fh.write(f"global {counts.global_count}\n")
        for u in sorted(counts.local):
            fh.write(f"node {u} {counts.local[u]}\n")
        if counts.per_edge is not None:
            for (u, v) in sorted(counts.per_edge):
                fh.write(f"edge {u} {v} {counts.per_edge[(u, v)]}\n")
