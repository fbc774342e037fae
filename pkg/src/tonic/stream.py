"""Edge-stream data model, edge-list ingestion and fully dynamic stream synthesis."""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

INSERT = 1
DELETE = -1

Edge = tuple[int, int]

_SIGN_TOKENS = {"+": INSERT, "1": INSERT, "+1": INSERT, "-": DELETE, "-1": DELETE}


class StreamParseError(ValueError):
    """Raised for malformed stream files; carries the offending line number."""

    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


class StreamEvent(NamedTuple):
    edge: Edge
    sign: int
    t: int


@dataclass
class IngestStats:
    n: int = 0
    m: int = 0


@dataclass
class SnapshotSequence:
    snapshots: list[list[Edge]]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.labels:
            self.labels = [f"snapshot{i + 1}" for i in range(len(self.snapshots))]
        if len(self.labels) != len(self.snapshots):
            raise ValueError("one label per snapshot required")

    def __len__(self):
        return len(self.snapshots)


def canonical(u: int, v: int) -> Edge:
    if u == v:
        raise ValueError(f"self-loop on node {u}")
    return (u, v) if u < v else (v, u)


def _parse_node(token: str, path, lineno: int) -> int:
    try:
        node = int(token)
    except ValueError:
        raise StreamParseError(path, lineno, f"node id {token!r} is not an integer") from None
    if node < 0:
        raise StreamParseError(path, lineno, f"negative node id {node}")
    return node


def _content_lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split()


def ingest_edge_list(path, dedupe: bool = True, drop_self_loops: bool = True):
    """Read a whitespace-separated ``u v`` edge list as an insertion-only stream.

    Fields after the second are ignored. Returns ``(events, stats)`` where
    ``stats.n`` counts distinct nodes and ``stats.m`` emitted edges.
    A self-loop is a parse error when ``drop_self_loops`` is off, since an
    emitted edge can never be a loop.
    """
    events: list[StreamEvent] = []
    seen: set[Edge] = set()
    nodes: set[int] = set()
    for lineno, fields in _content_lines(path):
        if len(fields) < 2:
            raise StreamParseError(path, lineno, "expected at least two fields 'u v'")
        u = _parse_node(fields[0], path, lineno)
        v = _parse_node(fields[1], path, lineno)
        if u == v:
            if drop_self_loops:
                continue
            raise StreamParseError(path, lineno, f"self-loop on node {u}")
        edge = (u, v) if u < v else (v, u)
        if dedupe:
            if edge in seen:
                continue
            seen.add(edge)
        nodes.add(u)
        nodes.add(v)
        events.append(StreamEvent(edge, INSERT, len(events) + 1))
    return events, IngestStats(n=len(nodes), m=len(events))


def ingest_fd_stream(path) -> list[StreamEvent]:
    """Read ``u v sign`` lines, with sign one of ``+``, ``-``, ``1``, ``-1``."""
    events: list[StreamEvent] = []
    for lineno, fields in _content_lines(path):
        if len(fields) < 3:
            raise StreamParseError(path, lineno, "expected 'u v sign'")
        u = _parse_node(fields[0], path, lineno)
        v = _parse_node(fields[1], path, lineno)
        sign = _SIGN_TOKENS.get(fields[2])
        if sign is None:
            raise StreamParseError(path, lineno, f"unknown sign token {fields[2]!r}")
        if u == v:
            raise StreamParseError(path, lineno, f"self-loop on node {u}")
        events.append(StreamEvent(canonical(u, v), sign, len(events) + 1))
    return events


def write_edge_list(path, edges: Iterable[Edge]) -> None:
    with open(path, "w") as fh:
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def write_fd_stream(path, events: Iterable[StreamEvent]) -> None:
    with open(path, "w") as fh:
        for ev in events:
            u, v = ev.edge
            fh.write(f"{u} {v} {'+' if ev.sign == INSERT else '-'}\n")


def insertion_stream(edges: Iterable[Edge]) -> list[StreamEvent]:
    """Wrap canonical edges as an insertion-only stream in the given order."""
    return [StreamEvent(e, INSERT, t) for t, e in enumerate(edges, 1)]


def load_snapshot_sequence(paths: Sequence, labels: Sequence[str] | None = None) -> SnapshotSequence:
    snapshots = []
    for p in paths:
        events, _ = ingest_edge_list(p)
        snapshots.append([ev.edge for ev in events])
    if labels is None:
        labels = [os.path.splitext(os.path.basename(str(p)))[0] for p in paths]
    return SnapshotSequence(snapshots, list(labels))


def load_manifest(path) -> SnapshotSequence:
    """Manifest: one edge-list path per line, relative to the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    paths = []
    for _, fields in _content_lines(path):
        p = fields[0]
        paths.append(p if os.path.isabs(p) else os.path.join(base, p))
    return load_snapshot_sequence(paths)


def _check_snapshot(edges: Sequence[Edge], index: int) -> list[Edge]:
    out = []
    seen = set()
    for u, v in edges:
        if u == v:
            raise ValueError(f"snapshot {index} contains self-loop on node {u}")
        e = (u, v) if u < v else (v, u)
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


def synthesize_fd_stream(seq: SnapshotSequence, rng_seed: int) -> list[StreamEvent]:
    """Turn a snapshot sequence into one fully dynamic stream.

    The first snapshot is inserted in order. Each later window inserts
    ``G[i+1] - G[i]`` in sequence order and deletes ``G[i] - G[i+1]`` at
    uniformly random positions among the window's slots, so replaying up to a
    window boundary reproduces that snapshot exactly.
    """
    if len(seq.snapshots) < 2:
        raise ValueError("need at least two snapshots")
    rng = random.Random(rng_seed)
    snaps = [_check_snapshot(s, i) for i, s in enumerate(seq.snapshots)]
    events: list[StreamEvent] = []

    def emit(edge, sign):
        events.append(StreamEvent(edge, sign, len(events) + 1))

    for e in snaps[0]:
        emit(e, INSERT)
    for prev, cur in zip(snaps, snaps[1:]):
        prev_set, cur_set = set(prev), set(cur)
        inserts = [e for e in cur if e not in prev_set]
        deletes = [e for e in prev if e not in cur_set]
        rng.shuffle(deletes)
        slots = len(inserts) + len(deletes)
        del_pos = set(rng.sample(range(slots), len(deletes)))
        ins_iter, del_iter = iter(inserts), iter(deletes)
        for pos in range(slots):
            if pos in del_pos:
                emit(next(del_iter), DELETE)
            else:
                emit(next(ins_iter), INSERT)
    return events


def snapshot_boundaries(seq: SnapshotSequence) -> list[int]:
    """Stream positions (1-based, inclusive) at which each snapshot is complete."""
    snaps = [set(_check_snapshot(s, i)) for i, s in enumerate(seq.snapshots)]
    bounds = [len(snaps[0])]
    for prev, cur in zip(snaps, snaps[1:]):
        bounds.append(bounds[-1] + len(cur - prev) + len(prev - cur))
    return bounds


def replay(events: Iterable[StreamEvent], upto: int | None = None) -> set[Edge]:
    """Materialize the edge set after the first ``upto`` events."""
    live: set[Edge] = set()
    for i, ev in enumerate(events):
        if upto is not None and i >= upto:
            break
        if ev.sign == INSERT:
            live.add(ev.edge)
        else:
            live.discard(ev.edge)
    return live


def max_concurrent_edges(events: Iterable[StreamEvent]) -> int:
    """Largest number of simultaneously present edges over the stream."""
    live: set[Edge] = set()
    best = 0
    for ev in events:
        if ev.sign == INSERT:
            live.add(ev.edge)
            best = max(best, len(live))
        else:
            live.discard(ev.edge)
    return best
