"""Seeded synthetic graphs and streams for tests, acceptance runs and demos."""

from __future__ import annotations

import random
from typing import Sequence

from .stream import DELETE, INSERT, Edge, SnapshotSequence, StreamEvent


def gnp_edges(n: int, p: float, seed: int, shuffle: bool = True) -> list[Edge]:
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    if shuffle:
        rng.shuffle(edges)
    return edges


def clique_edges(nodes: Sequence[int]) -> list[Edge]:
    nodes = sorted(nodes)
    return [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]


def planted_clusters(
    n: int, p: float, cluster_sizes: Sequence[int], seed: int, cluster_p: float = 1.0
) -> list[Edge]:
    """G(n, p) background plus dense clusters on disjoint node blocks, in random order."""
    rng = random.Random(seed)
    edges = {(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p}
    start = 0
    for size in cluster_sizes:
        if start + size > n:
            raise ValueError("clusters do not fit in n nodes")
        for e in clique_edges(range(start, start + size)):
            if cluster_p >= 1 or rng.random() < cluster_p:
                edges.add(e)
        start += size
    out = sorted(edges)
    rng.shuffle(out)
    return out


def drifting_snapshots(
    n: int,
    p: float,
    cluster_sizes: Sequence[int],
    steps: int,
    drift: float,
    seed: int,
    hubs: tuple[int, int] | None = None,
) -> SnapshotSequence:
    """Snapshot sequence whose background edges are partly resampled at every step.

    Cluster edges (and the optional ``(n_hubs, n_satellites)`` hub structure,
    placed on the nodes after the clusters) persist across snapshots, a
    ``drift`` fraction of the background edges is replaced by fresh random
    pairs each step, and every snapshot lists its edges in its own random
    order.
    """
    rng = random.Random(seed)
    clustered: set[Edge] = set()
    start = 0
    for size in cluster_sizes:
        clustered.update(clique_edges(range(start, start + size)))
        start += size
    if hubs is not None:
        n_hubs, n_sat = hubs
        if start + n_hubs + n_sat > n:
            raise ValueError("hub structure does not fit in n nodes")
        clustered.update(hub_edges(range(start, start + n_hubs), range(start + n_hubs, start + n_hubs + n_sat)))
    background = {(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p} - clustered
    snapshots = []
    for _ in range(steps):
        snap = sorted(clustered | background)
        rng.shuffle(snap)
        snapshots.append(snap)
        bg = sorted(background)
        drop = set(rng.sample(bg, int(drift * len(bg))))
        background -= drop
        while len(background) < len(bg):
            u, v = rng.sample(range(n), 2)
            e = (u, v) if u < v else (v, u)
            if e not in clustered and e not in drop:
                background.add(e)
    return SnapshotSequence(snapshots, [f"t{i + 1}" for i in range(steps)])


def random_fd_stream(n_nodes: int, n_events: int, seed: int, delete_prob: float = 0.3) -> list[StreamEvent]:
    """Valid fully dynamic stream: deletions only ever target present edges."""
    rng = random.Random(seed)
    live: list[Edge] = []
    pos: dict[Edge, int] = {}
    events = []
    while len(events) < n_events:
        if live and rng.random() < delete_prob:
            i = rng.randrange(len(live))
            e = live[i]
            last = live.pop()
            if i < len(live):
                live[i] = last
                pos[last] = i
            del pos[e]
            sign = DELETE
        else:
            u, v = rng.sample(range(n_nodes), 2)
            e = (u, v) if u < v else (v, u)
            if e in pos:
                continue
            pos[e] = len(live)
            live.append(e)
            sign = INSERT
        events.append(StreamEvent(e, sign, len(events) + 1))
    return events


def hub_edges(hubs: Sequence[int], satellites: Sequence[int]) -> list[Edge]:
    """Clique on ``hubs`` with every satellite joined to every hub.

    Hub-hub edges sit in many triangles while hub-satellite edges sit in few,
    so a handful of edges carries most of the triangle mass.
    """
    out = set(clique_edges(hubs))
    for s in satellites:
        for h in hubs:
            out.add((h, s) if h < s else (s, h))
    return sorted(out)


def planted_hubs(n: int, p: float, n_hubs: int, n_satellites: int, seed: int) -> list[Edge]:
    """G(n, p) background plus one hub structure on nodes ``0 .. n_hubs + n_satellites - 1``."""
    if n_hubs + n_satellites > n:
        raise ValueError("hub structure does not fit in n nodes")
    rng = random.Random(seed)
    edges = {(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p}
    edges.update(hub_edges(range(n_hubs), range(n_hubs, n_hubs + n_satellites)))
    out = sorted(edges)
    rng.shuffle(out)
    return out
