"""Fixed-budget edge stores: waiting room, heavy set and light reservoir.

The sampler owns the stored subgraph (adjacency plus a store label per edge)
and the random-pairing counters. Stochastic steps draw from the injected
``random.Random`` in a fixed order:

* standard reservoir step: one ``random()`` coin, then one ``randrange`` for
  the victim slot only if the coin succeeds;
* compensation step (uncompensated deletions pending): one ``random()`` coin.

The fill phase draws nothing.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterator

from .stream import Edge

WAITING = "W"
HEAVY = "H"
LIGHT = "L"

# reservoir_insert outcomes
STORED = "stored"
DISCARDED = "discarded"
REPLACED = "replaced"

# remove_edge_fd outcomes
FROM_W = "from_W"
FROM_H = "from_H"
LIGHT_BAD = "light_bad"
LIGHT_GOOD = "light_good"


class FDValidationError(ValueError):
    pass


def _floor(x: float) -> int:
    # k * alpha like 100 * 0.07 lands a hair above/below the integer
    return math.floor(x + 1e-9)


@dataclass(frozen=True)
class SamplerConfig:
    k: int
    alpha: float
    beta: float

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("memory budget k must be at least 2")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")
        if self.light_cap < 1:
            raise ValueError(f"k={self.k}, alpha={self.alpha}, beta={self.beta} leave no room for light edges")

    @property
    def wr_cap(self) -> int:
        return max(1, _floor(self.k * self.alpha))

    @property
    def heavy_cap(self) -> int:
        return _floor(self.k * (1 - self.alpha) * self.beta)

    @property
    def light_cap(self) -> int:
        return self.k - self.wr_cap - self.heavy_cap


@dataclass(slots=True)
class PairingCounters:
    ell: int = 0
    d_g: int = 0
    d_b: int = 0


class WaitingRoom:
    """FIFO of the most recent edges; arbitrary removal keeps arrival order."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._edges: OrderedDict[Edge, int] = OrderedDict()

    def push(self, edge: Edge, seq: int) -> None:
        self._edges[edge] = seq

    def pop_oldest(self) -> tuple[Edge, int]:
        return self._edges.popitem(last=False)

    def remove(self, edge: Edge) -> None:
        del self._edges[edge]

    def full(self) -> bool:
        return len(self._edges) >= self.capacity

    def __contains__(self, edge):
        return edge in self._edges

    def __len__(self):
        return len(self._edges)

    def __iter__(self):
        return iter(self._edges)


class HeavySet:
    """Bounded min-priority store keyed by (score, -arrival).

    Among equal scores the latest arrival is the minimum, so earlier edges win
    ties. Removal is lazy: entries are tombstoned and skipped on access, while
    ``len`` counts live entries only.
    """

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._heap: list[list] = []
        self._index: dict[Edge, list] = {}

    def __len__(self):
        return len(self._index)

    def __contains__(self, edge):
        return edge in self._index

    def __iter__(self):
        return iter(self._index)

    def full(self) -> bool:
        return len(self._index) >= self.capacity

    def score(self, edge: Edge) -> float:
        return self._index[edge][0]

    def push(self, edge: Edge, score: float, seq: int) -> None:
        entry = [score, -seq, edge]
        self._index[edge] = entry
        heapq.heappush(self._heap, entry)

    def _live_top(self) -> list:
        heap = self._heap
        while heap[0][2] is None:
            heapq.heappop(heap)
        return heap[0]

    def min(self) -> tuple[Edge, float]:
        top = self._live_top()
        return top[2], top[0]

    def offer(self, edge: Edge, score: float, seq: int) -> Edge:
        """Offer an edge to a full set; returns whichever edge is demoted."""
        top = self._live_top()
        if score > top[0]:
            old = top[2]
            del self._index[old]
            entry = [score, -seq, edge]
            self._index[edge] = entry
            heapq.heapreplace(self._heap, entry)
            return old
        return edge

    def remove(self, edge: Edge) -> None:
        entry = self._index.pop(edge)
        entry[2] = None
        if len(self._heap) > 2 * len(self._index) + 32:
            self._heap = [e for e in self._heap if e[2] is not None]
            heapq.heapify(self._heap)


class LightReservoir:
    """Fixed-capacity array of edges with a position index for O(1) removal."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: list[Edge] = []
        self._pos: dict[Edge, int] = {}

    def __len__(self):
        return len(self._items)

    def __contains__(self, edge):
        return edge in self._pos

    def __iter__(self):
        return iter(self._items)

    def full(self) -> bool:
        return len(self._items) >= self.capacity

    def add(self, edge: Edge) -> None:
        self._pos[edge] = len(self._items)
        self._items.append(edge)

    def replace_at(self, slot: int, edge: Edge) -> Edge:
        old = self._items[slot]
        del self._pos[old]
        self._items[slot] = edge
        self._pos[edge] = slot
        return old

    def remove(self, edge: Edge) -> None:
        slot = self._pos.pop(edge)
        last = self._items.pop()
        if slot < len(self._items):
            self._items[slot] = last
            self._pos[last] = slot


class Sampler:
    def __init__(self, config: SamplerConfig, rng: random.Random | None = None):
        self.config = config
        self.rng = rng if rng is not None else random.Random()
        self.waiting = WaitingRoom(config.wr_cap)
        self.heavy = HeavySet(config.heavy_cap)
        self.light = LightReservoir(config.light_cap)
        self.counters = PairingCounters()
        self.adj: dict[int, set[int]] = {}
        self.where: dict[Edge, str] = {}

    # stored-subgraph bookkeeping

    def _place(self, edge: Edge, store: str) -> None:
        where = self.where
        if edge not in where:
            u, v = edge
            adj = self.adj
            if u in adj:
                adj[u].add(v)
            else:
                adj[u] = {v}
            if v in adj:
                adj[v].add(u)
            else:
                adj[v] = {u}
        where[edge] = store

    def _drop(self, edge: Edge) -> None:
        if self.where.pop(edge, None) is not None:
            u, v = edge
            adj = self.adj
            nu = adj[u]
            nu.discard(v)
            if not nu:
                del adj[u]
            nv = adj[v]
            nv.discard(u)
            if not nv:
                del adj[v]

    def location(self, edge: Edge) -> str | None:
        return self.where.get(edge)

    def __len__(self):
        return len(self.where)

    def neighbors_intersect(self, u: int, v: int) -> Iterator[tuple[int, str, str]]:
        """Common stored neighbours w of u and v with the stores of {u,w} and {v,w}."""
        a = self.adj.get(u)
        b = self.adj.get(v)
        if not a or not b:
            return
        if len(a) > len(b):
            a, b = b, a
        where = self.where
        for w in a:
            if w in b:
                yield (
                    w,
                    where[(u, w) if u < w else (w, u)],
                    where[(v, w) if v < w else (w, v)],
                )

    # store maintenance

    def reservoir_insert(self, edge: Edge) -> tuple[str, Edge | None]:
        """Reservoir / random-pairing step for a light edge; ``ell`` must already count it."""
        c = self.counters
        light = self.light
        if c.d_g + c.d_b == 0:
            if len(light) < light.capacity:
                light.add(edge)
                self._place(edge, LIGHT)
                return STORED, None
            rng = self.rng
            if rng.random() < light.capacity / c.ell:
                old = light.replace_at(rng.randrange(len(light)), edge)
                self._drop(old)
                self._place(edge, LIGHT)
                return REPLACED, old
            self._drop(edge)
            return DISCARDED, None
        if self.rng.random() < c.d_b / (c.d_b + c.d_g):
            light.add(edge)
            self._place(edge, LIGHT)
            c.d_b -= 1
            return STORED, None
        c.d_g -= 1
        self._drop(edge)
        return DISCARDED, None

    def heavy_offer(self, edge: Edge, score: float, seq: int) -> Edge:
        """Compare a demoted edge against the lightest heavy edge; returns the loser.

        Strictly greater scores displace the current minimum.
        """
        loser = self.heavy.offer(edge, score, seq)
        if loser is not edge:
            self.where[edge] = HEAVY
        return loser

    def admit(self, edge: Edge, seq: int, predictor) -> None:
        """Store maintenance for one inserted edge, after triangles were counted."""
        waiting = self.waiting
        if len(waiting) < waiting.capacity:
            waiting.push(edge, seq)
            self._place(edge, WAITING)
            return
        old, old_seq = waiting.pop_oldest()
        waiting.push(edge, seq)
        self._place(edge, WAITING)
        heavy = self.heavy
        if len(heavy) < heavy.capacity:
            heavy.push(old, predictor.score(old), old_seq)
            self.where[old] = HEAVY
            return
        self.counters.ell += 1
        if heavy.capacity:
            old = self.heavy_offer(old, predictor.score(old), old_seq)
        self.reservoir_insert(old)

    def remove_edge_fd(self, edge: Edge) -> str:
        store = self.where.get(edge)
        if store == WAITING:
            self.waiting.remove(edge)
            self._drop(edge)
            return FROM_W
        if store == HEAVY:
            self.heavy.remove(edge)
            self._drop(edge)
            return FROM_H
        c = self.counters
        c.ell -= 1
        if store == LIGHT:
            self.light.remove(edge)
            self._drop(edge)
            c.d_b += 1
            return LIGHT_BAD
        c.d_g += 1
        return LIGHT_GOOD

    # debugging

    def dump(self) -> dict:
        c = self.counters
        return {
            "W": list(self.waiting),
            "H": sorted(self.heavy),
            "S_L": sorted(self.light),
            "ell": c.ell,
            "d_g": c.d_g,
            "d_b": c.d_b,
        }

    def check_invariants(self) -> None:
        w, h, s = set(self.waiting), set(self.heavy), set(self.light)
        cfg = self.config
        assert not (w & h) and not (w & s) and not (h & s), "stores overlap"
        assert len(w) <= cfg.wr_cap and len(h) <= cfg.heavy_cap and len(s) <= cfg.light_cap
        c = self.counters
        assert c.ell >= 0 and c.d_g >= 0 and c.d_b >= 0, f"negative counter {c}"
        labels = {e: WAITING for e in w} | {e: HEAVY for e in h} | {e: LIGHT for e in s}
        assert labels == self.where, "store labels out of sync"
        adj: dict[int, set[int]] = {}
        for u, v in labels:
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        assert adj == self.adj, "adjacency index out of sync"
