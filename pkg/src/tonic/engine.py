"""Streaming triangle estimators for insertion-only and fully dynamic edge streams."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .predictors import NullPredictor
from .sampler import LIGHT, FDValidationError, Sampler, SamplerConfig
from .stream import DELETE, INSERT, Edge, StreamEvent


class EngineMode(str, enum.Enum):
    INSERTION_ONLY = "insertion_only"
    FULLY_DYNAMIC = "fully_dynamic"


class TriangleHit(NamedTuple):
    nodes: tuple[int, int, int]
    p: float
    delta: float


@dataclass
class EstimateState:
    global_hat: float = 0.0
    local_hat: dict[int, float] = field(default_factory=dict)


def triangle_probability(loc_a: str, loc_b: str, counters, light_cap: int, mode=EngineMode.INSERTION_ONLY) -> float:
    """Probability that both earlier edges of a triangle are stored when it closes.

    Edges in the waiting room or heavy set are kept surely; light edges are a
    uniform sample of ``light_cap`` out of ``D`` where ``D`` is the light-edge
    count plus, in fully dynamic mode, the uncompensated deletions.
    """
    n_light = (loc_a == LIGHT) + (loc_b == LIGHT)
    if n_light == 0:
        return 1.0
    d = counters.ell
    if mode == EngineMode.FULLY_DYNAMIC:
        d += counters.d_g + counters.d_b
    s = light_cap
    if d <= s:
        return 1.0
    if n_light == 1:
        return s / d
    if d - 1 <= 0:
        return 1.0
    return min(1.0, (s / d) * ((s - 1) / (d - 1)))


class Tonic:
    """One-pass triangle estimator with a waiting room, predicted-heavy set and light reservoir.

    Each event first updates the estimates from triangles closed in the
    stored subgraph, then maintains the stores. Deletions are only accepted
    in fully dynamic mode.
    """

    def __init__(
        self,
        config: SamplerConfig,
        predictor=None,
        *,
        mode: EngineMode | str = EngineMode.INSERTION_ONLY,
        seed: int | None = None,
        rng: random.Random | None = None,
        strict: bool = False,
        debug: bool = False,
    ):
        self.config = config
        self.predictor = predictor if predictor is not None else NullPredictor()
        self.mode = EngineMode(mode)
        if rng is None:
            rng = random.Random(seed)
        self.sampler = Sampler(config, rng)
        self.estimates = EstimateState()
        self.t = 0
        self.strict = strict
        self.debug = debug
        self._live: set[Edge] | None = set() if strict else None

    @property
    def counters(self):
        return self.sampler.counters

    def count_triangles(self, edge: Edge, sign: int = INSERT) -> list[TriangleHit]:
        u, v = edge
        s = self.sampler
        a = s.adj.get(u)
        b = s.adj.get(v)
        if not a or not b:
            return []
        if len(a) > len(b):
            a, b = b, a
        c = s.counters
        d = c.ell + c.d_g + c.d_b
        cap = s.light.capacity
        where = s.where
        if d <= cap:
            p_one = p_two = 1.0
        else:
            p_one = cap / d
            p_two = min(1.0, p_one * ((cap - 1) / (d - 1)))
        est = self.estimates
        local = est.local_hat
        hits = []
        for w in a:
            if w not in b:
                continue
            n_light = (where[(u, w) if u < w else (w, u)] is LIGHT) + (where[(v, w) if v < w else (w, v)] is LIGHT)
            p = 1.0 if n_light == 0 else (p_one if n_light == 1 else p_two)
            inc = sign / p
            est.global_hat += inc
            local[u] = local.get(u, 0.0) + inc
            local[v] = local.get(v, 0.0) + inc
            local[w] = local.get(w, 0.0) + inc
            hits.append(TriangleHit((u, v, w), p, inc))
        return hits

    def process(self, event: StreamEvent) -> list[TriangleHit]:
        return self.process_edge(event.edge, event.sign)

    def process_edge(self, edge: Edge, sign: int = INSERT) -> list[TriangleHit]:
        self.t += 1
        if sign == INSERT:
            live = self._live
            if live is not None:
                if edge in live:
                    raise FDValidationError(f"t={self.t}: insertion of already present edge {edge}")
                live.add(edge)
            hits = self.count_triangles(edge, INSERT)
            self.sampler.admit(edge, self.t, self.predictor)
        elif sign == DELETE:
            if self.mode is not EngineMode.FULLY_DYNAMIC:
                raise ValueError("deletion event in insertion-only mode")
            live = self._live
            if live is not None:
                if edge not in live:
                    raise FDValidationError(f"t={self.t}: deletion of absent edge {edge}")
                live.discard(edge)
            hits = self.count_triangles(edge, DELETE)
            self.sampler.remove_edge_fd(edge)
        else:
            raise ValueError(f"unknown sign {sign!r}")
        if self.debug:
            self.sampler.check_invariants()
        return hits

    def run(self, events: Iterable[StreamEvent], trace_stride: int | None = None) -> list[tuple[int, float]]:
        """Process a stream; returns ``(t, reported global estimate)`` every ``trace_stride`` events."""
        trace = []
        process = self.process_edge
        if not trace_stride:
            for ev in events:
                process(ev.edge, ev.sign)
            return trace
        for ev in events:
            process(ev.edge, ev.sign)
            if self.t % trace_stride == 0:
                trace.append((self.t, self.report_global()))
        return trace

    def report_global(self) -> float:
        g = self.estimates.global_hat
        if self.mode is EngineMode.FULLY_DYNAMIC and g < 0:
            return 0.0
        return g

    def report(self) -> tuple[float, dict[int, float]]:
        """Reported estimates: fully dynamic mode clamps at zero; zero locals are omitted."""
        local = self.estimates.local_hat
        if self.mode is EngineMode.FULLY_DYNAMIC:
            return self.report_global(), {u: x for u, x in local.items() if x > 0}
        return self.estimates.global_hat, {u: x for u, x in local.items() if x != 0}


def run_tonic(events, config: SamplerConfig, predictor=None, *, seed=None, mode=EngineMode.INSERTION_ONLY):
    engine = Tonic(config, predictor, mode=mode, seed=seed)
    engine.run(events)
    return engine.report()
