"""Edge-heaviness predictors: construction, adversarial inversion and persistence.

Every ranking breaks ties deterministically: edges by canonical ``(u, v)``
order, nodes by ascending id.
"""

from __future__ import annotations

import hashlib
import math
import struct
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .exact import ExactCounts, count_exact, count_wr_covered
from .stream import Edge, StreamEvent, StreamParseError, insertion_stream

KINDS = (
    "exact",
    "noWR",
    "min_degree_edge",
    "min_degree_node",
    "adversarial_exact",
    "adversarial_min_degree",
)


class EdgePredictor:
    """Lookup table edge -> score; absent edges score 0."""

    def __init__(self, entries: Mapping[Edge, float] | None = None, capacity: int | None = None):
        self.entries = dict(entries or {})
        self.capacity = len(self.entries) if capacity is None else capacity
        if len(self.entries) > self.capacity:
            raise ValueError("more entries than capacity")

    def score(self, edge: Edge) -> float:
        return self.entries.get(edge, 0)

    def query(self, u: int, v: int) -> float:
        return self.entries.get((u, v) if u < v else (v, u), 0)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, EdgePredictor) and self.entries == other.entries

    def __repr__(self):
        return f"EdgePredictor({len(self.entries)} entries)"


class NodePredictor:
    """Degree table; an edge scores min(deg(u), deg(v)) when both ends are stored."""

    def __init__(self, entries: Mapping[int, int] | None = None, capacity: int | None = None):
        self.entries = dict(entries or {})
        self.capacity = len(self.entries) if capacity is None else capacity
        if len(self.entries) > self.capacity:
            raise ValueError("more entries than capacity")

    def query(self, u: int, v: int) -> float:
        du = self.entries.get(u)
        if du is None:
            return 0
        dv = self.entries.get(v)
        if dv is None:
            return 0
        return du if du < dv else dv

    def score(self, edge: Edge) -> float:
        return self.query(edge[0], edge[1])

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, NodePredictor) and self.entries == other.entries

    def __repr__(self):
        return f"NodePredictor({len(self.entries)} nodes)"


class RandomPredictor:
    """Uniform pseudo-random score per edge, a pure function of (seed, edge).

    With ``per_trial=True`` the campaign runner swaps in a fresh predictor
    keyed by each trial's seed, so every trial sees a different random
    heavy set.
    """

    def __init__(self, seed: int = 0, per_trial: bool = False):
        self.seed = seed
        self.per_trial = per_trial
        self._key = struct.pack("<Q", seed % 2**64)

    def for_trial(self, trial_seed: int) -> "RandomPredictor":
        if not self.per_trial:
            return self
        return RandomPredictor((self.seed * 0x9E3779B97F4A7C15 + trial_seed) % 2**64)

    def score(self, edge: Edge) -> float:
        h = hashlib.blake2b(struct.pack("<qq", *edge), digest_size=8, key=self._key).digest()
        return int.from_bytes(h, "little") / 2.0**64

    def query(self, u: int, v: int) -> float:
        return self.score((u, v) if u < v else (v, u))


class NullPredictor:
    def score(self, edge: Edge) -> float:
        return 0

    def query(self, u: int, v: int) -> float:
        return 0


@dataclass
class PredictorSpec:
    kind: str
    retain_fraction: float = 0.10
    wr_size: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown predictor kind {self.kind!r}; expected one of {KINDS}")
        _check_fraction(self.retain_fraction)
        if self.kind == "noWR" and (self.wr_size is None or self.wr_size < 0):
            raise ValueError("noWR predictor needs a non-negative wr_size")


def _check_fraction(f: float) -> None:
    if not 0 < f <= 1:
        raise ValueError(f"retain_fraction must lie in (0, 1], got {f}")


def retain_count(m: int, retain_fraction: float) -> int:
    _check_fraction(retain_fraction)
    # guard against 0.1 * 30 == 3.0000000000000004
    return min(m, math.ceil(retain_fraction * m - 1e-9))


def rank_edges(scores: Mapping[Edge, float]) -> list[Edge]:
    return sorted(scores, key=lambda e: (-scores[e], e))


def rank_nodes(degrees: Mapping[int, int]) -> list[int]:
    return sorted(degrees, key=lambda u: (-degrees[u], u))


def _top_edges(scores: Mapping[Edge, float], retain_fraction: float) -> EdgePredictor:
    keep = rank_edges(scores)[: retain_count(len(scores), retain_fraction)]
    return EdgePredictor({e: scores[e] for e in keep})


def _require_per_edge(counts: ExactCounts) -> dict[Edge, int]:
    if counts.per_edge is None:
        raise ValueError("ExactCounts built without per-edge heaviness (count_exact(..., per_edge=True))")
    return counts.per_edge


def build_exact_predictor(counts: ExactCounts, retain_fraction: float = 0.10) -> EdgePredictor:
    return _top_edges(_require_per_edge(counts), retain_fraction)


def build_nowr_predictor(
    counts: ExactCounts, covered: Mapping[Edge, int], retain_fraction: float = 0.10
) -> EdgePredictor:
    per_edge = _require_per_edge(counts)
    for e, c in covered.items():
        if e not in per_edge:
            raise KeyError(f"covered count for edge {e} absent from exact counts")
        if c > per_edge[e]:
            raise ValueError(f"covered count {c} exceeds heaviness {per_edge[e]} for edge {e}")
    scores = {e: d - covered.get(e, 0) for e, d in per_edge.items()}
    return _top_edges(scores, retain_fraction)


def degrees(edges: Iterable[Edge]) -> Counter:
    deg: Counter = Counter()
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return deg


def min_degree_scores(edges: Sequence[Edge], deg: Mapping[int, int]) -> dict[Edge, int]:
    return {(u, v): min(deg[u], deg[v]) for u, v in edges}


def build_min_degree_edge_predictor(edges: Iterable[Edge], retain_fraction: float = 0.10) -> EdgePredictor:
    edges = list(edges)
    return _top_edges(min_degree_scores(edges, degrees(edges)), retain_fraction)


def build_min_degree_predictor(edges: Iterable[Edge], retain_fraction: float = 0.10) -> NodePredictor:
    """Node-based min-degree predictor.

    The number of stored nodes equals the number of distinct endpoints of the
    edge-based predictor's retained edges; the stored nodes are the highest
    degree ones overall.
    """
    edges = list(edges)
    deg = degrees(edges)
    edge_pred = _top_edges(min_degree_scores(edges, deg), retain_fraction)
    n_bar = len(edge_nodes(edge_pred))
    keep = rank_nodes(deg)[:n_bar]
    return NodePredictor({u: deg[u] for u in keep})


def edge_nodes(pred: EdgePredictor) -> set[int]:
    return {x for e in pred.entries for x in e}


def jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def representation_jaccard(edges: Iterable[Edge], retain_fraction: float = 0.10) -> float:
    """Jaccard similarity of node sets of the edge- and node-based min-degree predictors."""
    edges = list(edges)
    edge_pred = build_min_degree_edge_predictor(edges, retain_fraction)
    node_pred = build_min_degree_predictor(edges, retain_fraction)
    return jaccard(edge_nodes(edge_pred), set(node_pred.entries))


def invert_edge_scores(scores: Mapping[Edge, float], capacity: int) -> EdgePredictor:
    """Keep the ``capacity`` lowest-ranked edges, with scores mirrored so the lightest is heaviest."""
    ranked = rank_edges(scores)
    bottom = ranked[len(ranked) - capacity:] if capacity else []
    top = max(scores.values(), default=0)
    return EdgePredictor({e: top + 1 - scores[e] for e in bottom})


def invert_node_degrees(deg: Mapping[int, int], capacity: int) -> NodePredictor:
    ranked = rank_nodes(deg)
    bottom = ranked[len(ranked) - capacity:] if capacity else []
    top = max(deg.values(), default=0)
    return NodePredictor({u: top + 1 - deg[u] for u in bottom})


def adversarial_invert(spec: PredictorSpec, edges: Iterable[Edge], counts: ExactCounts | None = None):
    """Worst-case predictor with the same number of entries as the honest one."""
    edges = list(edges)
    if spec.kind == "adversarial_exact":
        if counts is None:
            counts = count_exact(edges, per_edge=True)
        per_edge = _require_per_edge(counts)
        return invert_edge_scores(per_edge, retain_count(len(per_edge), spec.retain_fraction))
    if spec.kind == "adversarial_min_degree":
        honest = build_min_degree_predictor(edges, spec.retain_fraction)
        return invert_node_degrees(degrees(edges), len(honest))
    raise ValueError(f"{spec.kind!r} is not an adversarial kind")


def build_predictor(spec: PredictorSpec, stream: Sequence[StreamEvent] | Sequence[Edge]):
    """Build any predictor kind from a training stream (events or bare edges, in order)."""
    if stream and isinstance(stream[0], StreamEvent):
        events = list(stream)
    else:
        events = insertion_stream(stream)
    edges = [ev.edge for ev in events]
    kind = spec.kind
    if kind == "exact":
        return build_exact_predictor(count_exact(edges, per_edge=True), spec.retain_fraction)
    if kind == "noWR":
        counts = count_exact(edges, per_edge=True)
        return build_nowr_predictor(counts, count_wr_covered(events, spec.wr_size), spec.retain_fraction)
    if kind == "min_degree_edge":
        return build_min_degree_edge_predictor(edges, spec.retain_fraction)
    if kind == "min_degree_node":
        return build_min_degree_predictor(edges, spec.retain_fraction)
    return adversarial_invert(spec, edges)


def _fmt(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def save_predictor(pred, path) -> None:
    with open(path, "w") as fh:
        if isinstance(pred, NodePredictor):
            for u in rank_nodes(pred.entries):
                fh.write(f"{u} {pred.entries[u]}\n")
        elif isinstance(pred, EdgePredictor):
            for u, v in rank_edges(pred.entries):
                fh.write(f"{u} {v} {_fmt(pred.entries[(u, v)])}\n")
        else:
            raise TypeError(f"cannot persist {type(pred).__name__}")


def load_predictor(path):
    """Load a predictor file; two fields per line is node-based, three is edge-based."""
    edge_entries: dict[Edge, float] = {}
    node_entries: dict[int, int] = {}
    width = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if width is None:
                width = len(fields)
                if width not in (2, 3):
                    raise StreamParseError(path, lineno, "expected 'u degree' or 'u v score'")
            elif len(fields) != width:
                raise StreamParseError(path, lineno, "mixed node and edge predictor lines")
            try:
                if width == 2:
                    node_entries[int(fields[0])] = int(fields[1])
                else:
                    u, v = int(fields[0]), int(fields[1])
                    if u == v:
                        raise ValueError("self-loop")
                    score = float(fields[2])
                    edge_entries[(u, v) if u < v else (v, u)] = int(score) if score.is_integer() else score
            except ValueError as exc:
                raise StreamParseError(path, lineno, str(exc)) from None
    if width == 2:
        return NodePredictor(node_entries)
    return EdgePredictor(edge_entries)
