"""One-pass triangle counting in edge streams with edge-heaviness predictions."""

from .engine import EngineMode, EstimateState, Tonic, TriangleHit, run_tonic, triangle_probability
from .exact import ExactCounts, count_exact, count_wr_covered
from .predictors import (
    EdgePredictor,
    NodePredictor,
    PredictorSpec,
    RandomPredictor,
    build_predictor,
    load_predictor,
    save_predictor,
)
from .sampler import Sampler, SamplerConfig
from .stream import INSERT, DELETE, StreamEvent, SnapshotSequence, insertion_stream

__all__ = [
    "DELETE",
    "EdgePredictor",
    "EngineMode",
    "EstimateState",
    "ExactCounts",
    "INSERT",
    "NodePredictor",
    "PredictorSpec",
    "RandomPredictor",
    "Sampler",
    "SamplerConfig",
    "SnapshotSequence",
    "StreamEvent",
    "Tonic",
    "TriangleHit",
    "build_predictor",
    "count_exact",
    "count_wr_covered",
    "insertion_stream",
    "load_predictor",
    "run_tonic",
    "save_predictor",
    "triangle_probability",
]
