"""Experiment harness: error metrics, variance bound, seeded multi-trial campaigns and CSV output."""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .engine import EngineMode, Tonic
from .exact import count_exact, exact_prefix_counts
from .predictors import PredictorSpec, build_predictor
from .sampler import SamplerConfig
from .stream import INSERT, SnapshotSequence, StreamEvent, max_concurrent_edges, replay

CSV_COLUMNS = [
    "dataset", "mode", "k", "alpha", "beta", "predictor",
    "trial", "seed", "estimate", "exact", "rel_error", "runtime_ms",
]


# metrics

def global_relative_error(estimate: float, exact: int) -> float:
    """|estimate - exact| / exact; falls back to absolute error when exact is 0."""
    if exact == 0:
        return abs(estimate)
    return abs(estimate - exact) / exact


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for idx in order[i:j + 1]:
            ranks[idx] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation with tied values given their average rank."""
    if len(x) != len(y):
        raise ValueError("length mismatch")
    if len(x) < 2:
        return math.nan
    rx, ry = _average_ranks(x), _average_ranks(y)
    mx, my = statistics.fmean(rx), statistics.fmean(ry)
    sxy = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    sxx = sum((a - mx) ** 2 for a in rx)
    syy = sum((b - my) ** 2 for b in ry)
    if sxx == 0 or syy == 0:
        return math.nan
    return sxy / math.sqrt(sxx * syy)


def top_nodes(exact_local: Mapping[int, int], top_fraction: float = 0.2) -> list[int]:
    """Nodes with the largest exact local counts; only nodes in at least one triangle qualify."""
    if not 0 < top_fraction <= 1:
        raise ValueError("top_fraction must lie in (0, 1]")
    positive = [u for u, c in exact_local.items() if c > 0]
    if not positive:
        raise ValueError("no node belongs to a triangle; local metrics undefined")
    positive.sort(key=lambda u: (-exact_local[u], u))
    return positive[: math.ceil(top_fraction * len(positive) - 1e-9)]


def local_metrics(
    locals_hat: Mapping[int, float], exact_local: Mapping[int, int], top_fraction: float = 0.2
) -> tuple[float, float]:
    """Mean local relative error and Spearman correlation over the top nodes."""
    top = top_nodes(exact_local, top_fraction)
    truth = [exact_local[u] for u in top]
    est = [locals_hat.get(u, 0.0) for u in top]
    err = statistics.fmean(abs(e - t) / t for e, t in zip(est, truth))
    return err, spearman(truth, est)


@dataclass
class VarianceBoundInputs:
    p: float
    p_prime: float
    c: float
    rho: float

    def __post_init__(self):
        if not 0 < self.p_prime < self.p <= 1:
            raise ValueError("need 0 < p' < p <= 1")
        if self.p == 1:
            raise ValueError("p = 1 makes the bound's denominator zero")
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if self.rho < 3:
            raise ValueError("rho must be >= 3")


def prop1_bound(inputs: VarianceBoundInputs) -> float:
    """Smallest heavy/light triangle-mass ratio T^H/T^L at which the heavy set pays off.

    Above this ratio, keeping predicted-heavy edges and sampling light ones at
    p' has no larger variance than sampling every light edge at p.
    """
    p, q, c, rho = inputs.p, inputs.p_prime, inputs.c, inputs.rho
    num = (1 / q**2 - 1 / p**2) + c * rho * (1 / q - 1 / p)
    den = (1 / p - 1) * (3 + 4 * rho / c)
    return 3 * num / den


# campaigns

@dataclass
class ExperimentConfig:
    dataset: str = "stream"
    mode: str = EngineMode.INSERTION_ONLY.value
    k: int | None = None
    mem_frac: float = 0.1
    alpha: float = 0.05
    beta: float = 0.2
    predictor: str = "none"
    trials: int = 50
    seed: int = 0
    trace_stride: int | None = None
    keep_locals: bool = False
    threads: int | None = None
    strict_fd: bool = False

    def __post_init__(self):
        self.mode = EngineMode(self.mode).value
        if not 0 < self.mem_frac <= 1:
            raise ValueError("mem_frac must lie in (0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.k is not None and self.k < 2:
            raise ValueError("k must be >= 2")

    def budget(self, m: int) -> int:
        if self.k is not None:
            return self.k
        return max(2, math.floor(self.mem_frac * m + 1e-9))

    def sampler_config(self, m: int) -> SamplerConfig:
        return SamplerConfig(self.budget(m), self.alpha, self.beta)

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        return max(1, int(os.environ.get("TONIC_THREADS", "1")))


def derive_seed(master_seed: int, trial: int) -> int:
    """Per-trial seed mixed from (master seed, trial index); independent of scheduling."""
    state = np.random.SeedSequence([master_seed, trial]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


@dataclass
class TrialReport:
    trial: int
    seed: int
    estimate: float
    runtime_ms: float
    locals: dict[int, float] | None = None
    trace: list[tuple[int, float]] | None = None


def run_trial(
    events: Sequence[StreamEvent],
    sampler_config: SamplerConfig,
    predictor,
    trial: int,
    seed: int,
    mode: str = EngineMode.INSERTION_ONLY.value,
    trace_at: frozenset[int] | None = None,
    keep_locals: bool = False,
    strict: bool = False,
) -> TrialReport:
    if hasattr(predictor, "for_trial"):
        predictor = predictor.for_trial(seed)
    engine = Tonic(sampler_config, predictor, mode=mode, seed=seed, strict=strict)
    trace = None
    start = time.perf_counter()
    if trace_at:
        trace = []
        process = engine.process_edge
        for ev in events:
            process(ev.edge, ev.sign)
            if engine.t in trace_at:
                trace.append((engine.t, engine.report_global()))
    else:
        engine.run(events)
    runtime_ms = (time.perf_counter() - start) * 1000
    estimate, locals_ = engine.report()
    return TrialReport(trial, seed, estimate, runtime_ms, locals_ if keep_locals else None, trace)


_WORKER: dict = {}


def _worker_init(payload):
    _WORKER["payload"] = payload


def _worker_trial(job):
    trial, seed = job
    return run_trial(*_WORKER["payload"][:3], trial, seed, *_WORKER["payload"][3:])


def run_trials(
    events, sampler_config, predictor, cfg: ExperimentConfig, trace_at: frozenset[int] | None = None
) -> list[TrialReport]:
    jobs = [(i, derive_seed(cfg.seed, i)) for i in range(cfg.trials)]
    payload = (list(events), sampler_config, predictor, cfg.mode, trace_at, cfg.keep_locals, cfg.strict_fd)
    workers = min(cfg.worker_count(), len(jobs))
    if workers <= 1:
        return [run_trial(*payload[:3], i, s, *payload[3:]) for i, s in jobs]
    with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(payload,)) as pool:
        results = list(pool.map(_worker_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return sorted(results, key=lambda r: r.trial)


@dataclass
class CampaignReport:
    config: ExperimentConfig
    k: int
    exact: int
    trials: list[TrialReport]
    exact_local: dict[int, int] | None = None
    errors: list[float] = field(init=False)

    def __post_init__(self):
        self.errors = [global_relative_error(t.estimate, self.exact) for t in self.trials]

    @property
    def estimates(self) -> list[float]:
        return [t.estimate for t in self.trials]

    @property
    def mean_estimate(self) -> float:
        return statistics.fmean(self.estimates)

    @property
    def std_estimate(self) -> float:
        return statistics.stdev(self.estimates) if len(self.trials) > 1 else 0.0

    @property
    def mean_error(self) -> float:
        return statistics.fmean(self.errors)

    @property
    def std_error(self) -> float:
        return statistics.stdev(self.errors) if len(self.errors) > 1 else 0.0

    @property
    def min_error(self) -> float:
        return min(self.errors)

    @property
    def max_error(self) -> float:
        return max(self.errors)

    @property
    def mean_runtime_ms(self) -> float:
        return statistics.fmean(t.runtime_ms for t in self.trials)

    def local_summary(self, top_fraction: float = 0.2) -> tuple[float, float]:
        """Trial-averaged (local relative error, Spearman); needs keep_locals."""
        if self.exact_local is None or any(t.locals is None for t in self.trials):
            raise ValueError("campaign ran without keep_locals")
        pairs = [local_metrics(t.locals, self.exact_local, top_fraction) for t in self.trials]
        return statistics.fmean(p[0] for p in pairs), statistics.fmean(p[1] for p in pairs)

    def summary(self) -> dict:
        return {
            "dataset": self.config.dataset,
            "k": self.k,
            "trials": len(self.trials),
            "exact": self.exact,
            "mean_estimate": self.mean_estimate,
            "std_estimate": self.std_estimate,
            "mean_error": self.mean_error,
            "std_error": self.std_error,
            "min_error": self.min_error,
            "max_error": self.max_error,
            "mean_runtime_ms": self.mean_runtime_ms,
        }

    def rows(self, timing: bool = True) -> list[dict]:
        cfg = self.config
        out = []
        for t, err in zip(self.trials, self.errors):
            out.append({
                "dataset": cfg.dataset,
                "mode": cfg.mode,
                "k": self.k,
                "alpha": cfg.alpha,
                "beta": cfg.beta,
                "predictor": cfg.predictor,
                "trial": t.trial,
                "seed": t.seed,
                "estimate": repr(float(t.estimate)),
                "exact": self.exact,
                "rel_error": repr(float(err)),
                "runtime_ms": f"{t.runtime_ms:.3f}" if timing else "",
            })
        return out


def write_csv(path_or_buf, reports: Sequence[CampaignReport], timing: bool = True) -> None:
    """Write trial rows of one or more campaigns; ``timing=False`` blanks wall-clock values."""
    own = isinstance(path_or_buf, (str, os.PathLike))
    fh = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for rep in reports:
            writer.writerows(rep.rows(timing))
    finally:
        if own:
            fh.close()


def csv_text(reports: Sequence[CampaignReport], timing: bool = True) -> str:
    buf = io.StringIO()
    write_csv(buf, reports, timing)
    return buf.getvalue()


def run_campaign(
    events: Sequence[StreamEvent],
    cfg: ExperimentConfig,
    predictor=None,
    exact: int | None = None,
    out=None,
    timing: bool = True,
) -> CampaignReport:
    """Run ``cfg.trials`` independent seeded engines over one stream."""
    events = list(events)
    final_edges = replay(events)
    m = len(final_edges) if cfg.mode == EngineMode.INSERTION_ONLY.value else max_concurrent_edges(events)
    sampler_config = cfg.sampler_config(m)
    exact_local = None
    if exact is None or cfg.keep_locals:
        counts = count_exact(final_edges)
        exact = counts.global_count
        exact_local = counts.local
    trace_at = None
    if cfg.trace_stride:
        trace_at = frozenset(range(cfg.trace_stride, len(events) + 1, cfg.trace_stride))
    trials = run_trials(events, sampler_config, predictor, cfg, trace_at)
    report = CampaignReport(cfg, sampler_config.k, exact, trials, exact_local)
    if out is not None:
        write_csv(out, [report], timing)
    return report


@dataclass
class SnapshotReport:
    index: int
    label: str
    m: int
    campaign: CampaignReport


def run_snapshot_campaign(
    seq: SnapshotSequence,
    cfg: ExperimentConfig,
    predictor=None,
    out=None,
    timing: bool = True,
) -> list[SnapshotReport]:
    """Run a campaign on every snapshot after the first.

    ``predictor`` may be a ``PredictorSpec``, in which case it is built from
    the first snapshot only; ready predictors are used as given. Each snapshot
    gets its own budget ``k = mem_frac * m_i`` unless ``cfg.k`` is fixed.
    """
    if len(seq.snapshots) < 2:
        raise ValueError("need at least two snapshots")
    if isinstance(predictor, PredictorSpec):
        predictor = build_predictor(predictor, seq.snapshots[0])
    reports = []
    for i in range(1, len(seq.snapshots)):
        edges = seq.snapshots[i]
        events = [StreamEvent(e, INSERT, t) for t, e in enumerate(edges, 1)]
        sub = ExperimentConfig(**{**cfg.__dict__, "dataset": seq.labels[i], "mode": EngineMode.INSERTION_ONLY.value})
        rep = run_campaign(events, sub, predictor)
        reports.append(SnapshotReport(i, seq.labels[i], len(edges), rep))
    if out is not None:
        write_csv(out, [r.campaign for r in reports], timing)
    return reports


@dataclass
class FDCampaignReport:
    campaign: CampaignReport
    m_max: int
    trace_times: list[int]
    exact_trace: dict[int, int]

    def error_trace(self) -> list[tuple[int, float, float]]:
        """(t, mean error, std error) across trials at every traced time."""
        out = []
        for idx, t in enumerate(self.trace_times):
            errs = [global_relative_error(tr.trace[idx][1], self.exact_trace[t]) for tr in self.campaign.trials]
            out.append((t, statistics.fmean(errs), statistics.stdev(errs) if len(errs) > 1 else 0.0))
        return out


def run_fd_campaign(
    events: Sequence[StreamEvent],
    cfg: ExperimentConfig,
    predictor=None,
    checkpoints: Sequence[int] = (),
    out=None,
    timing: bool = True,
) -> FDCampaignReport:
    """Fully dynamic campaign with budget ``k = mem_frac * m_max`` and an anytime error trace.

    The trace covers every ``trace_stride`` events (default about 1000 points),
    any extra ``checkpoints`` and the final event.
    """
    events = list(events)
    cfg = ExperimentConfig(**{**cfg.__dict__, "mode": EngineMode.FULLY_DYNAMIC.value})
    m_max = max_concurrent_edges(events)
    sampler_config = cfg.sampler_config(m_max)
    stride = cfg.trace_stride or max(1, len(events) // 1000)
    times = set(range(stride, len(events) + 1, stride)) | {t for t in checkpoints if 0 < t <= len(events)}
    if events:
        times.add(len(events))
    trace_times = sorted(times)
    exact_trace = exact_prefix_counts(events, trace_times)
    final_exact = exact_trace[len(events)] if events else 0
    trials = run_trials(events, sampler_config, predictor, cfg, frozenset(trace_times))
    exact_local = count_exact(replay(events)).local if cfg.keep_locals else None
    report = CampaignReport(cfg, sampler_config.k, final_exact, trials, exact_local)
    if out is not None:
        write_csv(out, [report], timing)
    return FDCampaignReport(report, m_max, trace_times, exact_trace)
