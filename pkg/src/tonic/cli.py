"""``tonic`` command line."""

from __future__ import annotations

import argparse
import json
import sys

from . import bench
from .exact import count_exact, dump_exact_counts
from .predictors import (
    KINDS,
    NullPredictor,
    PredictorSpec,
    RandomPredictor,
    adversarial_invert,
    build_predictor,
    load_predictor,
    save_predictor,
)
from .sampler import SamplerConfig
from .stream import (
    ingest_edge_list,
    ingest_fd_stream,
    load_manifest,
    load_snapshot_sequence,
    replay,
    snapshot_boundaries,
    synthesize_fd_stream,
)


def _resolve_predictor(text: str, training):
    """``none`` | ``random:SEED`` | ``KIND`` (built from ``training``) | ``LABEL:PATH``."""
    if text in ("none", ""):
        return NullPredictor()
    kind, _, arg = text.partition(":")
    if kind == "random":
        return RandomPredictor(int(arg or 0))
    if not arg:
        if kind not in KINDS or kind == "noWR":
            raise SystemExit(f"predictor {text!r}: give KIND:PATH or one of {[k for k in KINDS if k != 'noWR']}")
        return build_predictor(PredictorSpec(kind), training)
    return load_predictor(arg)


def _experiment_config(args, dataset: str) -> bench.ExperimentConfig:
    return bench.ExperimentConfig(
        dataset=dataset,
        k=args.k,
        mem_frac=args.mem_frac,
        alpha=args.alpha,
        beta=args.beta,
        predictor=args.predictor,
        trials=args.trials,
        seed=args.seed,
        trace_stride=args.trace_stride,
        threads=args.threads,
        strict_fd=getattr(args, "strict_fd", False),
    )


def _print_summary(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def cmd_exact(args):
    if args.fd:
        edges = replay(ingest_fd_stream(args.stream))
    else:
        edges = [ev.edge for ev in ingest_edge_list(args.stream)[0]]
    counts = count_exact(edges, per_edge=args.per_edge)
    if args.out:
        dump_exact_counts(args.out, counts)
    print(f"global {counts.global_count}")


def _training_edges(path):
    return ingest_edge_list(path)[0]


def cmd_build(args, kind):
    events = _training_edges(args.stream)
    if kind == "noWR":
        wr = args.wr_size
        if wr is None:
            wr = SamplerConfig(args.k or max(2, int(args.mem_frac * len(events))), args.alpha, 0.0).wr_cap
        spec = PredictorSpec("noWR", args.retain, wr)
    elif kind == "mindeg":
        spec = PredictorSpec("min_degree_edge" if args.edge_based else "min_degree_node", args.retain)
    else:
        spec = PredictorSpec(kind, args.retain)
    pred = build_predictor(spec, events)
    save_predictor(pred, args.out)
    print(f"{spec.kind}: {len(pred)} entries -> {args.out}")


def cmd_invert(args):
    events = _training_edges(args.stream)
    kind = {"exact": "adversarial_exact", "min_degree": "adversarial_min_degree"}[args.kind]
    pred = adversarial_invert(PredictorSpec(kind, args.retain), [ev.edge for ev in events])
    save_predictor(pred, args.out)
    print(f"{kind}: {len(pred)} entries -> {args.out}")


def cmd_bound(args):
    value = bench.prop1_bound(bench.VarianceBoundInputs(args.p, args.p_prime, args.c, args.rho))
    print(f"{value:.6f}")


def cmd_run(args):
    if args.mode == "fully_dynamic":
        args.snapshots = args.manifest = None
        return cmd_run_fd(args)
    events, stats = ingest_edge_list(args.stream)
    cfg = _experiment_config(args, args.dataset or args.stream)
    pred = _resolve_predictor(args.predictor, events)
    report = bench.run_campaign(events, cfg, pred, out=args.out, timing=not args.no_timing)
    _print_summary(report.summary())


def cmd_run_fd(args):
    checkpoints = []
    if args.snapshots or args.manifest:
        seq = load_manifest(args.manifest) if args.manifest else load_snapshot_sequence(args.snapshots)
        events = synthesize_fd_stream(seq, args.seed)
        checkpoints = snapshot_boundaries(seq)
        training = [ev for ev in events[: checkpoints[0]]]
    else:
        events = ingest_fd_stream(args.stream)
        training = [ev for ev in events if ev.sign > 0]
    cfg = _experiment_config(args, args.dataset or (args.stream or "fd"))
    pred = _resolve_predictor(args.predictor, [ev.edge for ev in training])
    report = bench.run_fd_campaign(events, cfg, pred, checkpoints, out=args.out, timing=not args.no_timing)
    _print_summary({**report.campaign.summary(), "m_max": report.m_max})
    if args.trace_out:
        with open(args.trace_out, "w") as fh:
            fh.write("t,exact,mean_error,std_error\n")
            for t, mean, std in report.error_trace():
                fh.write(f"{t},{report.exact_trace[t]},{mean!r},{std!r}\n")


def cmd_run_snapshots(args):
    seq = load_manifest(args.manifest) if args.manifest else load_snapshot_sequence(args.snapshots)
    cfg = _experiment_config(args, "snapshots")
    if args.predictor in KINDS and args.predictor != "noWR":
        pred = PredictorSpec(args.predictor)
    else:
        pred = _resolve_predictor(args.predictor, seq.snapshots[0])
    reports = bench.run_snapshot_campaign(seq, cfg, pred, out=args.out, timing=not args.no_timing)
    for r in reports:
        _print_summary({"snapshot": r.label, "m": r.m, **r.campaign.summary()})


def _add_run_flags(p, stream_required=True):
    if stream_required:
        p.add_argument("--stream", required=True)
    budget = p.add_mutually_exclusive_group()
    budget.add_argument("--k", type=int, help="memory budget in edges")
    budget.add_argument("--mem-frac", type=float, default=0.1, help="budget as a fraction of m (default 0.1)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--predictor", default="none", help="none | random:SEED | KIND | LABEL:PATH")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-stride", type=int)
    p.add_argument("--threads", type=int, help="worker processes (default $TONIC_THREADS or 1)")
    p.add_argument("--dataset")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--no-timing", action="store_true", help="leave runtime_ms empty for reproducible CSVs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tonic", description="Streaming triangle counting with heaviness predictions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="campaign over an edge list (or an FD stream with --mode fully_dynamic)")
    _add_run_flags(p)
    p.add_argument("--mode", choices=["insertion_only", "fully_dynamic"], default="insertion_only")
    p.add_argument("--strict-fd", action="store_true")
    p.add_argument("--trace-out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("run-fd", help="fully dynamic campaign")
    _add_run_flags(p, stream_required=False)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--stream", help="FD stream file 'u v sign'")
    src.add_argument("--snapshots", nargs="+", help="edge lists to diff into an FD stream")
    src.add_argument("--manifest", help="file listing snapshot edge lists")
    p.add_argument("--strict-fd", action="store_true", help="reject deletions of absent edges")
    p.add_argument("--trace-out", help="CSV of the anytime error trace")
    p.set_defaults(func=cmd_run_fd)

    p = sub.add_parser("run-snapshots", help="campaign on each snapshot after the first")
    _add_run_flags(p, stream_required=False)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--snapshots", nargs="+")
    src.add_argument("--manifest")
    p.set_defaults(func=cmd_run_snapshots)

    p = sub.add_parser("exact", help="exact triangle counts")
    p.add_argument("--stream", required=True)
    p.add_argument("--fd", action="store_true", help="input is an FD stream; count its final graph")
    p.add_argument("--per-edge", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    for name, kind in (("build-oracle", "exact"), ("build-nowr", "noWR"), ("build-mindeg", "mindeg")):
        p = sub.add_parser(name)
        p.add_argument("--stream", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--retain", type=float, default=0.10)
        if kind == "noWR":
            p.add_argument("--wr-size", type=int)
            p.add_argument("--k", type=int)
            p.add_argument("--mem-frac", type=float, default=0.1)
            p.add_argument("--alpha", type=float, default=0.05)
        if kind == "mindeg":
            p.add_argument("--edge-based", action="store_true")
        p.set_defaults(func=lambda a, kind=kind: cmd_build(a, kind))

    p = sub.add_parser("invert", help="adversarial predictor")
    p.add_argument("--kind", choices=["exact", "min_degree"], required=True)
    p.add_argument("--stream", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--retain", type=float, default=0.10)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("bound", help="heavy/light ratio above which the heavy set lowers variance")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--p-prime", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"tonic: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
