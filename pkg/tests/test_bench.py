import csv
import math
import random
import statistics

import pytest
from scipy import stats

from tonic import bench
from tonic.bench import (
    CSV_COLUMNS,
    ExperimentConfig,
    VarianceBoundInputs,
    csv_text,
    derive_seed,
    global_relative_error,
    local_metrics,
    prop1_bound,
    run_campaign,
    run_fd_campaign,
    run_snapshot_campaign,
    spearman,
    top_nodes,
)
from tonic.engine import Tonic
from tonic.exact import count_exact
from tonic.predictors import EdgePredictor, PredictorSpec, build_exact_predictor
from tonic.sampler import SamplerConfig
from tonic.stream import (
    DELETE,
    SnapshotSequence,
    StreamEvent,
    insertion_stream,
    snapshot_boundaries,
    synthesize_fd_stream,
)
from tonic.synthetic import clique_edges, drifting_snapshots, gnp_edges, planted_clusters, planted_hubs


def test_global_relative_error():
    assert global_relative_error(90, 100) == pytest.approx(0.1)
    assert global_relative_error(100, 100) == 0
    assert global_relative_error(2.5, 0) == 2.5


def test_local_metrics_perfect_and_reversed():
    exact = {1: 10, 2: 8, 3: 6, 4: 4, 5: 2, 6: 0}
    assert local_metrics(exact, exact, 1.0) == (0.0, 1.0)
    top = top_nodes(exact, 1.0)
    assert top == [1, 2, 3, 4, 5]
    reversed_est = {u: 100 - exact[u] for u in top}
    assert local_metrics(reversed_est, exact, 1.0)[1] == pytest.approx(-1.0)


def test_top_nodes_fraction_and_ties():
    exact = {7: 3, 2: 3, 9: 5, 4: 1, 1: 1}
    assert top_nodes(exact, 0.2) == [9]
    assert top_nodes(exact, 0.6) == [9, 2, 7]
    with pytest.raises(ValueError):
        top_nodes({1: 0, 2: 0})


def test_spearman_matches_scipy():
    rng = random.Random(4)
    exact = {u: rng.randrange(1, 40) for u in range(200)}
    est = {u: exact[u] * rng.uniform(0.5, 1.5) + rng.choice([0, 0, 3]) for u in exact}
    top = top_nodes(exact, 0.2)
    err, rho = local_metrics(est, exact, 0.2)
    truth = [exact[u] for u in top]
    guess = [est[u] for u in top]
    assert rho == pytest.approx(stats.spearmanr(truth, guess).statistic, abs=1e-12)
    assert err == pytest.approx(statistics.fmean(abs(g - t) / t for g, t in zip(guess, truth)))
    ties_a = [rng.randrange(5) for _ in range(60)]
    ties_b = [rng.randrange(5) for _ in range(60)]
    assert spearman(ties_a, ties_b) == pytest.approx(stats.spearmanr(ties_a, ties_b).statistic, abs=1e-12)


def test_prop1_values():
    assert prop1_bound(VarianceBoundInputs(0.1, 0.09, 1.5, 10)) == pytest.approx(0.45, abs=0.005)
    assert prop1_bound(VarianceBoundInputs(0.1, 0.09, 1.5, 100)) == pytest.approx(0.24, abs=0.005)


def test_prop1_limit_and_errors():
    assert prop1_bound(VarianceBoundInputs(0.1, 0.1 - 1e-12, 1.5, 10)) == pytest.approx(0, abs=1e-8)
    for args in [(1.0, 0.5, 1.5, 10), (0.1, 0.1, 1.5, 10), (0.1, 0.2, 1.5, 10),
                 (0.1, 0.09, 0.5, 10), (0.1, 0.09, 1.5, 2)]:
        with pytest.raises(ValueError):
            VarianceBoundInputs(*args)


def test_prop1_decreasing_in_rho():
    for p in (0.05, 0.1, 0.3, 0.7):
        for q in (0.5 * p, 0.9 * p, 0.99 * p):
            vals = [prop1_bound(VarianceBoundInputs(p, q, 1.0, rho)) for rho in range(3, 400, 7)]
            assert all(a > b for a, b in zip(vals, vals[1:]))


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(mem_frac=0)
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(mode="bogus")
    assert ExperimentConfig().budget(1000) == 100
    assert ExperimentConfig(k=77).budget(1000) == 77


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("TONIC_THREADS", "3")
    assert ExperimentConfig().worker_count() == 3
    assert ExperimentConfig(threads=1).worker_count() == 1


def test_derive_seed():
    assert derive_seed(0, 1) == derive_seed(0, 1)
    seeds = {derive_seed(m, t) for m in range(5) for t in range(200)}
    assert len(seeds) == 1000


def test_single_trial_exact():
    edges = gnp_edges(50, 0.15, seed=1)
    rep = run_campaign(insertion_stream(edges), ExperimentConfig(k=len(edges), trials=1))
    assert rep.errors == [0.0]
    assert rep.exact == count_exact(edges).global_count
    rep = run_campaign(insertion_stream(edges), ExperimentConfig(k=len(edges), trials=4, keep_locals=True))
    assert rep.mean_error == 0 and rep.local_summary() == (0.0, 1.0)


def test_csv_schema_and_aggregates(tmp_path):
    edges = planted_clusters(120, 0.06, [8], seed=7)
    cfg = ExperimentConfig(dataset="pc", trials=12, seed=5, predictor="exact")
    pred = build_exact_predictor(count_exact(edges, per_edge=True))
    out = tmp_path / "r.csv"
    rep = run_campaign(insertion_stream(edges), cfg, pred, out=out)
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == CSV_COLUMNS
    assert [int(r["trial"]) for r in rows] == list(range(12))
    assert all(r["dataset"] == "pc" and r["predictor"] == "exact" and r["runtime_ms"] for r in rows)
    errs = [float(r["rel_error"]) for r in rows]
    ests = [float(r["estimate"]) for r in rows]
    summary = rep.summary()
    assert summary["mean_error"] == statistics.fmean(errs)
    assert summary["std_error"] == statistics.stdev(errs)
    assert summary["mean_estimate"] == statistics.fmean(ests)
    assert summary["trials"] == 12
    assert [int(r["seed"]) for r in rows] == [derive_seed(5, i) for i in range(12)]


def test_campaign_determinism_serial_vs_parallel():
    edges = planted_clusters(150, 0.05, [8, 6], seed=3)
    events = insertion_stream(edges)
    pred = build_exact_predictor(count_exact(edges, per_edge=True))
    serial = run_campaign(events, ExperimentConfig(trials=16, seed=9, threads=1), pred)
    again = run_campaign(events, ExperimentConfig(trials=16, seed=9, threads=1), pred)
    parallel = run_campaign(events, ExperimentConfig(trials=16, seed=9, threads=2), pred)
    assert csv_text([serial], timing=False) == csv_text([again], timing=False)
    assert csv_text([serial], timing=False) == csv_text([parallel], timing=False)
    other = run_campaign(events, ExperimentConfig(trials=16, seed=10, threads=1), pred)
    assert serial.estimates != other.estimates


def test_variance_drops_with_oracle():
    edges = planted_hubs(300, 0.02, 6, 60, seed=7)
    events = insertion_stream(edges)
    k = len(edges) // 10
    pred = build_exact_predictor(count_exact(edges, per_edge=True))
    base = run_campaign(events, ExperimentConfig(k=k, beta=0.0, trials=300, seed=1))
    tonic = run_campaign(events, ExperimentConfig(k=k, trials=300, seed=2), pred)
    assert statistics.variance(tonic.estimates) < statistics.variance(base.estimates)


def test_snapshot_campaign_identical_snapshots():
    edges = planted_clusters(150, 0.05, [9], seed=2)
    seq = SnapshotSequence([edges, list(edges), list(edges)])
    reps = run_snapshot_campaign(seq, ExperimentConfig(trials=30, seed=4), PredictorSpec("exact"))
    assert [r.index for r in reps] == [1, 2]
    # same input and same seeds give the very same trials
    assert reps[0].campaign.estimates == reps[1].campaign.estimates


def test_snapshot_campaign_disjoint_second_snapshot():
    first = clique_edges(range(10))
    second = [(u + 100, v + 100) for u, v in planted_clusters(60, 0.1, [6], seed=1)]
    seq = SnapshotSequence([first, second])
    pred = bench.build_predictor(PredictorSpec("exact"), first)
    assert all(pred.query(u, v) == 0 for u, v in second)

    seen = []

    class Spy(EdgePredictor):
        def score(self, edge):
            s = super().score(edge)
            seen.append(s)
            return s

    reps = run_snapshot_campaign(seq, ExperimentConfig(trials=3), Spy(pred.entries))
    assert seen and set(seen) == {0}
    assert reps[0].m == len(second)


def test_snapshot_campaign_drifting_schema(tmp_path):
    seq = drifting_snapshots(150, 0.04, [8, 6], steps=4, drift=0.2, seed=3)
    out = tmp_path / "snap.csv"
    reps = run_snapshot_campaign(seq, ExperimentConfig(trials=5, seed=1), PredictorSpec("exact"), out=out)
    assert [r.label for r in reps] == ["t2", "t3", "t4"]
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 15 and {r["dataset"] for r in rows} == {"t2", "t3", "t4"}
    for r in reps:
        assert r.campaign.k == math.floor(0.1 * r.m)
        assert all(e >= 0 for e in r.campaign.errors)


def test_snapshot_campaign_needs_two():
    with pytest.raises(ValueError):
        run_snapshot_campaign(SnapshotSequence([[(1, 2)]]), ExperimentConfig())


def _insert_then_delete(edges):
    events = insertion_stream(edges)
    return events + [StreamEvent(e, DELETE, len(edges) + i + 1) for i, e in enumerate(reversed(edges))]


def test_fd_campaign_insert_all_delete_all():
    edges = planted_clusters(60, 0.1, [6], seed=1)
    events = _insert_then_delete(edges)
    rep = run_fd_campaign(events, ExperimentConfig(trials=5, mem_frac=1.0))
    assert rep.m_max == len(edges)
    assert rep.campaign.k == len(edges)
    assert rep.campaign.estimates == [0.0] * 5
    assert rep.exact_trace[len(events)] == 0


def test_fd_insert_delete_sampled_is_zero_in_expectation():
    # with sampling, insertion and deletion increments use different
    # probabilities, so the residue is zero only on average
    edges = planted_clusters(60, 0.1, [6], seed=1)
    events = _insert_then_delete(edges)
    cfg = SamplerConfig(len(edges) * 3 // 10, 0.05, 0.2)
    raw = []
    for seed in range(1500):
        eng = Tonic(cfg, mode="fully_dynamic", seed=seed)
        eng.run(events)
        raw.append(eng.estimates.global_hat)
        assert eng.report_global() >= 0 and len(eng.sampler) == 0
    assert abs(statistics.fmean(raw)) <= 4 * statistics.stdev(raw) / math.sqrt(len(raw))


def test_fd_campaign_without_deletions_matches_insertion_trace():
    edges = planted_clusters(100, 0.08, [7], seed=8)
    events = insertion_stream(edges)
    cfg = ExperimentConfig(trials=3, seed=2, trace_stride=25)
    fd = run_fd_campaign(events, cfg)
    ins = run_campaign(events, cfg)
    for a, b in zip(fd.campaign.trials, ins.trials):
        assert a.trace[: len(b.trace)] == b.trace
        assert a.estimate == b.estimate


def test_fd_campaign_boundaries_vs_oracle():
    rng = random.Random(2)
    snaps = []
    for _ in range(3):
        snap = planted_clusters(80, 0.08, [7], seed=rng.randrange(10**6))
        snaps.append(snap)
    seq = SnapshotSequence(snaps)
    events = synthesize_fd_stream(seq, 1)
    bounds = snapshot_boundaries(seq)
    rep = run_fd_campaign(events, ExperimentConfig(trials=4, seed=3), checkpoints=bounds)
    for b, snap in zip(bounds, snaps):
        assert rep.exact_trace[b] == count_exact(snap).global_count
    trace = dict((t, (m, s)) for t, m, s in rep.error_trace())
    assert set(bounds) <= set(trace)
    for i, b in enumerate(rep.trace_times):
        for trial in rep.campaign.trials:
            assert trial.trace[i][0] == b
    # a budget covering everything makes every boundary exact
    exact_rep = run_fd_campaign(events, ExperimentConfig(trials=2, mem_frac=1.0, alpha=0.05), checkpoints=bounds)
    assert all(trace_err == 0 for t, trace_err, _ in exact_rep.error_trace())
