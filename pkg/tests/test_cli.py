import csv
import json
import shutil
import subprocess
import sys

import pytest

from tonic.cli import main
from tonic.predictors import load_predictor
from tonic.stream import write_edge_list, write_fd_stream
from tonic.synthetic import drifting_snapshots, planted_clusters, random_fd_stream


@pytest.fixture
def graph(tmp_path):
    p = tmp_path / "g.txt"
    write_edge_list(p, planted_clusters(120, 0.06, [8, 6], seed=3))
    return p


def test_bound(capsys):
    assert main(["bound", "--p", "0.1", "--p-prime", "0.09", "--c", "1.5", "--rho", "10"]) == 0
    assert capsys.readouterr().out.strip() == "0.450825"
    assert main(["bound", "--p", "0.1", "--p-prime", "0.09", "--c", "1.5", "--rho", "100"]) == 0
    assert abs(float(capsys.readouterr().out) - 0.24) <= 0.005


def test_bound_rejects_p_one(capsys):
    assert main(["bound", "--p", "1", "--p-prime", "0.5", "--c", "1.5", "--rho", "10"]) == 2
    assert "error" in capsys.readouterr().err


def test_exact(graph, tmp_path, capsys):
    out = tmp_path / "counts.txt"
    assert main(["exact", "--stream", str(graph), "--per-edge", "--out", str(out)]) == 0
    first = capsys.readouterr().out.split()
    assert first[0] == "global"
    assert out.read_text().splitlines()[0] == f"global {first[1]}"


@pytest.mark.parametrize("cmd, extra", [
    ("build-oracle", []),
    ("build-nowr", ["--wr-size", "5"]),
    ("build-nowr", []),
    ("build-mindeg", []),
    ("build-mindeg", ["--edge-based"]),
])
def test_builders(graph, tmp_path, cmd, extra):
    out = tmp_path / "p.txt"
    assert main([cmd, "--stream", str(graph), "--out", str(out), *extra]) == 0
    assert len(load_predictor(out)) > 0


def test_invert(graph, tmp_path):
    honest, adv = tmp_path / "h.txt", tmp_path / "a.txt"
    main(["build-mindeg", "--stream", str(graph), "--out", str(honest)])
    assert main(["invert", "--kind", "min_degree", "--stream", str(graph), "--out", str(adv)]) == 0
    assert len(load_predictor(honest)) == len(load_predictor(adv))


def test_run_with_predictor_file(graph, tmp_path, capsys):
    pred = tmp_path / "p.txt"
    main(["build-oracle", "--stream", str(graph), "--out", str(pred)])
    capsys.readouterr()
    out = tmp_path / "r.csv"
    assert main(["run", "--stream", str(graph), "--predictor", f"exact:{pred}", "--trials", "6",
                 "--out", str(out), "--no-timing"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["trials"] == 6
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6 and rows[0]["predictor"] == f"exact:{pred}" and rows[0]["runtime_ms"] == ""


def test_run_byte_identical(graph, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["run", "--stream", str(graph), "--predictor", "min_degree_node", "--trials", "8", "--seed", "3",
            "--no-timing"]
    main(base + ["--out", str(a)])
    main(base + ["--out", str(b), "--threads", "2"])
    assert a.read_bytes() == b.read_bytes()


def test_run_random_and_none(graph, capsys):
    assert main(["run", "--stream", str(graph), "--predictor", "random:4", "--trials", "2"]) == 0
    assert main(["run", "--stream", str(graph), "--k", "30", "--beta", "0", "--trials", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert json.loads(lines[1])["k"] == 30


def test_run_missing_predictor_file(graph, capsys):
    assert main(["run", "--stream", str(graph), "--predictor", "exact:/nonexistent/p.txt"]) == 2


def test_run_fd_stream(tmp_path, capsys):
    fd = tmp_path / "fd.txt"
    write_fd_stream(fd, random_fd_stream(40, 600, seed=1))
    trace = tmp_path / "trace.csv"
    assert main(["run-fd", "--stream", str(fd), "--trials", "3", "--mem-frac", "0.5", "--strict-fd",
                 "--trace-out", str(trace), "--trace-stride", "100"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["m_max"] > 0
    rows = trace.read_text().splitlines()
    assert rows[0] == "t,exact,mean_error,std_error" and len(rows) == 7
    assert main(["run", "--mode", "fully_dynamic", "--stream", str(fd), "--trials", "2"]) == 0


def test_run_fd_strict_rejects_bad_stream(tmp_path, capsys):
    fd = tmp_path / "fd.txt"
    fd.write_text("1 2 +\n3 4 -\n")
    assert main(["run-fd", "--stream", str(fd), "--trials", "1", "--strict-fd"]) == 2
    assert main(["run-fd", "--stream", str(fd), "--trials", "1"]) == 0


def test_snapshots(tmp_path, capsys):
    seq = drifting_snapshots(100, 0.05, [7], steps=3, drift=0.2, seed=2)
    paths = []
    for label, snap in zip(seq.labels, seq.snapshots):
        p = tmp_path / f"{label}.txt"
        write_edge_list(p, snap)
        paths.append(str(p))
    (tmp_path / "manifest.txt").write_text("\n".join(p.split("/")[-1] for p in paths) + "\n")
    assert main(["run-snapshots", "--manifest", str(tmp_path / "manifest.txt"), "--predictor", "exact",
                 "--trials", "3"]) == 0
    lines = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert [x["snapshot"] for x in lines] == ["t2", "t3"]
    assert main(["run-fd", "--snapshots", *paths, "--trials", "2", "--predictor", "exact"]) == 0


@pytest.mark.skipif(shutil.which("tonic") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["tonic", "bound", "--p", "0.1", "--p-prime", "0.09", "--c", "1.5", "--rho", "100"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "0.235010"


def test_module_entry():
    res = subprocess.run([sys.executable, "-m", "tonic.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "run-fd" in res.stdout
