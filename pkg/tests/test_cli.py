import json
import math
import subprocess
import sys

import numpy as np
import pytest

from metafib import engine
from metafib.cli import main, parse_size, read_terms, write_terms
from metafib.families import make_spec


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_parse_size():
    assert parse_size("10") == 10
    assert parse_size("2k") == 2000
    assert parse_size("11M") == 11_000_000
    assert parse_size("8G") == 8 * 10**9
    assert parse_size("1Ki") == 1024
    assert parse_size("3Gi") == 3 * 2**30


def test_eval_h3(tmp_path, capsys):
    out = tmp_path / "h3.csv"
    assert run_cli("eval", "--preset", "hk:3", "--cap", 1000, "--out", out) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["status"] == "died" and summary["length"] == 53
    assert summary["died_at"] == 54 and summary["max_term"] == 69
    n, v = read_terms(out)
    assert len(n) == 53 and list(n) == list(range(1, 54))


def test_eval_q(tmp_path, capsys):
    out = tmp_path / "q.csv"
    assert run_cli("eval", "--preset", "q", "--cap", 10, "--out", out) == 0
    assert out.read_text() == "n,value\n" + "".join(
        f"{i},{v}\n" for i, v in enumerate([1, 1, 2, 3, 3, 4, 5, 5, 6, 6], start=1)
    )
    assert json.loads(capsys.readouterr().out)["status"] == "cap-reached"


def test_eval_rule_file(tmp_path, capsys):
    rule = tmp_path / "h.rec"
    rule.write_text("H(n)=H(n-H(n-2))+H(n-H(n-3)); init ceil(n/2); start 6\n")
    assert run_cli("eval", "--rule-file", rule, "--cap", "1k") == 0
    assert json.loads(capsys.readouterr().out)["length"] == 24


def test_eval_bad_rule_file(tmp_path, capsys):
    rule = tmp_path / "bad.rec"
    rule.write_text("A(n)=A(n-A(n-1)+; init list 1; start 1")
    assert run_cli("eval", "--rule-file", rule, "--cap", 100) == 1
    err = capsys.readouterr().err
    assert "column 17" in err


def test_eval_usage_errors(capsys):
    assert run_cli("eval", "--preset", "hk:2") == 1
    assert run_cli("eval", "--preset", "q", "--cap", "lots") == 1
    assert run_cli("eval") == 1
    assert run_cli("frobnicate") == 1
    assert run_cli("eval", "--preset", "hk:10", "--cap", 5) == 1


def test_eval_budget_and_overflow_exit_2(tmp_path, capsys):
    assert run_cli("eval", "--preset", "q", "--cap", "1M", "--budget", 4096) == 2
    assert json.loads(capsys.readouterr().out)["status"] == "budget-exceeded"
    rule = tmp_path / "dbl.rec"
    rule.write_text("A(n)=A(n-1)+A(n-1); init list 1; start 1")
    assert run_cli("eval", "--rule-file", rule, "--cap", 100) == 2
    assert json.loads(capsys.readouterr().out)["status"] == "overflow"


def test_csv_roundtrip(tmp_path):
    hist, _ = engine.run(engine.compile_plan(make_spec("hk:12")), cap=5000)
    path = tmp_path / "t.csv"
    write_terms(hist.values(), path, chunk=777)
    n, v = read_terms(path)
    assert np.array_equal(v, hist.values()) and np.array_equal(n, np.arange(1, len(hist) + 1))


def test_sweep_cap(tmp_path, capsys):
    assert run_cli("sweep", "--k", "3:7", "--cap", 100) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,L,status,max_term,wall_ms"
    assert [line.split(",")[1] for line in lines[1:]] == ["53", "42", "-1", "24", "39"]


def test_sweep_to_file_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli("sweep", "--k", "3:12", "--cap", "1M", "--jobs", 1, "--no-timing", "--out", a) == 0
    assert run_cli("sweep", "--k", "3:12", "--cap", "1M", "--jobs", 4, "--no-timing", "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "max L: k=10 L=22308" in capsys.readouterr().out


def test_sweep_refuses_memory_overcommit(capsys):
    assert run_cli("sweep", "--k", "3:4", "--jobs", 4, "--budget", "1Gi", "--mem-limit", "2Gi") == 1
    assert "exceeds the memory limit" in capsys.readouterr().err


def test_sweep_budget_rows_exit_2(capsys):
    assert run_cli("sweep", "--k", "3:9", "--cap", "1M", "--budget", 4096) == 2
    assert ",,budget-exceeded," in capsys.readouterr().out


def test_stats_degenerate_input(tmp_path, capsys):
    path = tmp_path / "half.csv"
    write_terms(np.array([(n + 1) // 2 for n in range(1, 4001)]), path)
    out = tmp_path / "s.csv"
    assert run_cli("stats", "--terms", path, "--n0", 1000, "--nmax", 4000, "--out", out) == 0
    rows = out.read_text().splitlines()[1:]
    assert all(float(r.split(",")[5]) == 0.25 for r in rows)  # S is 0 or 1/2
    summary = json.loads(capsys.readouterr().out)
    assert summary["alpha"] == [[2, 0.0]]


def test_stats_doubling_amplitude(tmp_path, capsys):
    n = np.arange(1, 8001)
    # H = ceil(n/2) + amp*sign with amp doubling per generation and a ++-- sign
    # pattern, so the parity part of 2S is uncorrelated with the amplitude part
    amps = (100, 200, 400)
    amp = np.where(n <= 2000, amps[0], np.where(n <= 4000, amps[1], amps[2]))
    sign = np.where(((n - 1) // 2) % 2 == 0, 1, -1)
    h = (n + 1) // 2 + amp * sign
    path = tmp_path / "syn.csv"
    write_terms(h, path)
    assert run_cli("stats", "--terms", path, "--n0", 1000, "--nmax", 8000, "--out", tmp_path / "s.csv") == 0
    summary = json.loads(capsys.readouterr().out)
    # variance of 2S per block: 4*amp^2 from the sign part plus 1/4 from parity
    expected = [0.5 * math.log2((4 * b * b + 0.25) / (4 * a * a + 0.25)) for a, b in zip(amps, amps[1:])]
    assert [t for t, _ in summary["alpha"]] == [2, 3]
    for (_, got), want in zip(summary["alpha"], expected):
        assert abs(got - want) < 1e-12 and abs(got - 1) < 1e-5


def test_stats_explicit_boundaries(capsys):
    assert run_cli("stats", "--preset", "hk:20", "--cap", 5000, "--boundaries", "100,200,400,800") == 0
    captured = capsys.readouterr()
    assert len(captured.out.splitlines()) == 4
    assert len(json.loads(captured.err)["alpha"]) == 2


def test_stats_range_beyond_terms(capsys):
    assert run_cli("stats", "--preset", "hk:3", "--n0", 10, "--nmax", 1000) == 2
    assert "only 53" in capsys.readouterr().err


def test_plot_files(tmp_path):
    q = tmp_path / "q.csv"
    c = tmp_path / "c.csv"
    hist, _ = engine.run(engine.compile_plan(make_spec("q")), cap=2000)
    write_terms(hist.values(), q)
    hist, _ = engine.run(engine.compile_plan(make_spec("conway:1")), cap=2**13)
    write_terms(hist.values(), c)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run_cli("plot", q, "--out", a) == 0
    assert run_cli("plot", q, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().count("<circle") == 2000
    d = tmp_path / "dev.svg"
    assert run_cli("plot", c, "--source", "deviations", "--xmin", 2**11, "--xmax", 2**13,
                   "--stride", 2, "--out", d) == 0
    assert d.read_text().count("<circle") == (2**13 - 2**11) // 2 + 1


def test_plot_empty_series(tmp_path, capsys):
    q = tmp_path / "q.csv"
    write_terms(np.array([1, 1, 2]), q)
    assert run_cli("plot", q, "--xmin", 10, "--xmax", 20, "--out", tmp_path / "x.svg") == 2


def test_console_script_exit_code(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "metafib.cli", "eval", "--preset", "hk:6", "--cap", "100"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["length"] == 24
    proc = subprocess.run([sys.executable, "-m", "metafib.cli", "sweep"], capture_output=True, text=True)
    assert proc.returncode == 1 and "error" in proc.stderr
