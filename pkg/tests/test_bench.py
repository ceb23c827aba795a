import math

import pytest

from batchopt import bench
from batchopt.bench import (BenchLimits, Cell, SuiteConfig, format_suite, parse_suite,
                            read_report_csv, resolve_workers, run_benchmark,
                            write_report_csv)
from batchopt.core import ParseError

FAST = BenchLimits(approx_time_limit=5, approx_node_limit=200, approx_heuristic_iterations=20,
                   ils_time_budget=5, ils_iterations=5)


def test_parse_suite():
    text = "# grid\ncell algo=cw2 n=20 c=5 strategy=sshape seeds=3\n\ncell algo=fcfs n=10 c=2 strategy=return\n"
    cells = parse_suite(text)
    assert cells == (Cell("cw2", 20, 5, "sshape", 3), Cell("fcfs", 10, 2, "return", 20))
    assert parse_suite(format_suite(cells)) == cells


@pytest.mark.parametrize("text,msg", [
    ("run algo=cw2 n=2 c=1 strategy=return", "expected 'cell'"),
    ("cell algo=cw2 n=2 c=1", "missing field strategy"),
    ("cell algo=nope n=2 c=1 strategy=return", "unknown algorithm"),
    ("cell algo=cw2 n=2 c=1 strategy=return color=red", "unknown field"),
    ("cell algo=cw2 n=two c=1 strategy=return", "invalid literal"),
])
def test_parse_suite_errors(text, msg):
    with pytest.raises(ParseError, match=msg):
        parse_suite(text, "s.txt")


def test_one_cell_two_seeds():
    rep = run_benchmark(SuiteConfig((Cell("cw1", 20, 5, "sshape", 2),), reference="cw1", limits=FAST))
    assert [r.seed for r in rep.rows] == [0, 1, "mean"]
    assert all(r.ratio_vs_ref == 1.0 for r in rep.rows)
    assert rep.mean("cw1", 20, 5, "sshape") == pytest.approx(
        (rep.rows[0].objective + rep.rows[1].objective) / 2)


def ratios_recompute(report):
    ref_seed = {(r.n, r.c, r.strategy, r.seed): r.objective
                for r in report.rows if r.algo == report.reference}
    for r in report.rows:
        assert r.ratio_vs_ref == r.objective / ref_seed[(r.n, r.c, r.strategy, r.seed)]


def test_reference_self_ratio_and_recompute(tmp_path):
    cells = (Cell("ap2+vpg", 20, 5, "sshape", 2), Cell("seed", 20, 5, "sshape", 2),
             Cell("fcfs", 20, 5, "return", 2), Cell("ap2+vpg", 20, 5, "return", 2))
    rep = run_benchmark(SuiteConfig(cells, limits=FAST))
    assert all(r.ratio_vs_ref == 1.0 for r in rep.rows if r.algo == "ap2+vpg")
    ratios_recompute(rep)
    path = tmp_path / "r.csv"
    write_report_csv(rep, path)
    again = read_report_csv(path)
    assert again.reference == "ap2+vpg"
    assert [(r.algo, r.seed, r.objective, r.ratio_vs_ref) for r in again.rows] == \
        [(r.algo, r.seed, r.objective, r.ratio_vs_ref) for r in rep.rows]
    ratios_recompute(again)


def test_missing_reference_gives_blank_ratio(tmp_path):
    rep = run_benchmark(SuiteConfig((Cell("fcfs", 10, 2, "return", 1),), limits=FAST))
    assert all(math.isnan(r.ratio_vs_ref) for r in rep.rows)
    write_report_csv(rep, tmp_path / "r.csv")
    assert math.isnan(read_report_csv(tmp_path / "r.csv").rows[0].ratio_vs_ref)


def test_failed_cell_recorded(monkeypatch, tmp_path):
    def boom(inst, strategy, limits):
        if inst.name.endswith("s1"):
            raise RuntimeError("boom")
        return bench.ALGORITHMS["fcfs"](inst, strategy, limits)

    monkeypatch.setitem(bench.ALGORITHMS, "flaky", boom)
    cells = (Cell("flaky", 10, 2, "return", 3), Cell("fcfs", 10, 2, "return", 3))
    rep = run_benchmark(SuiteConfig(cells, reference="fcfs", limits=FAST))
    assert [(r.algo, r.seed) for r in rep.failures] == [("flaky", 1)]
    assert "boom" in rep.failures[0].error
    assert [r.seed for r in rep.rows if r.algo == "flaky"] == [0, 2, "mean"]
    assert len([r for r in rep.rows if r.algo == "fcfs"]) == 4
    write_report_csv(rep, tmp_path / "r.csv")
    assert "# failed algo=flaky" in (tmp_path / "r.csv").read_text()


def test_workers_env(monkeypatch):
    monkeypatch.delenv(bench.WORKERS_ENV, raising=False)
    assert resolve_workers(3) == 3
    monkeypatch.setenv(bench.WORKERS_ENV, "2")
    assert resolve_workers(1) == 2
    monkeypatch.setenv(bench.WORKERS_ENV, "x")
    with pytest.raises(ValueError):
        resolve_workers(1)


def test_worker_count_does_not_change_objectives(monkeypatch):
    monkeypatch.delenv(bench.WORKERS_ENV, raising=False)
    cells = (Cell("cw2", 20, 5, "sshape", 3), Cell("ils", 20, 5, "sshape", 3),
             Cell("ap2", 20, 5, "return", 2))
    runs = [run_benchmark(SuiteConfig(cells, reference="cw2", limits=FAST, workers=w))
            for w in (1, 4)]
    key = [[(r.algo, r.seed, r.objective, r.ratio_vs_ref) for r in rep.rows] for rep in runs]
    assert key[0] == key[1]
