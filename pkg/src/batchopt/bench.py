"""Benchmark harness: seeded instance grid x algorithms, CSV report."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .bnb import BnbConfig, enumerate_exact, solve_approx
from .core import Instance, ParseError, Partition
from .evaluation import STRATEGIES, objective
from .generator import GeneratorConfig, generate_instance
from .heuristics import (VpgConfig, cw1, cw2, fcfs, generate_valuable_pairs, ils,
                         seed_heuristic, vpg_improve)

REPORT_COLUMNS = ("algo", "n", "c", "strategy", "seed", "objective", "cpu_s", "ratio_vs_ref")
WORKERS_ENV = "BATCHOPT_WORKERS"


@dataclass(frozen=True)
class BenchLimits:
    """Per-algorithm limits. Iteration caps make a run reproducible; time
    limits alone do not."""
    approx_time_limit: float = 100.0
    approx_node_limit: int | None = None
    approx_heuristic_iterations: int = 1000
    ils_time_budget: float = 10.0
    ils_iterations: int | None = None
    vpg_fixed_point: bool = False
    exact_cap: int = 10**6


def _approx(weighting: str, vpg: bool):
    def run(instance: Instance, strategy: str, limits: BenchLimits) -> Partition:
        cfg = BnbConfig(time_limit_seconds=limits.approx_time_limit,
                        node_limit=limits.approx_node_limit,
                        heuristic_iterations=limits.approx_heuristic_iterations)
        part = solve_approx(instance, weighting, cfg).best_partition
        if vpg:
            vcfg = VpgConfig(strategy=strategy)
            pairs = generate_valuable_pairs(instance, vcfg)
            part, _ = vpg_improve(instance, part, pairs, vcfg,
                                  until_fixed_point=limits.vpg_fixed_point)
        return part
    return run


ALGORITHMS: dict[str, Callable[[Instance, str, BenchLimits], Partition]] = {
    "fcfs": lambda inst, strategy, limits: fcfs(inst),
    "seed": lambda inst, strategy, limits: seed_heuristic(inst, strategy),
    "cw1": lambda inst, strategy, limits: cw1(inst, strategy),
    "cw2": lambda inst, strategy, limits: cw2(inst, strategy),
    "ils": lambda inst, strategy, limits: ils(inst, strategy, limits.ils_time_budget,
                                              max_iterations=limits.ils_iterations),
    "ap1": _approx("AP1", False),
    "ap2": _approx("AP2", False),
    "ap2+vpg": _approx("AP2", True),
    "exact": lambda inst, strategy, limits: enumerate_exact(
        inst, strategy, cap=limits.exact_cap).best_partition,
}


@dataclass(frozen=True)
class Cell:
    algo: str
    n: int
    c: int
    strategy: str
    seeds: int = 20

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.n < 1 or self.c < 1 or self.seeds < 1:
            raise ValueError("n, c and seeds must be positive")


@dataclass(frozen=True)
class SuiteConfig:
    cells: tuple[Cell, ...]
    reference: str = "ap2+vpg"
    limits: BenchLimits = BenchLimits()
    workers: int = 1
    tau: float = 0.4


def parse_suite(text: str, path: str = "<suite>") -> tuple[Cell, ...]:
    """Suite lines look like ``cell algo=cw2 n=100 c=10 strategy=sshape seeds=20``."""
    cells = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *fields = line.split()
        if head != "cell":
            raise ParseError(path, lineno, f"expected 'cell', got {head!r}")
        kv = {}
        for f in fields:
            if "=" not in f:
                raise ParseError(path, lineno, f"field {f!r} is not key=value")
            k, v = f.split("=", 1)
            kv[k] = v
        missing = {"algo", "n", "c", "strategy"} - kv.keys()
        if missing:
            raise ParseError(path, lineno, f"missing field {sorted(missing)[0]}")
        unknown = kv.keys() - {"algo", "n", "c", "strategy", "seeds"}
        if unknown:
            raise ParseError(path, lineno, f"unknown field {sorted(unknown)[0]}")
        try:
            cells.append(Cell(kv["algo"], int(kv["n"]), int(kv["c"]), kv["strategy"],
                              int(kv.get("seeds", 20))))
        except ValueError as exc:
            raise ParseError(path, lineno, str(exc)) from None
    return tuple(cells)


def read_suite(path) -> tuple[Cell, ...]:
    with open(path, encoding="utf-8") as fh:
        return parse_suite(fh.read(), str(path))


def format_suite(cells: Sequence[Cell]) -> str:
    return "".join(f"cell algo={c.algo} n={c.n} c={c.c} strategy={c.strategy} seeds={c.seeds}\n"
                   for c in cells)


@dataclass
class BenchRow:
    algo: str
    n: int
    c: int
    strategy: str
    seed: int | str
    objective: float
    cpu_s: float
    ratio_vs_ref: float = math.nan
    error: str | None = None


@dataclass
class BenchReport:
    rows: list[BenchRow]
    reference: str
    failures: list[BenchRow] = field(default_factory=list)

    def seed_rows(self) -> list[BenchRow]:
        return [r for r in self.rows if r.seed != "mean"]

    def mean_rows(self) -> list[BenchRow]:
        return [r for r in self.rows if r.seed == "mean"]

    def mean(self, algo: str, n: int, c: int, strategy: str) -> float:
        for r in self.mean_rows():
            if (r.algo, r.n, r.c, r.strategy) == (algo, n, c, strategy):
                return r.objective
        raise KeyError((algo, n, c, strategy))


def _run_cell(task):
    algo, n, c, strategy, seed, tau, limits = task
    try:
        inst = generate_instance(GeneratorConfig(n, c, tau=tau, seed=seed))
        start = time.perf_counter()
        part = ALGORITHMS[algo](inst, strategy, limits)
        elapsed = time.perf_counter() - start
        part.validate(inst)
        value = objective(inst, part, strategy).combined
        return BenchRow(algo, n, c, strategy, seed, value, elapsed)
    except Exception as exc:  # a failed cell must not stop the run
        return BenchRow(algo, n, c, strategy, seed, math.nan, math.nan,
                        error=f"{type(exc).__name__}: {exc}")


def resolve_workers(workers: int) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def run_benchmark(suite: SuiteConfig) -> BenchReport:
    tasks = [(cell.algo, cell.n, cell.c, cell.strategy, seed, suite.tau, suite.limits)
             for cell in suite.cells for seed in range(cell.seeds)]
    workers = resolve_workers(suite.workers)
    if workers == 1 or len(tasks) <= 1:
        results = [_run_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map() keeps task order whatever the completion order
            results = list(pool.map(_run_cell, tasks))
    return assemble_report(results, suite.reference)


def assemble_report(results: Sequence[BenchRow], reference: str) -> BenchReport:
    ok = [r for r in results if r.error is None]
    failures = [r for r in results if r.error is not None]
    ref = {(r.n, r.c, r.strategy, r.seed): r.objective for r in ok if r.algo == reference}

    groups: dict[tuple, list[BenchRow]] = {}
    for r in results:
        groups.setdefault((r.algo, r.n, r.c, r.strategy), [])
        if r.error is None:
            groups[(r.algo, r.n, r.c, r.strategy)].append(r)

    ref_means = {}
    for (algo, n, c, strategy), rows in groups.items():
        if algo == reference and rows:
            ref_means[(n, c, strategy)] = sum(r.objective for r in rows) / len(rows)

    out = []
    for key, rows in groups.items():
        algo, n, c, strategy = key
        for r in rows:
            base = ref.get((n, c, strategy, r.seed))
            out.append(replace(r, ratio_vs_ref=_ratio(r.objective, base)))
        if rows:
            mean_obj = sum(r.objective for r in rows) / len(rows)
            mean_cpu = sum(r.cpu_s for r in rows) / len(rows)
            out.append(BenchRow(algo, n, c, strategy, "mean", mean_obj, mean_cpu,
                                _ratio(mean_obj, ref_means.get((n, c, strategy)))))
    return BenchReport(out, reference, failures)


def _ratio(value: float, base: float | None) -> float:
    if base is None or base == 0:
        return math.nan
    return value / base


def write_report_csv(report: BenchReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# reference={report.reference}\n")
        fh.write("# cpu_s is wall-clock seconds on this host; "
                 "the original experiments ran on an Intel i7 with 16 GB RAM\n")
        for r in report.failures:
            fh.write(f"# failed algo={r.algo} n={r.n} c={r.c} strategy={r.strategy} "
                     f"seed={r.seed}: {r.error}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in report.rows:
            w.writerow([r.algo, r.n, r.c, r.strategy, r.seed, repr(r.objective),
                        f"{r.cpu_s:.6f}", "" if math.isnan(r.ratio_vs_ref) else repr(r.ratio_vs_ref)])


def read_report_csv(path) -> BenchReport:
    reference = ""
    rows = []
    with open(path, encoding="utf-8") as fh:
        lines = []
        for line in fh:
            if line.startswith("# reference="):
                reference = line.strip().split("=", 1)[1]
            elif not line.startswith("#"):
                lines.append(line)
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
        raise ValueError(f"unexpected report columns {reader.fieldnames}")
    for rec in reader:
        seed = rec["seed"] if rec["seed"] == "mean" else int(rec["seed"])
        rows.append(BenchRow(rec["algo"], int(rec["n"]), int(rec["c"]), rec["strategy"], seed,
                             float(rec["objective"]), float(rec["cpu_s"]),
                             float(rec["ratio_vs_ref"]) if rec["ratio_vs_ref"] else math.nan))
    return BenchReport(rows, reference)
