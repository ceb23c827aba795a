"""Command-line entry point: ``batchopt <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 validation or parse error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench, bnb, core, evaluation, generator, heuristics, milp, stats

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _strategy_args(p, default="sshape"):
    p.add_argument("--strategy", choices=evaluation.STRATEGIES, default=default)
    p.add_argument("--variant", choices=evaluation.SSHAPE_VARIANTS, default="parity",
                   help="S-shape travel form")


# -- subcommands ----------------------------------------------------------

def cmd_generate(a):
    lengths = tuple(int(x) for x in a.aisles.split(",")) if a.aisles else None
    cfg = generator.GeneratorConfig(a.n, a.c, tau=a.tau, aisle_lengths=lengths,
                                    mean_items_per_order=a.mean_items,
                                    unique_ratio=a.unique_ratio, catalog_size=a.catalog,
                                    seed=a.seed)
    _emit(core.format_instance(generator.generate_instance(cfg)), a.output)


def cmd_evaluate(a):
    inst = core.read_instance(a.instance, strict=not a.relaxed)
    part = core.read_partition(a.partition)
    part.validate(inst)
    v = evaluation.objective(inst, part, a.strategy, a.variant)
    print(f"packing={v.packing_component}")
    print(f"travel={v.travel_component}")
    print(f"combined={v.combined!r}")


def cmd_sample(a):
    inst = core.read_instance(a.instance)
    cfg = stats.SamplingConfig(n=a.n, master_seed=a.seed, surrogate=a.surrogate,
                               sshape_variant=a.variant, workers=a.workers)
    series = stats.sample_objectives(inst, cfg)
    stats.write_series_csv(series, a.output)
    for name in ("x_return", "x_sshape", "y_pi"):
        try:
            d, p = stats.ks_normality_test(series.column(name))
            print(f"ks {name} statistic={d!r} p_value={p!r}")
        except stats.DegenerateSampleError as exc:
            print(f"ks {name} skipped: {exc}")


def cmd_fit(a):
    series = stats.read_series_csv(a.series)
    fit = stats.fit_bivariate(series, a.pair)
    score = stats.mcrp_score(series, a.beta, a.epsilon, a.pair)
    text = stats.write_fit_report(fit, score)
    if a.y0 is not None:
        text += f"conditional_mean={stats.conditional_mean(fit, a.y0)!r}\n"
        text += f"upper_bound={stats.conditional_upper_bound(fit, a.y0, a.alpha)!r}\n"
    _emit(text, a.report)


def cmd_solve_approx(a):
    inst = core.read_instance(a.instance)
    cfg = bnb.BnbConfig(time_limit_seconds=a.time_limit, node_limit=a.node_limit,
                        branching=a.branching, seed=a.seed,
                        heuristic_iterations=a.heuristic_iterations)
    rep = bnb.solve_approx(inst, a.weighting, cfg)
    _emit(rep.to_text(), a.report)
    if a.output:
        core.write_partition(rep.best_partition, a.output)


def cmd_enumerate(a):
    inst = core.read_instance(a.instance)
    rep = bnb.enumerate_exact(inst, a.strategy, a.variant, cap=a.cap)
    _emit(rep.to_text(), a.report)
    if a.output:
        core.write_partition(rep.best_partition, a.output)


def cmd_heuristic(a):
    inst = core.read_instance(a.instance)
    if a.name == "ils":
        part = heuristics.ils(inst, a.strategy, a.time_budget, a.seed,
                              max_iterations=a.iterations, sshape_variant=a.variant)
    elif a.name in ("cw1", "cw2"):
        part = getattr(heuristics, a.name)(inst, a.strategy, a.variant)
    else:
        part = heuristics.HEURISTICS[a.name](inst, a.strategy)
    _emit(core.format_partition(part), a.output)


def cmd_vpg(a):
    inst = core.read_instance(a.instance)
    part = core.read_partition(a.partition)
    part.validate(inst)
    cfg = heuristics.VpgConfig(k=a.k, m=a.m, strategy=a.strategy, sshape_variant=a.variant)
    pairs = heuristics.generate_valuable_pairs(inst, cfg)
    out, applied = heuristics.vpg_improve(inst, part, pairs, cfg,
                                          until_fixed_point=a.fixed_point)
    print(f"pairs={len(pairs)} applied={applied}", file=sys.stderr)
    _emit(core.format_partition(out), a.output)


_BUILDERS = {
    "return": lambda inst, cfg: milp.build_exact_return(inst, cfg),
    "sshape": lambda inst, cfg: milp.build_exact_sshape(inst, cfg),
    "AP1": lambda inst, cfg: milp.build_approx(inst, "AP1"),
    "AP2": lambda inst, cfg: milp.build_approx(inst, "AP2"),
}


def cmd_export_model(a):
    inst = core.read_instance(a.instance)
    cfg = milp.ModelBuildConfig(ordinal_form=a.ordinal_form)
    ir = _BUILDERS[a.model](inst, cfg)
    milp.export_model(ir, a.output, a.format)
    print(f"variables={ir.n_variables} constraints={len(ir.constraints)}", file=sys.stderr)


def cmd_bench(a):
    cells = bench.read_suite(a.suite)
    limits = bench.BenchLimits(approx_time_limit=a.approx_time,
                               approx_node_limit=a.approx_nodes,
                               ils_time_budget=a.ils_time, ils_iterations=a.ils_iterations,
                               vpg_fixed_point=a.vpg_fixed_point)
    suite = bench.SuiteConfig(cells, reference=a.reference, limits=limits,
                              workers=a.workers, tau=a.tau)
    report = bench.run_benchmark(suite)
    bench.write_report_csv(report, a.output)
    for r in report.failures:
        print(f"cell failed: {r.algo} n={r.n} seed={r.seed}: {r.error}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="batchopt", description="Order batching toolkit.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--n", type=int, required=True, help="number of orders")
    p.add_argument("--c", type=int, required=True, help="batch capacity")
    p.add_argument("--tau", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mean-items", type=float, default=2.8)
    p.add_argument("--unique-ratio", type=float, default=1.5)
    p.add_argument("--catalog", type=int)
    p.add_argument("--aisles", help="comma separated aisle lengths")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="objective of a partition")
    p.add_argument("instance")
    p.add_argument("partition")
    p.add_argument("--relaxed", action="store_true", help="allow one short batch")
    _strategy_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sample", help="Monte Carlo objective samples")
    p.add_argument("instance")
    p.add_argument("-o", "--output", required=True, help="series CSV")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--surrogate", choices=stats.SURROGATES, default="AP2")
    p.add_argument("--variant", choices=evaluation.SSHAPE_VARIANTS, default="parity")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", help="bivariate fit and surrogate score")
    p.add_argument("series")
    p.add_argument("--pair", choices=("return", "sshape"), default="sshape")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--y0", type=float)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--report")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("solve-approx", help="branch-and-bound on the pattern model")
    p.add_argument("instance")
    p.add_argument("--weighting", choices=("AP1", "AP2"), default="AP2")
    p.add_argument("--time-limit", type=float, default=100.0)
    p.add_argument("--node-limit", type=int)
    p.add_argument("--branching", choices=("cheapest", "largest"), default="cheapest")
    p.add_argument("--seed", type=int)
    p.add_argument("--heuristic-iterations", type=int, default=1000)
    p.add_argument("-o", "--output", help="partition file")
    p.add_argument("--report")
    p.set_defaults(func=cmd_solve_approx)

    p = sub.add_parser("enumerate", help="exhaustive optimum of a tiny instance")
    p.add_argument("instance")
    _strategy_args(p)
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("-o", "--output", help="partition file")
    p.add_argument("--report")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("heuristic", help="run a batching heuristic")
    p.add_argument("instance")
    p.add_argument("--name", required=True, choices=sorted(heuristics.HEURISTICS))
    _strategy_args(p)
    p.add_argument("--time-budget", type=float, default=10.0)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_heuristic)

    p = sub.add_parser("vpg", help="valuable-pair swap improvement")
    p.add_argument("instance")
    p.add_argument("partition")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    _strategy_args(p)
    p.add_argument("--fixed-point", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_vpg)

    p = sub.add_parser("export-model", help="write an MPS or LP model")
    p.add_argument("instance")
    p.add_argument("--model", choices=sorted(_BUILDERS), default="AP2")
    p.add_argument("--format", choices=("MPS", "LP"), default="MPS", type=str.upper)
    p.add_argument("--ordinal-form", choices=("cumulative", "adjacent"), default="cumulative")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_export_model)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("suite")
    p.add_argument("-o", "--output", required=True, help="report CSV")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--reference", default="ap2+vpg", choices=sorted(bench.ALGORITHMS))
    p.add_argument("--tau", type=float, default=0.4)
    p.add_argument("--approx-time", type=float, default=100.0)
    p.add_argument("--approx-nodes", type=int)
    p.add_argument("--ils-time", type=float, default=10.0)
    p.add_argument("--ils-iterations", type=int)
    p.add_argument("--vpg-fixed-point", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        args.func(args)
    except (core.ValidationError, core.ParseError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
