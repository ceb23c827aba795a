import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from batchopt.bnb import (BnbConfig, SolveReport, _PatternSearch, count_partitions,
                          decode_pattern_solution, enumerate_exact, ir_brute_force,
                          iter_partitions, solve_approx, surrogate_value)
from batchopt.core import ValidationError, chunk_partition, extract_patterns
from batchopt.evaluation import objective
from batchopt.heuristics import HEURISTICS
from batchopt.milp import Constraint, ModelIR, Variable, aisle_weights, pattern_counts
from conftest import make_instance, random_tiny_instance
from oracles import brute_min, count_assignments, surrogate_min


def few_pattern_instance(seed, n_batches=3, capacity=2):
    # two aisles -> at most three distinct aisle sets
    return random_tiny_instance(seed, n_orders=n_batches * capacity, capacity=capacity,
                                n_aisles=3, n_items=6, max_order_items=2)


def test_single_pattern_solved_at_root():
    inst = make_instance((5, 4, 3), {1: (1, 1), 2: (3, 2)}, {o: [1, 2] for o in range(1, 7)}, 2)
    rep = solve_approx(inst, "AP2")
    assert rep.proven_optimal
    assert rep.best_objective == 3 * (5 + 3)
    assert rep.nodes_explored <= 1


def test_two_disjoint_patterns():
    inst = make_instance((5, 3), {1: (1, 1), 2: (2, 1)}, {1: [1], 2: [1], 3: [2], 4: [2]}, 2)
    rep = solve_approx(inst, "AP1")
    assert rep.proven_optimal and rep.best_objective == 2 == rep.bound
    assert solve_approx(inst, "AP2").best_objective == 8


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from(["AP1", "AP2"]), st.integers(1, 3),
       st.sampled_from(["cheapest", "largest"]))
def test_solver_matches_count_enumeration(seed, weighting, n_batches, branching):
    inst = few_pattern_instance(seed, n_batches)
    pats = extract_patterns(inst)
    assert len(pats) <= 6
    rep = solve_approx(inst, weighting, BnbConfig(time_limit_seconds=60, branching=branching))
    expected = surrogate_min(pats, aisle_weights(inst, weighting), n_batches, inst.capacity)
    assert rep.proven_optimal
    assert rep.best_objective == expected
    assert surrogate_value(inst, rep.best_partition, weighting) == expected


def completion_min(search, done, seq):
    """Cheapest completion of a partial DFS state, by brute force over counts."""
    n_t = len(search.patterns)
    sizes = [p.size for p in search.patterns]
    best = None
    for x in count_assignments(sizes, search.n_batches, search.capacity):
        ok = all(x[t][j] == sum(1 for u in done[j] if u == t)
                 for j in range(len(done)) for t in range(n_t))
        ok = ok and all(x[t][len(done)] >= seq.count(t) for t in range(n_t))
        if not ok:
            continue
        cost = 0
        for j in range(search.n_batches):
            mask = 0
            for t in range(n_t):
                if x[t][j]:
                    mask |= search.masks[t]
            cost += search.weight(mask)
        best = cost if best is None else min(best, cost)
    return best


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.sampled_from(["AP1", "AP2"]))
def test_bound_admissible_at_random_nodes(seed, weighting):
    inst = few_pattern_instance(seed, 3)
    pats = extract_patterns(inst)
    search = _PatternSearch(pats, aisle_weights(inst, weighting), inst.capacity,
                            inst.n_batches, BnbConfig())
    rng = np.random.default_rng(seed)
    pool = [t for t, p in enumerate(search.patterns) for _ in range(p.size)]
    rng.shuffle(pool)
    depth = int(rng.integers(0, len(pool)))
    placed = pool[:depth]
    done = [placed[k:k + inst.capacity] for k in range(0, depth - depth % inst.capacity, inst.capacity)]
    seq = placed[len(done) * inst.capacity:]
    rem = [0] * len(search.patterns)
    for t in pool[depth:]:
        rem[t] += 1
    cost_done = 0
    for b in done:
        m = 0
        for t in b:
            m |= search.masks[t]
        cost_done += search.weight(m)
    cur = 0
    for t in seq:
        cur |= search.masks[t]
    lb = search.lower_bound(rem, cur, inst.capacity - len(seq), cost_done)
    assert lb <= completion_min(search, done, seq)


def test_report_invariants_under_node_limit():
    inst = random_tiny_instance(9, n_orders=30, capacity=5, n_aisles=8, n_items=40, max_len=9)
    rep = solve_approx(inst, "AP2", BnbConfig(node_limit=50, heuristic_iterations=5))
    rep.best_partition.validate(inst)
    assert rep.best_objective >= rep.bound
    if rep.proven_optimal:
        assert rep.best_objective == rep.bound
    values = [v for _, v in rep.history]
    assert values == sorted(values, reverse=True)
    assert values[-1] == rep.best_objective
    again = solve_approx(inst, "AP2", BnbConfig(node_limit=50, heuristic_iterations=5))
    assert again.best_partition == rep.best_partition and again.nodes_explored == rep.nodes_explored


def test_report_text_roundtrip():
    rep = SolveReport(12.0, None, True, 7, 0.5, 12.0)
    kv = SolveReport.parse(rep.to_text())
    assert kv["best_objective"] == "12.0" and kv["proven_optimal"] == "True"
    assert kv["bound_kind"] == "combinatorial"


def test_config_validation():
    with pytest.raises(ValueError):
        BnbConfig(time_limit_seconds=0)
    with pytest.raises(ValueError):
        BnbConfig(node_limit=-1)
    with pytest.raises(ValueError):
        BnbConfig(branching="random")


def test_non_strict_rejected():
    inst = make_instance((3,), {1: (1, 1)}, {1: [1], 2: [1], 3: [1]}, 2, strict=False)
    with pytest.raises(ValidationError):
        solve_approx(inst)


def test_partition_counts():
    assert count_partitions(4, 2) == 3
    assert count_partitions(6, 2) == 15
    assert len(list(iter_partitions([1, 2, 3, 4], 2))) == 3
    assert len(list(iter_partitions(range(1, 7), 2))) == 15
    assert len(list(iter_partitions(range(1, 10), 3))) == count_partitions(9, 3) == 280


def test_enumerate_counts_and_cap(tiny):
    rep = enumerate_exact(tiny, "return")
    assert rep.nodes_explored == 3 and rep.proven_optimal
    six = random_tiny_instance(1, n_orders=6, capacity=2)
    assert enumerate_exact(six, "sshape").nodes_explored == 15
    with pytest.raises(ValueError, match="15"):
        enumerate_exact(six, "sshape", cap=10)


@settings(max_examples=20)
@given(st.integers(0, 10**6), st.sampled_from(["return", "sshape"]))
def test_enumeration_beats_heuristics(seed, strategy):
    inst = random_tiny_instance(seed, n_orders=6, capacity=2)
    rep = enumerate_exact(inst, strategy)
    assert rep.best_objective == pytest.approx(float(brute_min(inst, strategy)), abs=1e-9)
    for name, h in HEURISTICS.items():
        kw = {"time_budget": 0.0} if name == "ils" else {}
        part = h(inst, strategy, **kw)
        assert objective(inst, part, strategy).combined >= rep.best_objective - 1e-9


@given(st.integers(0, 10**6))
def test_decode_roundtrip(seed):
    inst = random_tiny_instance(seed, n_orders=6, capacity=3)
    pats = extract_patterns(inst)
    from batchopt.core import random_partition
    part = random_partition(inst, seed)
    x = pattern_counts(inst, part)
    decoded = decode_pattern_solution(x, pats, inst.capacity)
    assert pattern_counts(inst, decoded) == x
    for w in ("AP1", "AP2"):
        assert surrogate_value(inst, decoded, w) == surrogate_value(inst, part, w)


def test_decode_single_pattern_is_chunking():
    inst = make_instance((4,), {1: (1, 1)}, {o: [1] for o in range(1, 7)}, 2)
    pats = extract_patterns(inst)
    x = {(1, 1): 2, (1, 2): 2, (1, 3): 2}
    assert decode_pattern_solution(x, pats, 2) == chunk_partition(range(1, 7), 2)


def test_decode_mismatch():
    inst = make_instance((4,), {1: (1, 1)}, {o: [1] for o in range(1, 5)}, 2)
    pats = extract_patterns(inst)
    with pytest.raises(ValueError):
        decode_pattern_solution({(1, 1): 3, (1, 2): 2}, pats, 2)
    with pytest.raises(ValueError):
        decode_pattern_solution({(1, 1): 3, (1, 2): 1}, pats, 2)


def test_ir_brute_force_small_model():
    ir = ModelIR("m", [Variable("x", "integer", 0, 4), Variable("y", "binary"),
                       Variable("s", "continuous", 0, 10)],
                 [Constraint("c1", {"x": 1, "y": 1}, ">=", 3),
                  Constraint("c2", {"s": 1, "x": -1}, ">=", 0.5)],
                 {"x": 3, "y": 2, "s": 1})
    value, point = ir_brute_force(ir, {})
    # x=2,y=1 costs 8+2.5; x=3,y=0 costs 9+3.5
    assert value == pytest.approx(10.5)
    assert point["x"] == 2 and point["y"] == 1
    assert ir_brute_force(ir, {"x": 0}) == (float("inf"), None)
