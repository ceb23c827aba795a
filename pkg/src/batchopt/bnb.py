"""Exact search: branch-and-bound for the pattern model, exhaustive
partition enumeration, and a brute-force minimiser over small ModelIRs.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from math import factorial
from typing import Iterator, Mapping, Sequence

import numpy as np

from .core import Instance, Partition, Pattern, ValidationError, extract_patterns
from .evaluation import CostModel
from .milp import ModelIR, aisle_weights


@dataclass(frozen=True)
class BnbConfig:
    time_limit_seconds: float = 100.0
    node_limit: int | None = None
    branching: str = "cheapest"
    seed: int | None = None
    heuristic_iterations: int = 1000
    heuristic_share: float = 0.5

    def __post_init__(self):
        if self.time_limit_seconds is not None and self.time_limit_seconds <= 0:
            raise ValueError("time limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node limit must be positive")
        if self.heuristic_iterations < 0 or not 0 <= self.heuristic_share <= 1:
            raise ValueError("heuristic_iterations >= 0 and heuristic_share in [0, 1]")
        if self.branching not in ("cheapest", "largest"):
            raise ValueError("branching must be 'cheapest' or 'largest'")


@dataclass
class SolveReport:
    best_objective: float
    best_partition: Partition | None
    proven_optimal: bool
    nodes_explored: int
    elapsed_seconds: float
    bound: float
    bound_kind: str = "combinatorial"
    history: list[tuple[int, float]] = field(default_factory=list)

    def to_text(self) -> str:
        keys = ("best_objective", "bound", "bound_kind", "proven_optimal",
                "nodes_explored", "elapsed_seconds")
        return "".join(f"{k}={getattr(self, k)}\n" for k in keys)

    @staticmethod
    def parse(text: str) -> dict[str, str]:
        return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


# -- pattern model branch-and-bound --------------------------------------

class _PatternSearch:
    """DFS that fills batches one order at a time.

    Each batch is built as a non-decreasing sequence of pattern indices and
    consecutive batches are kept in lexicographically non-decreasing order,
    which removes label and within-batch permutation symmetry.
    """

    def __init__(self, patterns: Sequence[Pattern], weights: Sequence[int], capacity: int,
                 n_batches: int, config: BnbConfig):
        bit_weight = {}
        ranked = []
        for p in patterns:
            mask = 0
            for b in p.aisle_set:
                mask |= 1 << b
                bit_weight[b] = weights[b]
            ranked.append((p, mask))
        self._bit_weight = bit_weight
        self._wcache: dict[int, int] = {}
        if config.branching == "largest":
            key = lambda pm: (-pm[0].size, pm[0].pattern_id)
        else:
            key = lambda pm: (-self.weight(pm[1]), -pm[0].size, pm[0].pattern_id)
        ranked.sort(key=key)
        self.patterns = [p for p, _ in ranked]
        self.masks = [m for _, m in ranked]
        self.capacity = capacity
        self.n_batches = n_batches
        self.config = config
        self.tiebreak = None
        if config.seed is not None:
            self.tiebreak = np.random.default_rng(config.seed).permutation(len(ranked)).tolist()

    def weight(self, mask: int) -> int:
        w = self._wcache.get(mask)
        if w is None:
            w = 0
            m = mask
            while m:
                low = m & -m
                w += self._bit_weight[low.bit_length() - 1]
                m ^= low
            self._wcache[mask] = w
        return w

    # bound ------------------------------------------------------------
    def lower_bound(self, rem: Sequence[int], cur_mask: int, room: int, cost_done: int) -> int:
        """Admissible bound on the final cost of any completion of this node."""
        total = sum(rem)
        base = cost_done + self.weight(cur_mask)
        if total == 0:
            return base
        n_empty = (total - room) // self.capacity
        union = 0
        must_leave = 0
        min_w = math.inf
        min_incr = math.inf
        for t, r in enumerate(rem):
            if not r:
                continue
            m = self.masks[t]
            union |= m
            if r > room:
                must_leave |= m
            w = self.weight(m)
            if w < min_w:
                min_w = w
            if room:
                inc = self.weight(m & ~cur_mask)
                if inc < min_incr:
                    min_incr = inc
        need = self.weight(union & ~cur_mask)
        if n_empty == 0:
            return base + need
        empty = max(self.weight(must_leave), n_empty * min_w)
        split = (min_incr if room else 0) + empty
        return base + max(need, split)

    # first-fit-decreasing incumbent ----------------------------------------
    def first_fit(self) -> tuple[int, list[list[int]]]:
        batches: list[list[int]] = [[] for _ in range(self.n_batches)]
        masks = [0] * self.n_batches
        for t, p in enumerate(self.patterns):
            for _ in range(p.size):
                best = None
                for j in range(self.n_batches):
                    if len(batches[j]) >= self.capacity:
                        continue
                    inc = self.weight(self.masks[t] & ~masks[j])
                    if best is None or inc < best[0]:
                        best = (inc, j)
                        if inc == 0:
                            break
                j = best[1]
                batches[j].append(t)
                masks[j] |= self.masks[t]
        return sum(self.weight(m) for m in masks), batches

    # primal heuristic ----------------------------------------------------
    def improve(self, batches: list[list[int]], iterations: int, deadline: float,
                seed: int = 0) -> tuple[int, list[list[int]]]:
        """Iterated swap local search on the surrogate cost.

        Best-improvement swaps between batches until none helps, then
        ceil(C/2) random swaps as a kick; a kicked solution is kept unless
        worse. Runs ``iterations`` kicks or until ``deadline``.
        """
        masks = self.masks
        weight = self.weight
        n_j = len(batches)
        rng = np.random.default_rng(seed)

        def batch_mask(members):
            m = 0
            for t in members:
                m |= masks[t]
            return m

        def without(members):
            # mask of the batch minus position k, for every k
            n = len(members)
            pre = [0] * (n + 1)
            suf = [0] * (n + 1)
            for k in range(n):
                pre[k + 1] = pre[k] | masks[members[k]]
                suf[n - k - 1] = suf[n - k] | masks[members[n - k - 1]]
            return [pre[k] | suf[k + 1] for k in range(n)]

        def descend(bs):
            cost = [weight(batch_mask(b)) for b in bs]
            minus = [without(b) for b in bs]

            def best_pair(x, y):
                best = (0, -1, -1)
                bx, by, mx, my = bs[x], bs[y], minus[x], minus[y]
                base = cost[x] + cost[y]
                for p, a in enumerate(bx):
                    ma = masks[a]
                    for q, b in enumerate(by):
                        if a == b:
                            continue
                        d = weight(mx[p] | masks[b]) + weight(my[q] | ma) - base
                        if d < best[0]:
                            best = (d, p, q)
                return best

            table = {(x, y): best_pair(x, y) for x in range(n_j) for y in range(x + 1, n_j)}
            while table:
                key = min(table, key=lambda k: table[k])
                d, p, q = table[key]
                if d >= 0 or time.perf_counter() > deadline:
                    break
                x, y = key
                bs[x][p], bs[y][q] = bs[y][q], bs[x][p]
                for j in (x, y):
                    cost[j] = weight(batch_mask(bs[j]))
                    minus[j] = without(bs[j])
                for z in range(n_j):
                    for j in (x, y):
                        if z != j:
                            k = (min(z, j), max(z, j))
                            table[k] = best_pair(*k)
            return sum(cost)

        cur = [list(b) for b in batches]
        cur_cost = descend(cur)
        best, best_cost = [list(b) for b in cur], cur_cost
        if n_j < 2:
            return best_cost, best
        for _ in range(iterations):
            if time.perf_counter() > deadline:
                break
            trial = [list(b) for b in cur]
            for _ in range(math.ceil(self.capacity / 2)):
                x, y = rng.choice(n_j, size=2, replace=False)
                p, q = rng.integers(len(trial[x])), rng.integers(len(trial[y]))
                trial[x][p], trial[y][q] = trial[y][q], trial[x][p]
            c = descend(trial)
            if c <= cur_cost:
                cur, cur_cost = trial, c
                if c < best_cost:
                    best, best_cost = [list(b) for b in trial], c
        return best_cost, best

    def children(self, rem, seq, prev_seq, tight, cur_mask):
        lo = seq[-1] if seq else 0
        if tight and prev_seq is not None:
            lo = max(lo, prev_seq[len(seq)])
        if not seq:
            # later batches sort after this one, so the smallest remaining
            # pattern index has to open it
            first = next(t for t, r in enumerate(rem) if r)
            return [first] if first >= lo else []
        cand = [t for t in range(lo, len(rem)) if rem[t]]
        if seq:
            if self.tiebreak is None:
                cand.sort(key=lambda t: (self.weight(self.masks[t] & ~cur_mask), t))
            else:
                tb = self.tiebreak
                cand.sort(key=lambda t: (self.weight(self.masks[t] & ~cur_mask), tb[t]))
        return cand

    def run(self, rem0: Sequence[int]):
        cfg = self.config
        start = time.perf_counter()
        deadline = start + cfg.time_limit_seconds if cfg.time_limit_seconds else math.inf

        best, best_batches = self.first_fit()
        history = [(0, best)]
        if cfg.heuristic_iterations:
            h_deadline = (math.inf if deadline == math.inf
                          else start + cfg.heuristic_share * (deadline - start))
            h_cost, h_batches = self.improve(best_batches, cfg.heuristic_iterations,
                                             h_deadline, cfg.seed or 0)
            if h_cost < best:
                best, best_batches = h_cost, h_batches
                history.append((0, best))
        rem = list(rem0)
        root_lb = self.lower_bound(rem, 0, self.capacity, 0)

        # mutable search state
        seq: list[int] = []
        done: list[list[int]] = []
        state = {"mask": 0, "cost": 0, "tight": True}
        nodes = 0
        complete = True

        def prev():
            return done[-1] if done else None

        def apply(t):
            saved = (state["mask"], state["cost"], state["tight"])
            rem[t] -= 1
            p = prev()
            if state["tight"] and p is not None and t > p[len(seq)]:
                state["tight"] = False
            seq.append(t)
            state["mask"] |= self.masks[t]
            if len(seq) == self.capacity:
                state["cost"] += self.weight(state["mask"])
                done.append(list(seq))
                seq.clear()
                state["mask"] = 0
                state["tight"] = True
                return saved, True
            return saved, False

        def undo(t, saved, closed):
            if closed:
                seq[:] = done.pop()
            seq.pop()
            rem[t] += 1
            state["mask"], state["cost"], state["tight"] = saved

        # stack entries: (candidate list, position, applied token)
        stack: list[list] = []
        entering = True
        while True:
            if entering:
                nodes += 1
                room = self.capacity - len(seq)
                if sum(rem) == 0:
                    if state["cost"] < best:
                        best = state["cost"]
                        best_batches = [list(b) for b in done]
                        history.append((nodes, best))
                    cand = []
                else:
                    lb = self.lower_bound(rem, state["mask"], room, state["cost"])
                    cand = [] if lb >= best else self.children(
                        rem, seq, prev(), state["tight"], state["mask"])
                stack.append([cand, 0, None])
                entering = False
                if best == root_lb:
                    # incumbent meets the root bound: optimal
                    break
                if (cfg.node_limit and nodes >= cfg.node_limit) or \
                        (nodes & 255 == 0 and time.perf_counter() > deadline):
                    complete = False
                    break
            frame = stack[-1]
            if frame[2] is not None:
                t_prev, saved, closed = frame[2]
                undo(t_prev, saved, closed)
                frame[2] = None
            if frame[1] < len(frame[0]):
                t = frame[0][frame[1]]
                frame[1] += 1
                saved, closed = apply(t)
                frame[2] = (t, saved, closed)
                entering = True
                continue
            stack.pop()
            if not stack:
                break
        proven = complete or best == root_lb
        elapsed = time.perf_counter() - start
        return best, best_batches, proven, nodes, elapsed, (best if proven else root_lb), history


def _counts_from_batches(search: _PatternSearch, batches: list[list[int]]) -> dict[tuple[int, int], int]:
    x: dict[tuple[int, int], int] = {}
    for j, members in enumerate(batches, start=1):
        for t in members:
            key = (search.patterns[t].pattern_id, j)
            x[key] = x.get(key, 0) + 1
    return x


def solve_approx(instance: Instance, weighting: str = "AP2",
                 config: BnbConfig = BnbConfig()) -> SolveReport:
    """Minimise the (weighted) number of aisle visits over pattern counts."""
    if not instance.strict:
        raise ValidationError("pattern solver needs a strict instance (|I| divisible by C)")
    patterns = extract_patterns(instance)
    search = _PatternSearch(patterns, aisle_weights(instance, weighting),
                            instance.capacity, instance.n_batches, config)
    best, batches, proven, nodes, elapsed, bound, history = search.run(
        [p.size for p in search.patterns])
    x = _counts_from_batches(search, batches)
    partition = decode_pattern_solution(x, patterns, instance.capacity)
    return SolveReport(float(best), partition, proven, nodes, elapsed, float(bound),
                       history=[(n, float(v)) for n, v in history])


def surrogate_value(instance: Instance, partition: Partition, weighting: str = "AP2") -> int:
    """Pattern-model objective of a partition: weighted count of aisle visits."""
    w = aisle_weights(instance, weighting)
    idx = instance.order_index
    total = 0
    for members in partition.batches():
        aisles = set()
        for oid in members:
            aisles |= instance.profiles[idx[oid]].visited_aisles
        total += sum(w[b] for b in aisles)
    return total


def decode_pattern_solution(x: Mapping[tuple[int, int], int], patterns: Sequence[Pattern],
                            capacity: int | None = None) -> Partition:
    """Turn pattern counts x[(pattern_id, batch)] into a concrete partition.

    Members of each pattern are handed out in ascending order id, batch by
    batch.
    """
    n_j = max((j for (_, j), v in x.items() if v), default=0)
    sizes = [0] * n_j
    batch_of = {}
    for p in patterns:
        members = sorted(p.member_orders)
        counts = [x.get((p.pattern_id, j), 0) for j in range(1, n_j + 1)]
        if any(c < 0 for c in counts) or sum(counts) != p.size:
            raise ValueError(
                f"pattern {p.pattern_id}: counts sum to {sum(counts)}, expected {p.size}"
            )
        pos = 0
        for j, c in enumerate(counts, start=1):
            for oid in members[pos:pos + c]:
                batch_of[oid] = j
            pos += c
            sizes[j - 1] += c
    known = {p.pattern_id for p in patterns}
    stray = [k for k, v in x.items() if v and k[0] not in known]
    if stray:
        raise ValueError(f"counts given for unknown pattern {stray[0][0]}")
    if capacity is not None and any(s != capacity for s in sizes):
        bad = next(j for j, s in enumerate(sizes, start=1) if s != capacity)
        raise ValueError(f"batch {bad} holds {sizes[bad - 1]} orders, expected {capacity}")
    return Partition(batch_of)


# -- exhaustive partition enumeration ------------------------------------

def count_partitions(n: int, capacity: int) -> int:
    """Number of unordered partitions of n items into blocks of ``capacity``."""
    k = n // capacity
    return factorial(n) // (factorial(capacity) ** k * factorial(k))


def iter_partitions(order_ids: Sequence[int], capacity: int) -> Iterator[list[tuple[int, ...]]]:
    """Each unordered partition once: every block starts with the smallest
    order not yet placed."""
    ids = sorted(order_ids)
    if not ids:
        yield []
        return
    head, rest = ids[0], ids[1:]
    for others in itertools.combinations(rest, capacity - 1):
        block = (head, *others)
        left = [o for o in rest if o not in others]
        for tail in iter_partitions(left, capacity):
            yield [block, *tail]


def enumerate_exact(instance: Instance, strategy: str, sshape_variant: str = "parity",
                    cap: int = 10**6) -> SolveReport:
    if not instance.strict:
        raise ValidationError("enumeration needs a strict instance")
    total = count_partitions(instance.n_orders, instance.capacity)
    if total > cap:
        raise ValueError(f"{total} partitions exceed the enumeration cap {cap}")
    start = time.perf_counter()
    model = CostModel(instance, strategy, sshape_variant)
    best, best_blocks, nodes = None, None, 0
    for blocks in iter_partitions([o.order_id for o in instance.orders], instance.capacity):
        nodes += 1
        v = model.total_scaled(blocks)
        if best is None or v < best:
            best, best_blocks = v, blocks
    value = model.to_combined(best)
    return SolveReport(value, Partition.from_batches(best_blocks), True, nodes,
                       time.perf_counter() - start, value, bound_kind="exact")


# -- brute force over model points ---------------------------------------

def _components(ir: ModelIR, free: set[str]):
    parent = {v: v for v in free}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for c in ir.constraints:
        vs = [v for v in c.coeffs if v in free]
        for a, b in zip(vs, vs[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups: dict[str, list[str]] = {}
    order = [v.name for v in ir.variables if v.name in free]
    for v in order:
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def ir_brute_force(ir: ModelIR, fixed: Mapping[str, float], tol: float = 1e-9):
    """Minimum of the model's objective with ``fixed`` variables pinned.

    All remaining integer and binary variables are enumerated exhaustively
    (partial assignments are cut only once some constraint can no longer be
    met). Continuous variables are optimised by an LP at each leaf. Free
    variables split into independent blocks that are minimised separately.
    Returns ``(value, assignment)`` or ``(inf, None)`` when infeasible.
    """
    from scipy.optimize import linprog

    by_name = ir._by_name
    values = {k: float(v) for k, v in fixed.items()}
    free = {v.name for v in ir.variables if v.name not in values}
    rows_of: dict[str, list] = {v: [] for v in free}
    active = []
    for c in ir.constraints:
        vs = [v for v in c.coeffs if v in free]
        if not vs:
            if not c.satisfied(values, tol):
                return math.inf, None
            continue
        active.append(c)
        for v in vs:
            rows_of[v].append(c)

    total = sum(a * values[v] for v, a in ir.objective.items() if v in values)
    for comp in _components(ir, free):
        ints = [v for v in comp if by_name[v].kind != "continuous"]
        conts = [v for v in comp if by_name[v].kind == "continuous"]
        comp_rows = {id(c): c for v in comp for c in rows_of[v]}.values()
        for v in ints:
            if not math.isfinite(by_name[v].lb) or not math.isfinite(by_name[v].ub):
                raise ValueError(f"integer variable {v} needs finite bounds")
        best = [math.inf, None]
        assigned = dict(values)

        def possible(c) -> bool:
            lo = hi = 0.0
            for v, a in c.coeffs.items():
                if v in assigned:
                    lo += a * assigned[v]
                    hi += a * assigned[v]
                else:
                    var = by_name[v]
                    lo += min(a * var.lb, a * var.ub)
                    hi += max(a * var.lb, a * var.ub)
            if c.sense == "<=":
                return lo <= c.rhs + tol
            if c.sense == ">=":
                return hi >= c.rhs - tol
            return lo <= c.rhs + tol and hi >= c.rhs - tol

        def leaf():
            obj = sum(ir.objective.get(v, 0.0) * assigned[v] for v in ints)
            sol = {v: assigned[v] for v in ints}
            if conts:
                col = {v: k for k, v in enumerate(conts)}
                a_ub, b_ub, a_eq, b_eq = [], [], [], []
                for c in comp_rows:
                    row = [0.0] * len(conts)
                    rhs = c.rhs
                    for v, a in c.coeffs.items():
                        if v in col:
                            row[col[v]] += a
                        else:
                            rhs -= a * assigned[v]
                    if c.sense == "=":
                        a_eq.append(row)
                        b_eq.append(rhs)
                    elif c.sense == "<=":
                        a_ub.append(row)
                        b_ub.append(rhs)
                    else:
                        a_ub.append([-x for x in row])
                        b_ub.append(-rhs)
                res = linprog([ir.objective.get(v, 0.0) for v in conts],
                              A_ub=a_ub or None, b_ub=b_ub or None,
                              A_eq=a_eq or None, b_eq=b_eq or None,
                              bounds=[(by_name[v].lb, None if by_name[v].ub == math.inf
                                       else by_name[v].ub) for v in conts],
                              method="highs")
                if res.status != 0:
                    return
                obj += res.fun
                sol.update(zip(conts, (float(x) for x in res.x)))
            elif not all(c.satisfied(assigned, tol) for c in comp_rows):
                return
            if obj < best[0] - tol:
                best[0], best[1] = obj, sol

        def dfs(k: int):
            if k == len(ints):
                leaf()
                return
            v = ints[k]
            var = by_name[v]
            for val in range(int(round(var.lb)), int(round(var.ub)) + 1):
                assigned[v] = float(val)
                if all(possible(c) for c in rows_of[v]):
                    dfs(k + 1)
            del assigned[v]

        dfs(0)
        if best[1] is None:
            return math.inf, None
        total += best[0]
        values.update(best[1])
    return total, values
