"""Batching heuristics: FCFS, seed, Clarke & Wright (I and II), iterated
local search, and pair-swap improvement over k-different order pairs.

All of them score batches with :class:`evaluation.CostModel`, i.e. on the
full weighted objective, and compare costs as exact integers.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Instance, Partition, ValidationError, chunk_partition
from .evaluation import CostModel

PairList = list[tuple[int, int]]


def _require_strict(instance: Instance) -> None:
    if not instance.strict:
        raise ValidationError("heuristics need a strict instance (|I| divisible by C)")


# -- incremental batch bookkeeping ---------------------------------------

class BatchTable:
    """Batches of a partition plus what each batch looks like without each
    member, so a swap is priced from two cheap set updates."""

    def __init__(self, model: CostModel, batches: Sequence[Sequence[int]]):
        self.model = model
        self.members = [list(b) for b in batches]
        self.batch_of = {o: j for j, b in enumerate(self.members) for o in b}
        self.cost = [0] * len(self.members)
        self._minus: dict[int, tuple[set, dict]] = {}
        for j in range(len(self.members)):
            self._refresh(j)

    def _state(self, members):
        m = self.model
        items: set = set()
        depths: dict[int, int] = {}
        for o in members:
            items.update(m.items[o])
            for b, t in m.depths[o].items():
                if t > depths.get(b, 0):
                    depths[b] = t
        return items, depths

    def _refresh(self, j: int) -> None:
        mem = self.members[j]
        self.cost[j] = self.model.scaled(mem)
        for o in mem:
            self._minus[o] = self._state([x for x in mem if x != o])

    def cost_replacing(self, out: int, into: int) -> int:
        """Scaled cost of out's batch with ``out`` replaced by ``into``."""
        m = self.model
        items, depths = self._minus[out]
        new_items = len(items) + len(m.items[into] - items)
        nd = dict(depths)
        for b, t in m.depths[into].items():
            if t > nd.get(b, 0):
                nd[b] = t
        return m.p * new_items + (m.q - m.p) * m._travel(nd)

    def swap_delta(self, a: int, b: int) -> int:
        ja, jb = self.batch_of[a], self.batch_of[b]
        if ja == jb:
            raise ValueError(f"orders {a} and {b} share batch {ja + 1}")
        return (self.cost_replacing(a, b) + self.cost_replacing(b, a)
                - self.cost[ja] - self.cost[jb])

    def apply_swap(self, a: int, b: int) -> None:
        ja, jb = self.batch_of[a], self.batch_of[b]
        self.members[ja][self.members[ja].index(a)] = b
        self.members[jb][self.members[jb].index(b)] = a
        self.batch_of[a], self.batch_of[b] = jb, ja
        self._refresh(ja)
        self._refresh(jb)

    def total(self) -> int:
        return sum(self.cost)

    def partition(self) -> Partition:
        return Partition.from_batches(self.members)


def _batches(partition: Partition) -> list[list[int]]:
    return partition.batches()


# -- valuable pairs ------------------------------------------------------

@dataclass(frozen=True)
class VpgConfig:
    k: int = 2
    m: int = 1
    strategy: str = "sshape"
    sshape_variant: str = "parity"

    def __post_init__(self):
        if self.k < 0 or self.m < 0:
            raise ValueError("k and m must be non-negative")


def generate_valuable_pairs(instance: Instance, config: VpgConfig = VpgConfig()) -> PairList:
    """All order pairs whose aisle sets differ by at most k aisles each way
    and which both hold more than m items."""
    idx = instance.order_index
    ids = sorted(o.order_id for o in instance.orders)
    big = [o for o in ids if len(instance.orders[idx[o]].items) > config.m]
    aisles = {o: instance.profiles[idx[o]].visited_aisles for o in big}
    pairs = []
    for n, p in enumerate(big):
        ap = aisles[p]
        for q in big[n + 1:]:
            aq = aisles[q]
            if len(ap - aq) <= config.k and len(aq - ap) <= config.k:
                pairs.append((p, q))
    return pairs


def vpg_improve(instance: Instance, partition: Partition, pair_list: PairList,
                config: VpgConfig = VpgConfig(), log: list | None = None,
                until_fixed_point: bool = False) -> tuple[Partition, int]:
    """Scan ``pair_list`` once and apply every swap that strictly lowers the cost.

    Swaps take effect immediately, so later pairs see the updated batches.
    ``log`` (if given) receives ``(a, b, delta)`` per applied swap, delta in
    objective units. With ``until_fixed_point`` passes repeat until one
    applies nothing.
    """
    partition.validate(instance)
    model = CostModel(instance, config.strategy, config.sshape_variant)
    table = BatchTable(model, _batches(partition))
    applied = 0
    while True:
        this_pass = 0
        for a, b in pair_list:
            if table.batch_of[a] == table.batch_of[b]:
                continue
            d = table.swap_delta(a, b)
            if d < 0:
                table.apply_swap(a, b)
                this_pass += 1
                if log is not None:
                    log.append((a, b, model.to_combined(d)))
        applied += this_pass
        if not until_fixed_point or this_pass == 0:
            break
    return table.partition(), applied


# -- constructive heuristics ---------------------------------------------

def fcfs(instance: Instance) -> Partition:
    _require_strict(instance)
    return chunk_partition([o.order_id for o in instance.orders], instance.capacity)


def seed_heuristic(instance: Instance, strategy: str = "sshape") -> Partition:
    """Seed: open each batch with the unassigned order visiting most aisles,
    then add the order whose newly visited aisles add least length."""
    _require_strict(instance)
    idx = instance.order_index
    length = instance.layout.length
    aisles = {o.order_id: instance.profiles[idx[o.order_id]].visited_aisles
              for o in instance.orders}
    left = sorted(aisles)
    batches = []
    while left:
        seed = min(left, key=lambda o: (-len(aisles[o]), o))
        left.remove(seed)
        batch, covered = [seed], set(aisles[seed])
        while len(batch) < instance.capacity:
            pick = min(left, key=lambda o: (sum(length(b) for b in aisles[o] - covered), o))
            left.remove(pick)
            batch.append(pick)
            covered |= aisles[pick]
        batches.append(batch)
    return Partition.from_batches(batches)


def _pad(instance: Instance, clusters: list[list[int]]) -> Partition:
    """Complete clusters to exactly C orders.

    Full clusters stay as they are; the rest are placed first-fit
    decreasing, and whatever does not fit fills the gaps in FCFS order.
    """
    cap = instance.capacity
    full = [c for c in clusters if len(c) == cap]
    rest = sorted((c for c in clusters if len(c) < cap), key=lambda c: (-len(c), min(c)))
    n_open = instance.n_batches - len(full)
    open_batches: list[list[int]] = [[] for _ in range(n_open)]
    spill: list[int] = []
    for c in rest:
        for b in open_batches:
            if len(b) + len(c) <= cap:
                b.extend(c)
                break
        else:
            spill.extend(c)
    spill.sort(key=lambda o: instance.order_index[o])
    for b in open_batches:
        while len(b) < cap:
            b.append(spill.pop(0))
    return Partition.from_batches(full + open_batches)


def _pair_savings(model: CostModel) -> dict[tuple[int, int], int]:
    ids = sorted(model.items)
    single = {o: model.scaled([o]) for o in ids}
    return {(i, j): single[i] + single[j] - model.scaled([i, j])
            for n, i in enumerate(ids) for j in ids[n + 1:]}


def pair_savings(instance: Instance, strategy: str = "sshape",
                 sshape_variant: str = "parity") -> dict[tuple[int, int], float]:
    """s(i, j) = cost({i}) + cost({j}) - cost({i, j}) in objective units."""
    model = CostModel(instance, strategy, sshape_variant)
    return {k: model.to_combined(v) for k, v in _pair_savings(model).items()}


def cw1(instance: Instance, strategy: str = "sshape", sshape_variant: str = "parity") -> Partition:
    """Clarke & Wright (i): savings computed once on single orders."""
    _require_strict(instance)
    model = CostModel(instance, strategy, sshape_variant)
    ids = sorted(o.order_id for o in instance.orders)
    savings = [(s, i, j) for (i, j), s in _pair_savings(model).items()]
    savings.sort(key=lambda s: (-s[0], s[1], s[2]))
    cluster = {o: [o] for o in ids}
    for _, i, j in savings:
        ci, cj = cluster[i], cluster[j]
        if ci is cj or len(ci) + len(cj) > instance.capacity:
            continue
        ci.extend(cj)
        for o in cj:
            cluster[o] = ci
    uniq = {id(c): c for c in cluster.values()}
    return _pad(instance, sorted(uniq.values(), key=min))


def cw2(instance: Instance, strategy: str = "sshape", sshape_variant: str = "parity") -> Partition:
    """Clarke & Wright (ii): savings between clusters recomputed after every merge."""
    _require_strict(instance)
    model = CostModel(instance, strategy, sshape_variant)
    cap = instance.capacity
    clusters = {o.order_id: [o.order_id] for o in instance.orders}
    cost = {c: model.scaled(m) for c, m in clusters.items()}
    heap = []

    def push(a, b):
        a, b = min(a, b), max(a, b)
        if len(clusters[a]) + len(clusters[b]) <= cap:
            s = cost[a] + cost[b] - model.scaled(clusters[a] + clusters[b])
            heapq.heappush(heap, (-s, a, b, len(clusters[a]), len(clusters[b])))

    ids = sorted(clusters)
    for n, a in enumerate(ids):
        for b in ids[n + 1:]:
            push(a, b)
    while heap:
        _, a, b, la, lb = heapq.heappop(heap)
        if a not in clusters or b not in clusters or \
                len(clusters[a]) != la or len(clusters[b]) != lb:
            continue  # stale entry
        clusters[a].extend(clusters.pop(b))
        cost.pop(b)
        cost[a] = model.scaled(clusters[a])
        for c in list(clusters):
            if c != a:
                push(a, c)
    return _pad(instance, [clusters[c] for c in sorted(clusters)])


# -- iterated local search -----------------------------------------------

def _best_in_pair(table: BatchTable, ja: int, jb: int):
    best = None
    for a in table.members[ja]:
        for b in table.members[jb]:
            d = table.swap_delta(a, b)
            key = (d, min(a, b), max(a, b))
            if best is None or key < best:
                best = key + (a, b)
    return best


def local_search(table: BatchTable, deadline: float = math.inf) -> int:
    """Best-improvement swaps until none improves; returns swaps applied."""
    n_j = len(table.members)
    best = {(x, y): _best_in_pair(table, x, y) for x in range(n_j) for y in range(x + 1, n_j)}
    moves = 0
    while best:
        key = min(best, key=lambda k: best[k][:3])
        d, _, _, a, b = best[key]
        if d >= 0 or time.perf_counter() > deadline:
            break
        ja, jb = table.batch_of[a], table.batch_of[b]
        table.apply_swap(a, b)
        moves += 1
        for x in range(n_j):
            for j in (ja, jb):
                if x != j:
                    k = (min(x, j), max(x, j))
                    best[k] = _best_in_pair(table, *k)
    return moves


def ils(instance: Instance, strategy: str = "sshape", time_budget: float = 10.0,
        seed: int = 0, max_iterations: int | None = None,
        sshape_variant: str = "parity") -> Partition:
    """Iterated local search from FCFS.

    Each iteration perturbs the current solution with ceil(C/2) random
    cross-batch swaps of distinct orders, re-runs local search and keeps the
    result unless it is worse. Stops at ``time_budget`` seconds or after
    ``max_iterations`` iterations (the latter gives reproducible runs).
    The first local search always completes.
    """
    _require_strict(instance)
    model = CostModel(instance, strategy, sshape_variant)
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    table = BatchTable(model, _batches(fcfs(instance)))
    local_search(table)
    current = [list(b) for b in table.members]
    cur_cost = table.total()
    best, best_cost = current, cur_cost
    n_j = instance.n_batches
    if n_j < 2:
        return Partition.from_batches(best)
    it = 0
    deadline = start + time_budget
    while (max_iterations is None or it < max_iterations) and \
            (max_iterations is not None or time.perf_counter() < deadline):
        it += 1
        trial = BatchTable(model, current)
        used: set[int] = set()
        for _ in range(math.ceil(instance.capacity / 2)):
            ja, jb = rng.choice(n_j, size=2, replace=False)
            pool_a = [o for o in trial.members[ja] if o not in used]
            pool_b = [o for o in trial.members[jb] if o not in used]
            if not pool_a or not pool_b:
                continue
            a = pool_a[rng.integers(len(pool_a))]
            b = pool_b[rng.integers(len(pool_b))]
            trial.apply_swap(a, b)
            used.update((a, b))
        local_search(trial, math.inf if max_iterations is not None else deadline)
        if trial.total() <= cur_cost:
            current, cur_cost = [list(b) for b in trial.members], trial.total()
            if cur_cost < best_cost:
                best, best_cost = current, cur_cost
    return Partition.from_batches(best)


HEURISTICS = {
    "fcfs": lambda inst, strategy, **kw: fcfs(inst),
    "seed": lambda inst, strategy, **kw: seed_heuristic(inst, strategy),
    "cw1": lambda inst, strategy, **kw: cw1(inst, strategy),
    "cw2": lambda inst, strategy, **kw: cw2(inst, strategy),
    "ils": lambda inst, strategy, **kw: ils(inst, strategy, **kw),
}
