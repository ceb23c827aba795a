"""Closed-form objective evaluation for a fixed partition.

With the batch assignment fixed, every auxiliary quantity of the exact
models (unique items, deepest pick per aisle, visit ordinals and their
parity) is determined, so the objective can be read off directly.

Costs are accumulated as integers. The tau blend is applied last; the
``scaled`` integer ``p*packing + (q-p)*travel`` (with tau = p/q) gives
exact comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import Instance, Partition, ValidationError

STRATEGIES = ("return", "sshape")
SSHAPE_VARIANTS = ("parity", "delta_weighted")


def _check_strategy(strategy: str, variant: str = "parity") -> None:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if variant not in SSHAPE_VARIANTS:
        raise ValueError(f"unknown sshape variant {variant!r}")


@dataclass(frozen=True)
class BatchEvaluation:
    batch: int
    unique_items: int
    visited_aisles: tuple[int, ...]
    max_depths: dict[int, int]
    ordinals: dict[int, int]
    odd_flags: dict[int, int]


@dataclass(frozen=True)
class ObjectiveValue:
    packing_component: int
    travel_component: int
    tau: float

    @property
    def exact(self) -> Fraction:
        t = Fraction(repr(self.tau)).limit_denominator(10**9)
        return t * self.packing_component + (1 - t) * self.travel_component

    @property
    def combined(self) -> float:
        # correctly rounded, so 0.4*p + 0.6*t prints as the decimal it is
        return float(self.exact)


def evaluate_batch(instance: Instance, partition: Partition, j: int) -> BatchEvaluation:
    n_j = instance.n_batches
    if not 1 <= j <= n_j:
        raise IndexError(f"batch index {j} out of range 1..{n_j}")
    members = [oid for oid, bj in partition.batch_of.items() if bj == j]
    return _evaluate_members(instance, j, members)


def _evaluate_members(instance: Instance, j: int, members: Iterable[int]) -> BatchEvaluation:
    idx = instance.order_index
    items = set()
    depths: dict[int, int] = {}
    for oid in members:
        items |= instance.orders[idx[oid]].items
        for b, t in instance.profiles[idx[oid]].max_depth_per_aisle.items():
            if t > depths.get(b, 0):
                depths[b] = t
    visited = tuple(sorted(depths))
    ordinals = {b: n for n, b in enumerate(visited, start=1)}
    return BatchEvaluation(
        batch=j,
        unique_items=len(items),
        visited_aisles=visited,
        max_depths={b: depths[b] for b in visited},
        ordinals=ordinals,
        odd_flags={b: n % 2 for b, n in ordinals.items()},
    )


def _all_batches(instance: Instance, partition: Partition) -> list[BatchEvaluation]:
    partition.validate(instance)
    return [
        _evaluate_members(instance, j, members)
        for j, members in enumerate(partition.batches(), start=1)
    ]


def return_cost(instance: Instance, partition: Partition) -> ObjectiveValue:
    evs = _all_batches(instance, partition)
    packing = sum(e.unique_items for e in evs)
    travel = sum(2 * d for e in evs for d in e.max_depths.values())
    return ObjectiveValue(packing, travel, instance.tau)


def sshape_cost(instance: Instance, partition: Partition,
                sshape_variant: str = "parity") -> ObjectiveValue:
    _check_strategy("sshape", sshape_variant)
    evs = _all_batches(instance, partition)
    length = instance.layout.length
    packing = sum(e.unique_items for e in evs)
    if sshape_variant == "parity":
        travel = sum(2 * length(b) * o for e in evs for b, o in e.odd_flags.items())
    else:
        travel = sum(length(b) for e in evs for b in e.visited_aisles)
    return ObjectiveValue(packing, travel, instance.tau)


def objective(instance: Instance, partition: Partition, strategy: str,
              sshape_variant: str = "parity") -> ObjectiveValue:
    _check_strategy(strategy, sshape_variant)
    if strategy == "return":
        return return_cost(instance, partition)
    return sshape_cost(instance, partition, sshape_variant)


class CostModel:
    """Per-batch cost oracle for repeated evaluation inside heuristics.

    Works on order ids and returns integer components; ``scaled`` folds them
    into one integer that orders solutions exactly like the tau blend.
    """

    def __init__(self, instance: Instance, strategy: str, sshape_variant: str = "parity"):
        _check_strategy(strategy, sshape_variant)
        self.instance = instance
        self.strategy = strategy
        self.variant = sshape_variant
        idx = instance.order_index
        self.items = {o.order_id: o.items for o in instance.orders}
        self.depths = {
            o.order_id: instance.profiles[idx[o.order_id]].max_depth_per_aisle
            for o in instance.orders
        }
        self.lengths = (0,) + instance.layout.aisle_lengths
        t = instance.tau_fraction
        self.p, self.q = t.numerator, t.denominator

    def components(self, members: Iterable[int]) -> tuple[int, int]:
        items = set()
        depths: dict[int, int] = {}
        for oid in members:
            items.update(self.items[oid])
            for b, t in self.depths[oid].items():
                if t > depths.get(b, 0):
                    depths[b] = t
        return len(items), self._travel(depths)

    def _travel(self, depths: dict[int, int]) -> int:
        if self.strategy == "return":
            return 2 * sum(depths.values())
        lengths = self.lengths
        if self.variant == "delta_weighted":
            return sum(lengths[b] for b in depths)
        return 2 * sum(lengths[b] for b in sorted(depths)[::2])

    def scaled(self, members: Iterable[int]) -> int:
        pk, tr = self.components(members)
        return self.p * pk + (self.q - self.p) * tr

    def to_combined(self, scaled: int) -> float:
        return scaled / self.q

    def total_scaled(self, batches: Iterable[Sequence[int]]) -> int:
        return sum(self.scaled(b) for b in batches)

    def combined(self, batches: Iterable[Sequence[int]]) -> float:
        return self.total_scaled(batches) / self.q


def delta_objective_swap(instance: Instance, partition: Partition, order_a: int,
                         order_b: int, strategy: str, sshape_variant: str = "parity",
                         model: CostModel | None = None) -> float:
    """Change of the combined objective if ``order_a`` and ``order_b`` trade batches."""
    ja, jb = partition.batch_of[order_a], partition.batch_of[order_b]
    if ja == jb:
        raise ValueError(f"orders {order_a} and {order_b} are both in batch {ja}")
    model = model or CostModel(instance, strategy, sshape_variant)
    batch_a = [o for o, j in partition.batch_of.items() if j == ja]
    batch_b = [o for o, j in partition.batch_of.items() if j == jb]
    return model.to_combined(swap_delta_scaled(model, batch_a, batch_b, order_a, order_b))


def swap_delta_scaled(model: CostModel, batch_a: Sequence[int], batch_b: Sequence[int],
                      order_a: int, order_b: int) -> int:
    before = model.scaled(batch_a) + model.scaled(batch_b)
    new_a = [o for o in batch_a if o != order_a] + [order_b]
    new_b = [o for o in batch_b if o != order_b] + [order_a]
    return model.scaled(new_a) + model.scaled(new_b) - before


@dataclass(frozen=True)
class ManyEvaluation:
    """Objective components for a stack of partitions, one entry per row."""

    packing: np.ndarray
    return_travel: np.ndarray
    sshape_parity_travel: np.ndarray
    sshape_delta_travel: np.ndarray
    aisle_visits: np.ndarray
    weighted_aisle_visits: np.ndarray
    tau: float

    def combined(self, strategy: str, sshape_variant: str = "parity") -> np.ndarray:
        _check_strategy(strategy, sshape_variant)
        if strategy == "return":
            travel = self.return_travel
        elif sshape_variant == "parity":
            travel = self.sshape_parity_travel
        else:
            travel = self.sshape_delta_travel
        return self.tau * self.packing + (1.0 - self.tau) * travel


def evaluate_many(instance: Instance, perms: np.ndarray) -> ManyEvaluation:
    """Vectorised evaluation of partitions given as order-index permutations.

    Row ``perms[s]`` lists order positions; consecutive blocks of C form the
    batches (the same convention as :func:`core.random_partition`).
    """
    if not instance.strict:
        raise ValidationError("vectorised evaluation needs a strict instance")
    perms = np.atleast_2d(np.asarray(perms))
    n_s = perms.shape[0]
    n_j, cap = instance.n_batches, instance.capacity
    groups = perms.reshape(n_s, n_j, cap)
    lengths = np.asarray(instance.layout.aisle_lengths, dtype=np.int64)

    depth = instance.depth_matrix[groups].max(axis=2)  # (S, J, B)
    visited = depth > 0
    ordinal = np.cumsum(visited, axis=2) * visited
    odd = (ordinal % 2) == 1
    incid = instance.item_matrix[groups].any(axis=2)  # (S, J, K)
    return ManyEvaluation(
        packing=incid.sum(axis=(1, 2)),
        return_travel=2 * depth.sum(axis=(1, 2)),
        sshape_parity_travel=2 * (odd * lengths).sum(axis=(1, 2)),
        sshape_delta_travel=(visited * lengths).sum(axis=(1, 2)),
        aisle_visits=visited.sum(axis=(1, 2)),
        weighted_aisle_visits=(visited * lengths).sum(axis=(1, 2)),
        tau=instance.tau,
    )
