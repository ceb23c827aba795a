"""Random instance generator.

Orders are built slot-wise: sample per-order sizes, pick a set of unique
items so that slots : unique items is about 3 : 2, make every unique item
occupy at least one slot, and deal the slots out to orders.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import Instance, Item, Layout, Order, ValidationError

TARGET_LOCATIONS = 541
MAX_AISLE_LENGTH = 36


def default_aisle_lengths(max_length: int = MAX_AISLE_LENGTH,
                          target_locations: int = TARGET_LOCATIONS) -> tuple[int, ...]:
    """Lengths max_length, max_length-1, ..., k with the sum closest to the target."""
    best = None
    for k in range(max_length, 0, -1):
        lengths = tuple(range(max_length, k - 1, -1))
        gap = abs(sum(lengths) - target_locations)
        if best is None or gap < best[0]:
            best = (gap, lengths)
    return best[1]


@dataclass(frozen=True)
class GeneratorConfig:
    n_orders: int
    capacity: int
    tau: float = 0.4
    aisle_lengths: tuple[int, ...] | None = None
    mean_items_per_order: float = 2.8
    unique_ratio: float = 1.5
    catalog_size: int | None = None
    seed: int = 0
    width: int = 48

    def __post_init__(self):
        if self.n_orders < 1 or self.capacity < 1:
            raise ValidationError("n_orders and capacity must be positive")
        if self.n_orders % self.capacity:
            raise ValidationError(
                f"{self.n_orders} orders not divisible by capacity {self.capacity}"
            )
        if self.mean_items_per_order < 1:
            raise ValidationError("mean_items_per_order must be >= 1")
        if self.unique_ratio < 1:
            raise ValidationError("unique_ratio (slots per unique item) must be >= 1")

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(self.aisle_lengths) if self.aisle_lengths else default_aisle_lengths()

    @property
    def catalog(self) -> int:
        if self.catalog_size is not None:
            return self.catalog_size
        # the reference catalog holds 6413 items for 800 orders
        return max(1, round(6413 * self.n_orders / 800))


def generate_instance(config: GeneratorConfig) -> Instance:
    rng = np.random.default_rng(config.seed)
    lengths = config.lengths
    layout = Layout(lengths, width=config.width)

    positions = [(b, t) for b, l in enumerate(lengths, start=1) for t in range(1, l + 1)]
    catalog = config.catalog
    loc_idx = rng.integers(len(positions), size=catalog)

    sizes = 1 + rng.poisson(config.mean_items_per_order - 1.0, size=config.n_orders)
    n_slots = int(sizes.sum())
    n_unique = int(round(n_slots / config.unique_ratio))
    if n_unique > catalog:
        raise ValidationError(f"need {n_unique} unique items but catalog has {catalog}")
    if n_unique < int(sizes.max()):
        raise ValidationError(
            f"{n_unique} unique items cannot fill an order of {int(sizes.max())} distinct items"
        )

    drawn = rng.choice(catalog, size=n_unique, replace=False)
    slots = np.concatenate([drawn, rng.choice(drawn, size=n_slots - n_unique)])
    rng.shuffle(slots)

    orders = []
    pos = 0
    for oid, size in enumerate(sizes, start=1):
        chunk = [int(x) for x in slots[pos:pos + size]]
        pos += size
        contents: list[int] = []
        for k in chunk:
            while k in contents:
                k = int(drawn[rng.integers(n_unique)])
            contents.append(k)
        orders.append(Order(oid, frozenset(x + 1 for x in contents)))

    used = sorted(set().union(*(o.items for o in orders)))
    items = [Item(k, *positions[loc_idx[k - 1]]) for k in used]
    comments = (
        f"generated seed={config.seed} n_orders={config.n_orders} C={config.capacity}",
        f"layout aisles {lengths[0]}..{lengths[-1]} LU, {sum(lengths)} locations "
        f"(closest to {TARGET_LOCATIONS})",
        f"mean_items_per_order={config.mean_items_per_order} "
        f"unique_ratio={config.unique_ratio} catalog={catalog}",
    )
    return Instance(layout, tuple(items), tuple(orders), config.capacity, config.tau,
                    name=f"gen-n{config.n_orders}-c{config.capacity}-s{config.seed}",
                    comments=comments)


def with_seed(config: GeneratorConfig, seed: int) -> GeneratorConfig:
    return replace(config, seed=seed)
