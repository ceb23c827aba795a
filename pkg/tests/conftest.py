import numpy as np
import pytest
from hypothesis import settings

from batchopt.core import Instance, Item, Layout, Order

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def make_instance(lengths, items, orders, capacity, tau=0.4, name="t", strict=True):
    """items: {item_id: (aisle, depth)}, orders: {order_id: [item ids]}."""
    return Instance(
        Layout(tuple(lengths)),
        tuple(Item(k, b, t) for k, (b, t) in sorted(items.items())),
        tuple(Order(o, frozenset(ks)) for o, ks in orders.items()),
        capacity, tau, name=name, strict=strict,
    )


def random_tiny_instance(seed, n_orders=4, capacity=2, n_aisles=4, max_len=6,
                         n_items=8, max_order_items=3, tau=0.4):
    """Small random instance; aisle lengths non-increasing, several items
    may share a location."""
    rng = np.random.default_rng(seed)
    lengths = sorted(rng.integers(1, max_len + 1, size=n_aisles).tolist(), reverse=True)
    items = {}
    for k in range(1, n_items + 1):
        b = int(rng.integers(1, n_aisles + 1))
        items[k] = (b, int(rng.integers(1, lengths[b - 1] + 1)))
    orders = {}
    for o in range(1, n_orders + 1):
        size = int(rng.integers(1, max_order_items + 1))
        orders[o] = sorted(int(x) for x in rng.choice(n_items, size=size, replace=False) + 1)
    used = {k for ks in orders.values() for k in ks}
    return make_instance(lengths, {k: v for k, v in items.items() if k in used}, orders,
                         capacity, tau, name=f"tiny{seed}")


@pytest.fixture
def tiny():
    # aisle lengths 10, 8, 6, 4
    return make_instance(
        (10, 8, 6, 4),
        {1: (1, 3), 2: (1, 5), 3: (2, 4), 4: (3, 2), 5: (3, 6), 6: (4, 1)},
        {1: [1, 2], 2: [3], 3: [3, 4], 4: [5, 6]},
        capacity=2,
    )
