"""Domain model: warehouse layout, items, orders, patterns and partitions.

Aisles, batches and ordinals are 1-based throughout, matching the way
the problem is usually written down; Python containers indexed by them
carry a leading offset where needed.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


class ValidationError(ValueError):
    """An instance or partition violates a structural invariant."""


class ParseError(ValueError):
    """A text file could not be parsed; the message names line and field."""

    def __init__(self, path, lineno: int, message: str):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


@dataclass(frozen=True)
class Layout:
    aisle_lengths: tuple[int, ...]
    width: int = 48
    depot_side: str = "left"
    packing_side: str = "right"
    relaxed_order: bool = False

    def __post_init__(self):
        object.__setattr__(self, "aisle_lengths", tuple(int(x) for x in self.aisle_lengths))
        if not self.aisle_lengths:
            raise ValidationError("layout needs at least one aisle")
        if any(x < 1 for x in self.aisle_lengths):
            raise ValidationError("aisle lengths must be >= 1")
        if not self.relaxed_order and any(
            a < b for a, b in zip(self.aisle_lengths, self.aisle_lengths[1:])
        ):
            raise ValidationError("aisle lengths must be non-increasing")

    @property
    def n_aisles(self) -> int:
        return len(self.aisle_lengths)

    def length(self, aisle: int) -> int:
        return self.aisle_lengths[aisle - 1]


@dataclass(frozen=True)
class Item:
    item_id: int
    aisle: int
    depth: int


@dataclass(frozen=True)
class Order:
    order_id: int
    items: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "items", frozenset(self.items))
        if not self.items:
            raise ValidationError(f"order {self.order_id} has no items")


@dataclass(frozen=True)
class OrderAisleProfile:
    order_id: int
    max_depth_per_aisle: Mapping[int, int]

    @property
    def visited_aisles(self) -> frozenset[int]:
        return frozenset(self.max_depth_per_aisle)


@dataclass(frozen=True)
class Pattern:
    pattern_id: int
    aisle_set: frozenset[int]
    member_orders: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.member_orders)


@dataclass(frozen=True, eq=False)
class Instance:
    """A complete problem input.

    ``strict`` enforces ``len(orders) % capacity == 0``; with ``strict=False``
    the last batch may be short.
    """

    layout: Layout
    items: tuple[Item, ...]
    orders: tuple[Order, ...]
    capacity: int
    tau: float = 0.4
    name: str = "instance"
    strict: bool = True
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "orders", tuple(self.orders))
        object.__setattr__(self, "tau", float(self.tau))
        if self.capacity < 1:
            raise ValidationError("capacity must be positive")
        if not 0.0 <= self.tau <= 1.0:
            raise ValidationError("tau must lie in [0, 1]")
        if not self.orders:
            raise ValidationError("instance has no orders")
        seen = set()
        for it in self.items:
            if it.item_id in seen:
                raise ValidationError(f"duplicate item id {it.item_id}")
            seen.add(it.item_id)
            if not 1 <= it.aisle <= self.layout.n_aisles:
                raise ValidationError(f"item {it.item_id}: aisle {it.aisle} out of range")
            if not 1 <= it.depth <= self.layout.length(it.aisle):
                raise ValidationError(
                    f"item {it.item_id}: depth {it.depth} exceeds aisle length"
                )
        oids = set()
        for o in self.orders:
            if o.order_id in oids:
                raise ValidationError(f"duplicate order id {o.order_id}")
            oids.add(o.order_id)
            missing = o.items - seen
            if missing:
                raise ValidationError(
                    f"order {o.order_id} references unknown item {min(missing)}"
                )
        if self.strict and len(self.orders) % self.capacity:
            raise ValidationError(
                f"{len(self.orders)} orders not divisible by capacity {self.capacity}"
            )

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.layout == other.layout
            and sorted(self.items, key=lambda i: i.item_id)
            == sorted(other.items, key=lambda i: i.item_id)
            and self.orders == other.orders
            and self.capacity == other.capacity
            and self.tau == other.tau
            and self.name == other.name
        )

    __hash__ = object.__hash__

    @property
    def n_orders(self) -> int:
        return len(self.orders)

    @property
    def n_batches(self) -> int:
        return -(-len(self.orders) // self.capacity)

    @cached_property
    def tau_fraction(self) -> Fraction:
        """tau as an exact rational, so cost comparisons can be done in integers."""
        return Fraction(repr(self.tau)).limit_denominator(10**9)

    @cached_property
    def item_location(self) -> dict[int, tuple[int, int]]:
        return {it.item_id: (it.aisle, it.depth) for it in self.items}

    @cached_property
    def order_index(self) -> dict[int, int]:
        return {o.order_id: i for i, o in enumerate(self.orders)}

    @cached_property
    def used_items(self) -> tuple[int, ...]:
        """Items appearing in at least one order, ascending."""
        return tuple(sorted(set().union(*(o.items for o in self.orders))))

    @cached_property
    def orders_with_item(self) -> dict[int, tuple[int, ...]]:
        out = defaultdict(list)
        for o in self.orders:
            for k in o.items:
                out[k].append(o.order_id)
        return {k: tuple(v) for k, v in sorted(out.items())}

    @cached_property
    def orders_in_aisle(self) -> dict[int, tuple[int, ...]]:
        out = {b: [] for b in range(1, self.layout.n_aisles + 1)}
        for p in self.profiles:
            for b in p.max_depth_per_aisle:
                out[b].append(p.order_id)
        return {b: tuple(v) for b, v in out.items()}

    @cached_property
    def profiles(self) -> tuple[OrderAisleProfile, ...]:
        return tuple(build_profiles(self))

    @cached_property
    def depth_matrix(self) -> np.ndarray:
        """r[i, b-1]: deepest item of order i in aisle b, 0 if none."""
        r = np.zeros((self.n_orders, self.layout.n_aisles), dtype=np.int64)
        for i, p in enumerate(self.profiles):
            for b, t in p.max_depth_per_aisle.items():
                r[i, b - 1] = t
        return r

    @cached_property
    def item_matrix(self) -> np.ndarray:
        """Boolean order x used-item incidence."""
        col = {k: c for c, k in enumerate(self.used_items)}
        m = np.zeros((self.n_orders, len(self.used_items)), dtype=bool)
        for i, o in enumerate(self.orders):
            m[i, [col[k] for k in o.items]] = True
        return m


@dataclass(frozen=True)
class Partition:
    """Assignment of every order to a batch index 1..|J|."""

    batch_of: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "batch_of", dict(self.batch_of))

    def __eq__(self, other):
        return isinstance(other, Partition) and self.batch_of == other.batch_of

    def __hash__(self):
        return hash(frozenset(self.batch_of.items()))

    @classmethod
    def from_batches(cls, batches: Iterable[Iterable[int]]) -> "Partition":
        return cls({oid: j for j, b in enumerate(batches, start=1) for oid in b})

    @property
    def n_batches(self) -> int:
        return max(self.batch_of.values(), default=0)

    def batches(self) -> list[list[int]]:
        """Members of each batch (index 0 holds batch 1), ascending order ids."""
        out = [[] for _ in range(self.n_batches)]
        for oid, j in self.batch_of.items():
            out[j - 1].append(oid)
        for b in out:
            b.sort()
        return out

    def canonical(self) -> "Partition":
        """Relabel batches by their smallest member, so equality ignores labels."""
        bs = sorted((b for b in self.batches() if b), key=lambda b: b[0])
        return Partition.from_batches(bs)

    def swapped(self, a: int, b: int) -> "Partition":
        m = dict(self.batch_of)
        m[a], m[b] = m[b], m[a]
        return Partition(m)

    def validate(self, instance: Instance) -> None:
        ids = {o.order_id for o in instance.orders}
        if set(self.batch_of) != ids:
            extra = set(self.batch_of) - ids
            if extra:
                raise ValidationError(f"partition references unknown order {min(extra)}")
            raise ValidationError(f"order {min(ids - set(self.batch_of))} is unassigned")
        n_j = instance.n_batches
        sizes = [0] * n_j
        for j in self.batch_of.values():
            if not 1 <= j <= n_j:
                raise ValidationError(f"batch index {j} out of range 1..{n_j}")
            sizes[j - 1] += 1
        if instance.strict:
            bad = [j + 1 for j, s in enumerate(sizes) if s != instance.capacity]
            if bad:
                raise ValidationError(
                    f"batch {bad[0]} has {sizes[bad[0] - 1]} orders, expected {instance.capacity}"
                )
        elif any(s > instance.capacity for s in sizes):
            raise ValidationError("batch exceeds capacity")


def build_profiles(instance: Instance) -> list[OrderAisleProfile]:
    loc = instance.item_location
    out = []
    for o in instance.orders:
        deepest: dict[int, int] = {}
        for k in o.items:
            b, t = loc[k]
            if t > deepest.get(b, 0):
                deepest[b] = t
        out.append(OrderAisleProfile(o.order_id, dict(sorted(deepest.items()))))
    return out


def extract_patterns(instance: Instance) -> list[Pattern]:
    groups: dict[frozenset[int], list[int]] = defaultdict(list)
    for p in instance.profiles:
        groups[p.visited_aisles].append(p.order_id)
    keys = sorted(groups, key=lambda s: tuple(sorted(s)))
    return [
        Pattern(t, key, tuple(sorted(groups[key]))) for t, key in enumerate(keys, start=1)
    ]


def chunk_partition(order_ids: Sequence[int], capacity: int) -> Partition:
    return Partition(
        {oid: pos // capacity + 1 for pos, oid in enumerate(order_ids)}
    )


def random_partition(instance: Instance, rng_seed) -> Partition:
    """Uniformly random feasible partition (shuffle, then cut into blocks of C).

    ``rng_seed`` is anything :func:`numpy.random.default_rng` accepts; tuples
    such as ``(master_seed, row)`` give independent streams.
    """
    rng = np.random.default_rng(rng_seed)
    perm = rng.permutation(instance.n_orders)
    ids = [instance.orders[i].order_id for i in perm]
    return chunk_partition(ids, instance.capacity)


# -- text formats ---------------------------------------------------------

def _fmt_tau(tau: float) -> str:
    return repr(float(tau))


def format_instance(instance: Instance) -> str:
    lay = instance.layout
    lines = ["obopp 1"]
    lines += [f"# {c}" for c in instance.comments]
    lines.append(f"name {instance.name}")
    lines.append(
        "layout " + " ".join(str(x) for x in (lay.n_aisles, *lay.aisle_lengths))
    )
    lines.append(
        f"geometry width={lay.width} depot={lay.depot_side} packing={lay.packing_side}"
    )
    lines.append(f"params C={instance.capacity} tau={_fmt_tau(instance.tau)}")
    for it in instance.items:
        lines.append(f"item {it.item_id} {it.aisle} {it.depth}")
    for o in instance.orders:
        lines.append(f"order {o.order_id} " + " ".join(str(k) for k in sorted(o.items)))
    return "\n".join(lines) + "\n"


def write_instance(instance: Instance, path) -> None:
    Path(path).write_text(format_instance(instance), encoding="utf-8")


def _ints(tokens, path, lineno, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(path, lineno, f"{what}: expected integers, got {' '.join(tokens)!r}")


def parse_instance(text: str, path="<string>", strict: bool = True,
                   relaxed_layout: bool = False) -> Instance:
    items, orders, comments = [], [], []
    lengths = None
    params = {}
    geometry = {}
    name = Path(str(path)).stem if path != "<string>" else "instance"
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        tok = line.split()
        key = tok[0]
        if not header_seen:
            if tok != ["obopp", "1"]:
                raise ParseError(path, lineno, "header: expected 'obopp 1'")
            header_seen = True
            continue
        if key == "name":
            name = " ".join(tok[1:])
        elif key == "layout":
            vals = _ints(tok[1:], path, lineno, "layout")
            if not vals or vals[0] != len(vals) - 1:
                raise ParseError(path, lineno, "layout: aisle count does not match lengths")
            lengths = vals[1:]
        elif key in ("params", "geometry"):
            dest = params if key == "params" else geometry
            for kv in tok[1:]:
                if "=" not in kv:
                    raise ParseError(path, lineno, f"{key}: expected key=value, got {kv!r}")
                k, v = kv.split("=", 1)
                dest[k] = v
        elif key == "item":
            vals = _ints(tok[1:], path, lineno, "item")
            if len(vals) != 3:
                raise ParseError(path, lineno, "item: expected '<id> <aisle> <depth>'")
            items.append(Item(*vals))
        elif key == "order":
            vals = _ints(tok[1:], path, lineno, "order")
            if len(vals) < 2:
                raise ParseError(path, lineno, "order: expected '<id> <item_id>...'")
            if len(set(vals[1:])) != len(vals) - 1:
                raise ParseError(path, lineno, f"order {vals[0]}: duplicate item id")
            orders.append(Order(vals[0], frozenset(vals[1:])))
        else:
            raise ParseError(path, lineno, f"unknown record {key!r}")
    if not header_seen:
        raise ParseError(path, 1, "header: expected 'obopp 1'")
    if lengths is None:
        raise ParseError(path, 0, "layout: missing layout line")
    try:
        capacity = int(params["C"])
        tau = float(params.get("tau", 0.4))
    except KeyError:
        raise ParseError(path, 0, "params: missing C")
    except ValueError as exc:
        raise ParseError(path, 0, f"params: {exc}")
    layout = Layout(
        tuple(lengths),
        width=int(geometry.get("width", 48)),
        depot_side=geometry.get("depot", "left"),
        packing_side=geometry.get("packing", "right"),
        relaxed_order=relaxed_layout,
    )
    return Instance(layout, tuple(items), tuple(orders), capacity, tau, name,
                    strict=strict, comments=tuple(comments))


def read_instance(path, strict: bool = True, relaxed_layout: bool = False) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"), path, strict,
                          relaxed_layout)


def format_partition(partition: Partition) -> str:
    return "".join(
        f"batch {j}: " + " ".join(str(o) for o in members) + "\n"
        for j, members in enumerate(partition.batches(), start=1)
    )


def write_partition(partition: Partition, path) -> None:
    Path(path).write_text(format_partition(partition), encoding="utf-8")


def parse_partition(text: str, path="<string>") -> Partition:
    batch_of = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, rest = line.partition(":")
        htok = head.split()
        if not sep or len(htok) != 2 or htok[0] != "batch":
            raise ParseError(path, lineno, "expected 'batch <j>: <order_id>...'")
        (j,) = _ints(htok[1:], path, lineno, "batch index")
        for oid in _ints(rest.split(), path, lineno, "order ids"):
            if oid in batch_of:
                raise ParseError(path, lineno, f"order {oid} listed twice")
            batch_of[oid] = j
    return Partition(batch_of)


def read_partition(path) -> Partition:
    return parse_partition(Path(path).read_text(encoding="utf-8"), path)
