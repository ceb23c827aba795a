import collections

import pytest
from hypothesis import given, strategies as st

from batchopt.core import (Layout, ParseError, Partition,
                           ValidationError, build_profiles, extract_patterns,
                           format_instance, parse_instance, parse_partition,
                           random_partition, read_instance, read_partition,
                           write_instance, write_partition, format_partition)
from conftest import make_instance, random_tiny_instance


def test_profile_max_depth_single_aisle():
    inst = make_instance((6,), {1: (1, 3), 2: (1, 5)}, {1: [1, 2]}, 1)
    (p,) = build_profiles(inst)
    assert p.visited_aisles == {1}
    assert p.max_depth_per_aisle == {1: 5}


def test_profile_singleton():
    inst = make_instance((3, 3), {1: (2, 1)}, {1: [1]}, 1)
    (p,) = build_profiles(inst)
    assert p.visited_aisles == {2}
    assert p.max_depth_per_aisle == {2: 1}


def test_profile_two_aisles():
    inst = make_instance((6, 6, 6), {1: (1, 4), 2: (3, 2), 3: (3, 6)}, {1: [1, 2, 3]}, 1)
    (p,) = build_profiles(inst)
    assert p.visited_aisles == {1, 3}
    assert p.max_depth_per_aisle == {1: 4, 3: 6}


@given(st.integers(0, 10**6))
def test_visited_aisles_match_raw_items(seed):
    inst = random_tiny_instance(seed, n_orders=6)
    loc = {it.item_id: it.aisle for it in inst.items}
    for o, p in zip(inst.orders, build_profiles(inst)):
        assert p.visited_aisles == {loc[k] for k in o.items}
        for b, r in p.max_depth_per_aisle.items():
            assert r == max(it.depth for it in inst.items if it.item_id in o.items and it.aisle == b)


def test_patterns_grouping():
    inst = make_instance((5, 5), {1: (1, 1), 2: (1, 2), 3: (2, 1)}, {1: [1], 2: [2], 3: [3]},
                         1)
    pats = extract_patterns(inst)
    assert [(set(p.aisle_set), p.size) for p in pats] == [({1}, 2), ({2}, 1)]


def test_patterns_single_group():
    inst = make_instance((5,), {1: (1, 1), 2: (1, 3)}, {1: [1], 2: [2], 3: [1, 2]}, 1)
    (p,) = extract_patterns(inst)
    assert p.member_orders == (1, 2, 3)


def test_patterns_ignore_listing_order():
    # aisle sets {1,2}, {2,1}, {1}, {1,2}
    inst = make_instance((5, 5), {1: (1, 1), 2: (2, 1), 3: (1, 2)},
                         {1: [1, 2], 2: [2, 1], 3: [3], 4: [3, 2]}, 1)
    pats = {tuple(sorted(p.aisle_set)): p.size for p in extract_patterns(inst)}
    assert pats == {(1, 2): 3, (1,): 1}


@given(st.integers(0, 10**6))
def test_patterns_partition_orders(seed):
    inst = random_tiny_instance(seed, n_orders=6, capacity=3)
    pats = extract_patterns(inst)
    members = [o for p in pats for o in p.member_orders]
    assert sorted(members) == sorted(o.order_id for o in inst.orders)
    prof = {p.order_id: p.visited_aisles for p in build_profiles(inst)}
    for p in pats:
        assert all(prof[o] == p.aisle_set for o in p.member_orders)
    keys = [tuple(sorted(p.aisle_set)) for p in pats]
    assert keys == sorted(keys)


def test_instance_roundtrip(tmp_path, tiny):
    path = tmp_path / "a.obopp"
    write_instance(tiny, path)
    assert read_instance(path) == tiny


@given(st.integers(0, 10**6))
def test_instance_text_roundtrip(seed):
    inst = random_tiny_instance(seed, n_orders=6, capacity=3)
    again = parse_instance(format_instance(inst))
    assert again == inst
    assert format_instance(again) == format_instance(inst)


def test_unknown_item_rejected():
    text = "obopp 1\nlayout 1 5\nparams C=1 tau=0.4\nitem 1 1 2\norder 1 1 9\n"
    with pytest.raises(ValidationError, match="unknown item"):
        parse_instance(text)


def test_not_divisible_rejected():
    lines = ["obopp 1", "layout 1 5", "params C=2 tau=0.4", "item 1 1 2"]
    lines += [f"order {o} 1" for o in range(1, 8)]
    with pytest.raises(ValidationError, match="not divisible by capacity"):
        parse_instance("\n".join(lines))
    relaxed = parse_instance("\n".join(lines), strict=False)
    assert relaxed.n_batches == 4


@pytest.mark.parametrize("text,where", [
    ("obopp 2\n", ":1:"),
    ("obopp 1\nlayout 2 5\n", ":2:"),
    ("obopp 1\nlayout 1 5\nparams C=1\nitem 1 x 2\n", ":4:"),
    ("obopp 1\nlayout 1 5\nparams C=1\nbogus 1\n", ":4:"),
])
def test_parse_errors_name_line(text, where):
    with pytest.raises(ParseError, match=where):
        parse_instance(text, "f.obopp")


def test_depth_and_layout_invariants():
    with pytest.raises(ValidationError, match="depth"):
        make_instance((3,), {1: (1, 4)}, {1: [1]}, 1)
    with pytest.raises(ValidationError, match="non-increasing"):
        Layout((3, 5))
    assert Layout((3, 5), relaxed_order=True).n_aisles == 2


def test_shared_locations_allowed():
    inst = make_instance((4,), {1: (1, 2), 2: (1, 2)}, {1: [1, 2]}, 1)
    assert inst.n_orders == 1


def test_partition_roundtrip(tmp_path):
    part = Partition({1: 2, 2: 1, 3: 2, 4: 1})
    path = tmp_path / "p.txt"
    write_partition(part, path)
    assert read_partition(path) == part
    assert parse_partition(format_partition(part)) == part


def test_partition_parse_error():
    with pytest.raises(ParseError, match=":2:"):
        parse_partition("batch 1: 1 2\nbatch x: 3\n")


def test_partition_validate(tiny):
    Partition({1: 1, 2: 1, 3: 2, 4: 2}).validate(tiny)
    with pytest.raises(ValidationError):
        Partition({1: 1, 2: 1, 3: 1, 4: 2}).validate(tiny)
    with pytest.raises(ValidationError, match="unassigned"):
        Partition({1: 1, 2: 1, 3: 2}).validate(tiny)


def test_canonical_ignores_labels():
    a = Partition({1: 1, 2: 1, 3: 2, 4: 2})
    b = Partition({1: 2, 2: 2, 3: 1, 4: 1})
    assert a != b
    assert a.canonical() == b.canonical()


def test_random_partition_shape_and_determinism(tiny):
    p = random_partition(tiny, 7)
    p.validate(tiny)
    assert sorted(len(b) for b in p.batches()) == [2, 2]
    assert random_partition(tiny, 7) == p


def test_random_partition_uniform_pairings(tiny):
    counts = collections.Counter()
    n = 10_000
    for s in range(n):
        counts[frozenset(frozenset(b) for b in random_partition(tiny, s).batches())] += 1
    assert len(counts) == 3
    for c in counts.values():
        assert abs(c / n - 1 / 3) <= 0.02


def test_random_partition_chi_square():
    from scipy.stats import chisquare
    inst = random_tiny_instance(3, n_orders=6, capacity=2)
    counts = collections.Counter()
    for s in range(6000):
        counts[frozenset(frozenset(b) for b in random_partition(inst, 10**6 + s).batches())] += 1
    assert len(counts) == 15
    assert chisquare(list(counts.values())).pvalue > 0.01
