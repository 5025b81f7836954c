import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mtra import spaces
from mtra import preferences as prefs
from mtra.errors import InconsistentOrder, NothingAvailable
from mtra.mechanisms import MrpExact, mrp


def bundle_ids(inst, names):
    return [inst.bundle_by_name[x] for x in names]


# -- induced orders ----------------------------------------------------------


def test_induce_order_mixed_pair_linear(mixed_pair):
    chain = prefs.PartialOrder.from_chain(bundle_ids(mixed_pair, ["1F1B", "1F2B", "2F2B", "2F1B"]))
    assert mixed_pair.orders[0] == chain
    assert mixed_pair.orders[0].is_linear()


def test_induce_order_single_type_independent():
    net = prefs.CPNet.independent([(0, 1, 2)])
    assert prefs.induce_order(net) == prefs.PartialOrder.from_chain([0, 1, 2])


def test_induce_order_dependent_pair(dependent_pair):
    chain = prefs.PartialOrder.from_chain(bundle_ids(dependent_pair, ["1F2B", "1F1B", "2F1B", "2F2B"]))
    assert dependent_pair.orders[0] == chain


def test_induced_orders_are_valid_partial_orders():
    rng = random.Random(3)
    for _ in range(40):
        n, p = rng.choice([2, 3]), rng.choice([1, 2])
        net = spaces.random_cpnet(rng, (n,) * p)
        order = prefs.induce_order(net)  # constructor asserts closure etc.
        assert order.m == n**p


def test_cyclic_dependency_rejected():
    from mtra.errors import CyclicDependency

    with pytest.raises(CyclicDependency):
        prefs.CPNet(
            (2, 2),
            ((1,), (0,)),
            (
                (((0,), (0, 1)), ((1,), (0, 1))),
                (((0,), (0, 1)), ((1,), (0, 1))),
            ),
        )


def test_incomplete_cpt_rejected():
    from mtra.errors import IncompleteCPT

    with pytest.raises(IncompleteCPT):
        prefs.CPNet((2, 2), ((), (0,)), ((((), (0, 1)),), (((0,), (0, 1)),)))


# -- preference graphs -------------------------------------------------------


def test_preference_graph_bottom_bundle(mixed_pair):
    bn = mixed_pair.bundle_by_name
    graph = prefs.preference_graph(mixed_pair.orders[1])
    assert set(graph.edges) == {
        (bn["1F1B"], bn["1F2B"]),
        (bn["2F1B"], bn["1F2B"]),
        (bn["2F2B"], bn["1F2B"]),
    }


def test_preference_graph_empty_and_chain():
    assert prefs.preference_graph(prefs.PartialOrder.empty(3)).edges == ()
    chain = prefs.PartialOrder.from_chain([2, 0, 3, 1])
    graph = prefs.preference_graph(chain)
    assert len(graph.edges) == 3


def test_hasse_round_trip_random_orders():
    rng = random.Random(5)
    for _ in range(60):
        order = spaces.random_partial_order(rng, rng.choice([3, 4, 5]))
        assert prefs.preference_graph(order).transitive_closure() == order


# -- upper contour sets ------------------------------------------------------


def test_upper_contour_sets(mixed_pair):
    bn = mixed_pair.bundle_by_name
    assert mixed_pair.orders[0].upper_contour_set(bn["2F2B"]) == {
        bn["1F1B"],
        bn["1F2B"],
        bn["2F2B"],
    }
    assert mixed_pair.orders[1].upper_contour_set(bn["2F1B"]) == {bn["2F1B"]}
    empty = prefs.PartialOrder.empty(4)
    assert empty.upper_contour_set(2) == {2}


# -- topological sorts -------------------------------------------------------


def test_topological_sort_two_extensions(mixed_pair):
    tb_a = bundle_ids(mixed_pair, ["2F1B", "1F1B", "2F2B", "1F2B"])
    tb_b = bundle_ids(mixed_pair, ["1F1B", "2F2B", "2F1B", "1F2B"])
    assert prefs.topological_sort(mixed_pair.orders[1], tb_a) == tuple(tb_a)
    assert prefs.topological_sort(mixed_pair.orders[1], tb_b) == tuple(tb_b)


def test_topological_sort_linear_input_ignores_tiebreak(mixed_pair):
    chain = mixed_pair.orders[0]
    expected = tuple(bundle_ids(mixed_pair, ["1F1B", "1F2B", "2F2B", "2F1B"]))
    for tiebreak in itertools.permutations(range(4)):
        assert prefs.topological_sort(chain, tiebreak) == expected


def test_topological_sort_is_linear_extension_and_deterministic():
    rng = random.Random(9)
    for _ in range(50):
        m = rng.choice([3, 4, 5])
        order = spaces.random_partial_order(rng, m)
        tiebreak = list(range(m))
        rng.shuffle(tiebreak)
        out = prefs.topological_sort(order, tiebreak)
        assert prefs.is_linear_extension(order, out)
        assert out == prefs.topological_sort(order, tiebreak)


def test_topological_sort_rejects_bad_tiebreak():
    with pytest.raises(InconsistentOrder):
        prefs.topological_sort(prefs.PartialOrder.empty(3), [0, 0, 1])


# -- ext ----------------------------------------------------------------------


def test_ext_examples(mixed_pair):
    tb_a = tuple(bundle_ids(mixed_pair, ["2F1B", "1F1B", "2F2B", "1F2B"]))
    sort_a = prefs.topological_sort(mixed_pair.orders[1], tb_a)
    # 1B exhausted: first two bundles of the sort are unavailable
    assert mixed_pair.bundle_names[prefs.ext(sort_a, mixed_pair.bundle_items, [1, 1, 0, 1])] == "2F2B"
    chain = prefs.topological_sort(mixed_pair.orders[0], range(4))
    assert mixed_pair.bundle_names[prefs.ext(chain, mixed_pair.bundle_items, [1, 1, 1, 1])] == "1F1B"
    assert mixed_pair.bundle_names[prefs.ext(chain, mixed_pair.bundle_items, [0, 1, 1, 0])] == "2F1B"


def test_ext_nothing_available(mixed_pair):
    chain = prefs.topological_sort(mixed_pair.orders[0], range(4))
    with pytest.raises(NothingAvailable):
        prefs.ext(chain, mixed_pair.bundle_items, [0, 1, 0, 0])


# -- top_cpnet ----------------------------------------------------------------


def test_top_cpnet_examples(mixed_pair):
    net = mixed_pair.preferences[0]
    assert prefs.top_cpnet(net, [{0, 1}, {1}]) == (0, 1)  # only 2B left: 1F2B
    assert prefs.top_cpnet(net, [{1}, {0, 1}]) == (1, 1)  # only 2F left: 2F2B
    assert prefs.top_cpnet(net, [{0, 1}, {0, 1}]) == (0, 0)  # everything: 1F1B


def test_top_cpnet_dominates_every_available_bundle():
    rng = random.Random(13)
    for _ in range(20):
        n, p = rng.choice([2, 3]), rng.choice([1, 2])
        net = spaces.random_cpnet(rng, (n,) * p)
        order = prefs.induce_order(net)
        items = [list(range(n))] * p
        for remaining in itertools.product(
            *[
                [c for size in range(1, n + 1) for c in itertools.combinations(range(n), size)]
                for _ in range(p)
            ]
        ):
            top = prefs.top_cpnet(net, remaining)
            top_idx = prefs.bundle_index(top, (n,) * p)
            for bundle in itertools.product(*remaining):
                idx = prefs.bundle_index(bundle, (n,) * p)
                if idx != top_idx:
                    assert order.prefers(top_idx, idx)


def test_ext_equals_top_for_cpnet_orders():
    rng = random.Random(17)
    for _ in range(20):
        n, p = rng.choice([2, 3]), rng.choice([1, 2])
        net = spaces.random_cpnet(rng, (n,) * p)
        order = prefs.induce_order(net)
        m = n**p
        tiebreak = list(range(m))
        rng.shuffle(tiebreak)
        sort = prefs.topological_sort(order, tiebreak)
        bundle_items = [
            tuple(t * n + coord for t, coord in enumerate(prefs.bundle_tuple(x, (n,) * p)))
            for x in range(m)
        ]
        for _ in range(10):
            remaining = [
                sorted(rng.sample(range(n), rng.randint(1, n))) for _ in range(p)
            ]
            supply = [0] * (n * p)
            for t, items in enumerate(remaining):
                for i in items:
                    supply[t * n + i] = 1
            top = prefs.top_cpnet(net, remaining)
            ext_bundle = prefs.ext(sort, bundle_items, supply)
            assert prefs.bundle_tuple(ext_bundle, (n,) * p) == top


# -- upper invariant transformations ------------------------------------------


def test_is_uit_identity(mixed_pair):
    order = mixed_pair.orders[1]
    row = (Fraction(1, 2), 0, 0, Fraction(1, 2))
    for pivot in range(4):
        ok, z = prefs.is_uit(order, order, pivot, row)
        assert ok and z == frozenset()


def test_is_uit_blank_vs_chain(blank_vs_chain):
    truth = mrp(blank_vs_chain, MrpExact()).assignment
    lie = prefs.PartialOrder.from_pairs(2, [(1, 0)])
    ok, z = prefs.is_uit(blank_vs_chain.orders[0], lie, 1, truth.row(0))
    assert ok and z == frozenset()
    ok_at_1, reason = prefs.is_uit(blank_vs_chain.orders[0], lie, 0, truth.row(0))
    assert not ok_at_1 and "gained" in reason


def test_is_uit_three_chains(three_chains):
    from mtra.mechanisms import mgd

    P = mgd(three_chains)
    bn = three_chains.bundle_by_name
    ok, z = prefs.is_uit(three_chains.orders[2], three_chains.orders[0], bn["2F"], P.row(2))
    assert ok and z == frozenset({bn["3F"]})


def test_is_uit_rejects_positive_share_removal(mixed_pair):
    order = mixed_pair.orders[0]  # full chain
    bottom = bundle_ids(mixed_pair, ["2F1B"])[0]
    smaller = order.without_bundles([mixed_pair.bundle_by_name["1F2B"]])
    row = (Fraction(1, 2), Fraction(1, 2), 0, 0)  # positive share on 1F2B
    ok, reason = prefs.is_uit(order, smaller, bottom, row)
    assert not ok and "positive share" in reason


def test_without_bundles_is_restriction():
    rng = random.Random(23)
    for _ in range(30):
        order = spaces.random_partial_order(rng, 5)
        removed = rng.sample(range(5), 2)
        new = order.without_bundles(removed)
        for x in range(5):
            for y in range(5):
                if x in removed or y in removed:
                    assert not new.prefers(x, y)
                else:
                    assert new.prefers(x, y) == order.prefers(x, y)


# -- allocation sums pin rows down (zeta inversion) ----------------------------


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_distinct_rows_have_distinct_ucs_sums(data):
    rng = random.Random(data.draw(st.integers(0, 10**6)))
    m = data.draw(st.integers(2, 5))
    order = spaces.random_partial_order(rng, m)
    num = data.draw(st.lists(st.integers(0, 4), min_size=m, max_size=m))
    den = sum(num)
    if den == 0:
        return
    row_a = tuple(Fraction(v, den) for v in num)
    num_b = data.draw(st.lists(st.integers(0, 4), min_size=m, max_size=m))
    den_b = sum(num_b)
    if den_b == 0:
        return
    row_b = tuple(Fraction(v, den_b) for v in num_b)
    from mtra.axioms import ucs_sums

    if row_a != row_b:
        assert ucs_sums(order, row_a) != ucs_sums(order, row_b)


def test_partial_order_rejects_cycles():
    with pytest.raises(InconsistentOrder):
        prefs.PartialOrder.from_pairs(3, [(0, 1), (1, 2), (2, 0)])
