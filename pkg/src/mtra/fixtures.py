"""Embedded reference instances and their expected outputs.

These are the worked examples and counterexamples that pin the package's
behavior: two-agent food/beverage instances with conditional and partial
preferences, the three-agent single-type instances behind the fairness
and truthfulness counterexamples, and the frozen assignment tables they
produce.  ``replay_all`` re-derives every expected value and reports the
first divergence, which gives the CLI a self-contained regression gate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import preferences as prefs
from . import spaces
from .axioms import (
    check_decomposability,
    check_envy,
    check_ex_post_efficiency,
    check_ordinal_fairness,
    check_sd_efficiency,
    check_strategyproofness,
    check_upper_invariance,
    find_generalized_cycle,
    improvable_tuples,
    sd_compare,
)
from .mechanisms import MrpExact, mgd, mgd_decompose, mps, mrp
from .model import FractionalAssignment, Instance, build_instance

F = Fraction


def mixed_pair() -> Instance:
    """Two agents, types F and B; agent 1 conditional (F -> B), agent 2
    a partial order with one bottom bundle."""
    return build_instance(
        {
            "agents": 2,
            "types": [
                {"name": "F", "items": ["1F", "2F"]},
                {"name": "B", "items": ["1B", "2B"]},
            ],
            "preferences": [
                {
                    "kind": "cpnet",
                    "dependency": [["F", "B"]],
                    "cpt": {
                        "F": {"": ["1F", "2F"]},
                        "B": {"1F": ["1B", "2B"], "2F": ["2B", "1B"]},
                    },
                },
                {
                    "kind": "partial",
                    "edges": [["1F1B", "1F2B"], ["2F1B", "1F2B"], ["2F2B", "1F2B"]],
                },
            ],
        }
    )


def partial_twins() -> Instance:
    """Both agents carrying agent 2's partial order from mixed_pair."""
    base = mixed_pair()
    return Instance(base.types, (base.preferences[1], base.preferences[1]))


def dependent_pair() -> Instance:
    """Shared dependency F -> B; the instance whose eating outcome is
    valid but cannot be realized as any lottery."""
    return build_instance(
        {
            "agents": 2,
            "types": [
                {"name": "F", "items": ["1F", "2F"]},
                {"name": "B", "items": ["1B", "2B"]},
            ],
            "preferences": [
                {
                    "kind": "cpnet",
                    "dependency": [["F", "B"]],
                    "cpt": {
                        "F": {"": ["1F", "2F"]},
                        "B": {"1F": ["2B", "1B"], "2F": ["1B", "2B"]},
                    },
                },
                {
                    "kind": "cpnet",
                    "dependency": [["F", "B"]],
                    "cpt": {
                        "F": {"": ["1F", "2F"]},
                        "B": {"1F": ["1B", "2B"], "2F": ["2B", "1B"]},
                    },
                },
            ],
        }
    )


def blank_vs_chain() -> Instance:
    """Two agents, one type; agent 1 reports nothing, agent 2 a chain."""
    return build_instance(
        {
            "agents": 2,
            "types": [{"name": "F", "items": ["1F", "2F"]}],
            "preferences": [
                {"kind": "partial", "edges": []},
                {"kind": "partial", "edges": [["1F", "2F"]]},
            ],
        }
    )


def three_chains() -> Instance:
    """Three agents, one type, three distinct chains."""
    return build_instance(
        {
            "agents": 3,
            "types": [{"name": "F", "items": ["1F", "2F", "3F"]}],
            "preferences": [
                {"kind": "partial", "edges": [["1F", "2F"], ["1F", "3F"], ["2F", "3F"]]},
                {"kind": "partial", "edges": [["1F", "3F"], ["1F", "2F"], ["3F", "2F"]]},
                {"kind": "partial", "edges": [["3F", "1F"], ["3F", "2F"], ["1F", "2F"]]},
            ],
        }
    )


def opposed_trio() -> Instance:
    """Two opposed chains plus one empty preference; the instance where
    strong envy-freeness and sd-efficiency cannot meet."""
    return build_instance(
        {
            "agents": 3,
            "types": [{"name": "F", "items": ["1F", "2F", "3F"]}],
            "preferences": [
                {"kind": "partial", "edges": [["1F", "2F"], ["2F", "3F"], ["1F", "3F"]]},
                {"kind": "partial", "edges": [["3F", "2F"], ["2F", "1F"], ["3F", "1F"]]},
                {"kind": "partial", "edges": []},
            ],
        }
    )


def solo() -> Instance:
    return build_instance(
        {
            "agents": 1,
            "types": [{"name": "F", "items": ["1F"]}],
            "preferences": [{"kind": "partial", "edges": []}],
        }
    )


def chain_twins() -> Instance:
    """Both agents with mixed_pair agent 1's linear order; ordinal fairness does
    not single out the eating outcome here."""
    base = mixed_pair()
    return Instance(base.types, (base.preferences[0], base.preferences[0]))


# Tie-breaks of the two-agent food/beverage examples (shared by all agents;
# agent 1's order is linear so only agent 2's sort is affected).
def sort_a(instance: Instance) -> list[int]:
    return [instance.bundle_by_name[x] for x in ["2F1B", "1F1B", "2F2B", "1F2B"]]


def sort_b(instance: Instance) -> list[int]:
    return [instance.bundle_by_name[x] for x in ["1F1B", "2F2B", "2F1B", "1F2B"]]


def assignment_1() -> FractionalAssignment:
    return FractionalAssignment.from_rows(
        [["1/2", "1/2", "0", "0"], ["0", "0", "1/2", "1/2"]]
    )


def assignment_2() -> FractionalAssignment:
    return FractionalAssignment.from_rows(
        [["1/2", "0", "0", "1/2"], ["1/2", "0", "0", "1/2"]]
    )


def assignment_3() -> FractionalAssignment:
    return FractionalAssignment.from_rows(
        [["0", "1/2", "1/2", "0"], ["1/2", "0", "0", "1/2"]]
    )


def assignment_4() -> FractionalAssignment:
    return FractionalAssignment.from_rows(
        [["0", "1/2", "1/2", "0"], ["1/2", "0", "0", "1/2"]]
    )


def assignment_5() -> FractionalAssignment:
    return FractionalAssignment.from_rows([["1/3"] * 3] * 3)


def assignment_6() -> FractionalAssignment:
    return FractionalAssignment.from_rows(
        [["2/3", "1/3", "0"], ["0", "1/3", "2/3"], ["1/3", "1/3", "1/3"]]
    )


# -- replay suite ------------------------------------------------------------


@dataclass(frozen=True)
class ReplayResult:
    name: str
    passed: bool
    detail: str = ""


def _check(name: str, ok: bool, detail: str = "") -> ReplayResult:
    return ReplayResult(name, bool(ok), detail)


def _induced_order_check() -> ReplayResult:
    inst = mixed_pair()
    chain = prefs.PartialOrder.from_chain(
        [inst.bundle_by_name[b] for b in ["1F1B", "1F2B", "2F2B", "2F1B"]]
    )
    return _check("induced-order-linear-chain", inst.orders[0] == chain)


def _preference_graph_check() -> ReplayResult:
    inst = mixed_pair()
    graph = prefs.preference_graph(inst.orders[1])
    bn = inst.bundle_by_name
    want = {(bn["1F1B"], bn["1F2B"]), (bn["2F1B"], bn["1F2B"]), (bn["2F2B"], bn["1F2B"])}
    return _check("bottom-bundle-preference-graph", set(graph.edges) == want)


def _upper_contour_check() -> ReplayResult:
    inst = mixed_pair()
    bn = inst.bundle_by_name
    o1, o2 = inst.orders
    ok = (
        o1.upper_contour_set(bn["1F1B"]) == {bn["1F1B"]}
        and o1.upper_contour_set(bn["1F2B"]) == {bn["1F1B"], bn["1F2B"]}
        and o1.upper_contour_set(bn["2F2B"]) == {bn["1F1B"], bn["1F2B"], bn["2F2B"]}
        and o1.upper_contour_set(bn["2F1B"]) == set(range(4))
        and o2.upper_contour_set(bn["2F1B"]) == {bn["2F1B"]}
        and o2.upper_contour_set(bn["1F2B"]) == set(range(4))
    )
    return _check("upper-contour-sets", ok)


def _dominance_table_check() -> ReplayResult:
    inst = mixed_pair()
    bn = inst.bundle_by_name
    a1, a2, a3 = assignment_1(), assignment_2(), assignment_3()
    ok = all(
        sd_compare(inst.orders[j], a2.row(j), a3.row(j)).p_dominates_q for j in range(2)
    )
    v = sd_compare(inst.orders[1], a2.row(1), a1.row(1))
    ok = ok and not v.p_dominates_q and v.slack[bn["2F1B"]] < 0
    ok = ok and sd_compare(inst.orders[0], a1.row(0), a2.row(0)).p_dominates_q
    w = sd_compare(inst.orders[1], a1.row(1), a2.row(1))
    ok = ok and not w.p_dominates_q and not w.q_dominates_p and w.slack[bn["1F1B"]] < 0
    return _check(
        "dominance-table",
        ok,
        "(2)sd(3); (2) vs (1) incomparable for agent 2, (1)sd(2) for agent 1",
    )


def _topological_sorts_check() -> ReplayResult:
    inst = mixed_pair()
    got_a = prefs.topological_sort(inst.orders[1], sort_a(inst))
    got_b = prefs.topological_sort(inst.orders[1], sort_b(inst))
    return _check(
        "two-topological-sorts",
        got_a == tuple(sort_a(inst)) and got_b == tuple(sort_b(inst)),
    )


def _eating_two_sorts_check() -> ReplayResult:
    inst = mixed_pair()
    first, _ = mps(inst, sort_a(inst))
    second, _ = mps(inst, sort_b(inst))
    return _check(
        "eating-two-sorts", first == assignment_1() and second == assignment_2()
    )


def _priority_exact_check() -> ReplayResult:
    inst = mixed_pair()
    result = mrp(inst, MrpExact(), sort_a(inst))
    ok = result.assignment == assignment_1()
    ok = ok and result.lottery.expectation(inst) == result.assignment
    return _check("priority-exact-average", ok)


def _group_sharing_check() -> ReplayResult:
    inst = partial_twins()
    bn = inst.bundle_by_name
    first = mgd(inst, sort_a(inst))
    second = mgd(inst, sort_b(inst))
    half = F(1, 2)
    want_first = FractionalAssignment.from_rows(
        [
            {bn["2F1B"]: half, bn["1F2B"]: half}.get(x, F(0))
            for x in range(4)
        ]
        for _ in range(2)
    )
    want_second = FractionalAssignment.from_rows(
        [
            {bn["1F1B"]: half, bn["2F2B"]: half}.get(x, F(0))
            for x in range(4)
        ]
        for _ in range(2)
    )
    return _check("group-sharing-two-sorts", first == want_first and second == want_second)


def _group_lottery_check() -> ReplayResult:
    inst = partial_twins()
    lottery = mgd_decompose(inst, sort_a(inst))
    ok = (
        len(lottery.entries) == 2
        and all(prob == F(1, 2) for prob, _ in lottery.entries)
        and lottery.expectation(inst) == mgd(inst, sort_a(inst))
    )
    return _check("group-sharing-lottery", ok)


def _dependent_pair_eating_check() -> ReplayResult:
    inst = dependent_pair()
    chain1 = prefs.PartialOrder.from_chain(
        [inst.bundle_by_name[b] for b in ["1F2B", "1F1B", "2F1B", "2F2B"]]
    )
    chain2 = prefs.PartialOrder.from_chain(
        [inst.bundle_by_name[b] for b in ["1F1B", "1F2B", "2F2B", "2F1B"]]
    )
    ok = inst.orders[0] == chain1 and inst.orders[1] == chain2
    out, _ = mps(inst)
    return _check("dependent-pair-eating", ok and out == assignment_4())


def _dependent_pair_lottery_check() -> ReplayResult:
    inst = dependent_pair()
    report = check_decomposability(inst, assignment_4())
    expost = check_ex_post_efficiency(inst, assignment_4())
    return _check(
        "dependent-pair-indecomposable",
        not report.passed and report.witness is not None and not expost.passed,
    )


def _blank_vs_chain_priority_check() -> ReplayResult:
    inst = blank_vs_chain()
    truth = mrp(inst, MrpExact()).assignment
    half = FractionalAssignment.from_rows([["1/2", "1/2"]] * 2)
    lie_pref = prefs.PartialOrder.from_pairs(2, [(1, 0)])
    lied = mrp(inst.with_preference(0, lie_pref), MrpExact()).assignment
    swapped = FractionalAssignment.from_rows([["0", "1"], ["1", "0"]])
    return _check("blank-vs-chain-priority", truth == half and lied == swapped)


def _blank_vs_chain_transformation_check() -> ReplayResult:
    inst = blank_vs_chain()
    truth = mrp(inst, MrpExact()).assignment
    lie_pref = prefs.PartialOrder.from_pairs(2, [(1, 0)])
    ok_pivot2, z = prefs.is_uit(inst.orders[0], lie_pref, 1, truth.row(0))
    not_pivot1, _ = prefs.is_uit(inst.orders[0], lie_pref, 0, truth.row(0))
    return _check(
        "blank-vs-chain-transformation",
        ok_pivot2 and z == frozenset() and not not_pivot1,
        "valid at the reported pivot with empty removal set",
    )


def _blank_vs_chain_invariance_check() -> ReplayResult:
    inst = blank_vs_chain()
    sp = check_strategyproofness(
        "mrp", inst, spaces.LinearOrderMisreports(), "sd", tiebreaks=[None]
    )
    lie_pref = prefs.PartialOrder.from_pairs(2, [(1, 0)])
    ui = check_upper_invariance(
        "mrp", inst, spaces.ExplicitTransforms(((0, lie_pref, 1),)), tiebreaks=[None]
    )
    ui_mps = check_upper_invariance(
        "mps", inst, spaces.ExplicitTransforms(((0, lie_pref, 1),)), tiebreaks=[None]
    )
    return _check(
        "blank-vs-chain-invariance-failures",
        not sp.passed and not ui.passed and not ui_mps.passed,
    )


def _worst_first_eating_check() -> ReplayResult:
    inst = blank_vs_chain()
    tb = [[1, 0], [0, 1]]  # agent 1 sorted worst-first, agent 2 canonical
    out, _ = mps(inst, tb)
    swapped = FractionalAssignment.from_rows([["0", "1"], ["1", "0"]])
    of = check_ordinal_fairness(inst, out)
    ef = check_envy(inst, out, "strong")
    return _check(
        "worst-first-eating-unfair", out == swapped and not of.passed and not ef.passed
    )


def _three_chains_dictatorship_check() -> ReplayResult:
    inst = three_chains()
    out = mgd(inst)
    want = FractionalAssignment.from_rows([[1, 0, 0], [0, 0, 1], [0, 1, 0]])
    weak = check_envy(inst, out, "weak")
    of = check_ordinal_fairness(inst, out)
    bn = inst.bundle_by_name
    of_at = (
        not of.passed
        and of.witness.bundle == bn["1F"]
        and of.witness.agent == 0
        and of.witness.other == 1
    )
    return _check("three-chains-dictatorship", out == want and not weak.passed and of_at)


def _three_chains_manipulation_check() -> ReplayResult:
    inst = three_chains()
    sp = check_strategyproofness(
        "mgd", inst, spaces.LinearOrderMisreports(), "weak", tiebreaks=[None]
    )
    if sp.passed:
        return _check("three-chains-manipulation", False)
    w = sp.witness
    gained = w.manipulated.row(w.agent)
    ok = w.agent == 2 and gained == (F(1, 2), F(1, 2), F(0))
    ui = check_upper_invariance(
        "mgd",
        inst,
        spaces.ExplicitTransforms(((2, inst.preferences[0], inst.bundle_by_name["2F"]),)),
        tiebreaks=[None],
    )
    return _check("three-chains-manipulation", ok and not ui.passed)


def _opposed_trio_check() -> ReplayResult:
    inst = opposed_trio()
    uniform = assignment_5()
    better = assignment_6()
    envy = check_envy(inst, uniform, "strong")
    eff = check_sd_efficiency(inst, uniform)
    dominates = all(
        sd_compare(inst.orders[j], better.row(j), uniform.row(j)).p_dominates_q
        for j in range(3)
    )
    return _check(
        "opposed-trio-envy-vs-efficiency",
        envy.passed and not eff.passed and dominates,
    )


def _improvable_pairs_check() -> ReplayResult:
    inst = mixed_pair()
    bn = inst.bundle_by_name
    pairs = {(t.better, t.worse) for t in improvable_tuples(inst, assignment_3())}
    want = {
        (bn["1F1B"], bn["1F2B"]),
        (bn["1F1B"], bn["2F1B"]),
        (bn["1F2B"], bn["2F1B"]),
        (bn["2F2B"], bn["2F1B"]),
    }
    acyclic = _pair_relation_acyclic(pairs)
    cycle = find_generalized_cycle(inst, assignment_3())
    return _check(
        "improvable-pairs-cycle",
        pairs == want and acyclic and cycle is not None,
        "pair relation acyclic yet a generalized cycle exists",
    )


def _pair_relation_acyclic(pairs: set[tuple[int, int]]) -> bool:
    nodes = {a for a, _ in pairs} | {b for _, b in pairs}
    succ = {n: {b for a, b in pairs if a == n} for n in nodes}
    seen: set[int] = set()
    while len(seen) < len(nodes):
        progress = False
        for n in nodes:
            if n not in seen and succ[n] <= seen:
                seen.add(n)
                progress = True
        if not progress:
            return False
    return True


def _ordinal_fairness_gap_check() -> ReplayResult:
    inst = chain_twins()
    half = F(1, 2)
    bn = inst.bundle_by_name
    P = FractionalAssignment.from_rows(
        [
            [
                {bn["1F2B"]: half, bn["2F1B"]: half}.get(x, F(0))
                for x in range(4)
            ]
        ]
        * 2
    )
    fair = check_ordinal_fairness(inst, P)
    eating, _ = mps(inst)
    return _check(
        "ordinal-fairness-gap",
        fair.passed and P != eating,
    )


def _solo_sanity() -> ReplayResult:
    inst = solo()
    one = FractionalAssignment.from_rows([[1]])
    ok = (
        mrp(inst, MrpExact()).assignment == one
        and mps(inst)[0] == one
        and mgd(inst) == one
    )
    return _check("solo-instance", ok)


REPLAY_CHECKS: tuple[tuple[str, Callable[[], ReplayResult]], ...] = (
    ("induced-order-linear-chain", _induced_order_check),
    ("bottom-bundle-preference-graph", _preference_graph_check),
    ("upper-contour-sets", _upper_contour_check),
    ("dominance-table", _dominance_table_check),
    ("two-topological-sorts", _topological_sorts_check),
    ("eating-two-sorts", _eating_two_sorts_check),
    ("priority-exact-average", _priority_exact_check),
    ("group-sharing-two-sorts", _group_sharing_check),
    ("group-sharing-lottery", _group_lottery_check),
    ("dependent-pair-eating", _dependent_pair_eating_check),
    ("dependent-pair-indecomposable", _dependent_pair_lottery_check),
    ("blank-vs-chain-priority", _blank_vs_chain_priority_check),
    ("blank-vs-chain-transformation", _blank_vs_chain_transformation_check),
    ("blank-vs-chain-invariance-failures", _blank_vs_chain_invariance_check),
    ("worst-first-eating-unfair", _worst_first_eating_check),
    ("three-chains-dictatorship", _three_chains_dictatorship_check),
    ("three-chains-manipulation", _three_chains_manipulation_check),
    ("opposed-trio-envy-vs-efficiency", _opposed_trio_check),
    ("improvable-pairs-cycle", _improvable_pairs_check),
    ("ordinal-fairness-gap", _ordinal_fairness_gap_check),
    ("solo-instance", _solo_sanity),
)


def replay_all() -> list[ReplayResult]:
    out = []
    for name, fn in REPLAY_CHECKS:
        result = fn()
        out.append(ReplayResult(name, result.passed, result.detail))
    return out


def fixture_names() -> list[str]:
    return [name for name, _ in REPLAY_CHECKS]
