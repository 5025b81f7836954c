import random
from fractions import Fraction

import pytest

from mtra import fixtures, spaces
from mtra import preferences as prefs
from mtra.axioms import (
    check_decomposability,
    check_envy,
    check_ete,
    check_ex_post_efficiency,
    check_ordinal_fairness,
    check_sd_efficiency,
    check_strategyproofness,
    check_upper_invariance,
    find_generalized_cycle,
    improvable_tuples,
    sd_compare,
    ucs_sums,
)
from mtra.errors import InstanceTooLargeToDecide, MisreportSpaceTooLarge, UniverseMismatch
from mtra.mechanisms import MrpExact, mgd, mgd_decompose, mps, mrp
from mtra.model import (
    DiscreteAssignment,
    FractionalAssignment,
    Instance,
    build_instance,
    from_discrete,
)

F = Fraction


# -- sd_compare ----------------------------------------------------------------


def test_sd_compare_reference_tables(mixed_pair):
    a1, a2, a3 = fixtures.assignment_1(), fixtures.assignment_2(), fixtures.assignment_3()
    for j in range(2):
        assert sd_compare(mixed_pair.orders[j], a2.row(j), a3.row(j)).p_dominates_q
    assert not sd_compare(mixed_pair.orders[1], a2.row(1), a1.row(1)).p_dominates_q
    # for the first agent the reverse comparison is a strict dominance
    assert sd_compare(mixed_pair.orders[0], a1.row(0), a2.row(0)).p_dominates_q
    # for the second agent the two rows are incomparable
    verdict = sd_compare(mixed_pair.orders[1], a1.row(1), a2.row(1))
    assert not verdict.p_dominates_q and not verdict.q_dominates_p


def test_sd_compare_reflexive_and_mutual_implies_equal():
    rng = random.Random(31)
    for _ in range(40):
        m = rng.choice([2, 3, 4])
        order = spaces.random_partial_order(rng, m)
        cuts = sorted(rng.randint(0, 6) for _ in range(m - 1))
        row = tuple(
            F(b - a, 6) for a, b in zip([0] + cuts, cuts + [6])
        )
        verdict = sd_compare(order, row, row)
        assert verdict.p_dominates_q and verdict.q_dominates_p
        other_cuts = sorted(rng.randint(0, 6) for _ in range(m - 1))
        other = tuple(F(b - a, 6) for a, b in zip([0] + other_cuts, other_cuts + [6]))
        both = sd_compare(order, row, other)
        if both.p_dominates_q and both.q_dominates_p:
            assert row == other


def test_sd_compare_transitive():
    rng = random.Random(37)
    for _ in range(60):
        m = rng.choice([2, 3])
        order = spaces.random_partial_order(rng, m)
        rows = []
        for _ in range(3):
            cuts = sorted(rng.randint(0, 4) for _ in range(m - 1))
            rows.append(tuple(F(b - a, 4) for a, b in zip([0] + cuts, cuts + [4])))
        a, b, c = rows
        if (
            sd_compare(order, a, b).p_dominates_q
            and sd_compare(order, b, c).p_dominates_q
        ):
            assert sd_compare(order, a, c).p_dominates_q


def test_sd_compare_universe_mismatch(mixed_pair):
    with pytest.raises(UniverseMismatch):
        sd_compare(mixed_pair.orders[0], (F(1),), (F(1),))


# -- improvable tuples / generalized cycles -------------------------------------


def test_improvable_tuples_third_table(mixed_pair):
    bn = mixed_pair.bundle_by_name
    pairs = {(t.better, t.worse) for t in improvable_tuples(mixed_pair, fixtures.assignment_3())}
    assert pairs == {
        (bn["1F1B"], bn["1F2B"]),
        (bn["1F1B"], bn["2F1B"]),
        (bn["1F2B"], bn["2F1B"]),
        (bn["2F2B"], bn["2F1B"]),
    }


def test_improvable_tuples_global_optimum_empty(mixed_pair):
    bn = mixed_pair.bundle_by_name
    # both agents on their unique tops: agent 1 at 1F1B, agent 2 at 2F2B
    disc = DiscreteAssignment((bn["1F1B"], bn["2F2B"]))
    assert improvable_tuples(mixed_pair, from_discrete(mixed_pair, disc)) == ()


def test_improvable_tuples_first_table(mixed_pair):
    bn = mixed_pair.bundle_by_name
    pairs = {(t.better, t.worse) for t in improvable_tuples(mixed_pair, fixtures.assignment_1())}
    assert pairs == {(bn["1F1B"], bn["1F2B"])}


def test_generalized_cycle_third_table(mixed_pair):
    cycle = find_generalized_cycle(mixed_pair, fixtures.assignment_3())
    assert cycle is not None and len(cycle) == 4


def test_generalized_cycle_absent_for_eating_outputs():
    rng = random.Random(41)
    for _ in range(20):
        inst = spaces.random_profile(rng, rng.choice([2, 3]), rng.choice([1, 2]), "general")
        out, _ = mps(inst)
        assert find_generalized_cycle(inst, out) is None


def test_generalized_cycle_empty_imp(mixed_pair):
    bn = mixed_pair.bundle_by_name
    disc = DiscreteAssignment((bn["1F1B"], bn["2F2B"]))
    assert find_generalized_cycle(mixed_pair, from_discrete(mixed_pair, disc)) is None


# -- efficiency oracles ----------------------------------------------------------


def test_sd_efficiency_fails_for_third_table(mixed_pair):
    report = check_sd_efficiency(mixed_pair, fixtures.assignment_3())
    assert not report.passed
    for j in range(2):
        assert sd_compare(
            mixed_pair.orders[j], report.witness.row(j), fixtures.assignment_3().row(j)
        ).p_dominates_q


def test_sd_efficiency_uniform_opposed_trio(opposed_trio):
    report = check_sd_efficiency(opposed_trio, fixtures.assignment_5())
    assert not report.passed and report.witness == fixtures.assignment_6()


def test_sd_efficiency_serial_outcomes_pass(mixed_pair):
    from mtra.mechanisms import resolve_sorts, serial_dictatorship

    sorts = resolve_sorts(mixed_pair, fixtures.sort_a(mixed_pair))
    for priority in ([0, 1], [1, 0]):
        disc = serial_dictatorship(mixed_pair, sorts, priority)
        assert check_sd_efficiency(mixed_pair, from_discrete(mixed_pair, disc)).passed


def _dominated_per_cell(instance, P):
    # independent formulation: P is dominated iff some single
    # upper-contour slack can be made strictly positive while all stay
    # nonnegative
    from mtra.axioms import ucs_sums
    from mtra.lp import LinearProgram, constraint, solve

    n, m = instance.n, instance.m
    nv = n * m
    base_cons = []
    for j in range(n):
        row = [0] * nv
        for x in range(m):
            row[j * m + x] = 1
        base_cons.append(constraint(row, "=", 1))
    for o in range(n * instance.p):
        row = [0] * nv
        for j in range(n):
            for x, items in enumerate(instance.bundle_items):
                if o in items:
                    row[j * m + x] = 1
        base_cons.append(constraint(row, "=", 1))
    sums = [ucs_sums(instance.orders[j], P.row(j)) for j in range(n)]
    for j in range(n):
        order = instance.orders[j]
        for x in range(m):
            row = [0] * nv
            for y in range(m):
                if order.ucs_mask(x) >> y & 1:
                    row[j * m + y] = 1
            base_cons.append(constraint(row, ">=", sums[j][x]))
    for j in range(n):
        order = instance.orders[j]
        for x in range(m):
            objective = [Fraction(0)] * nv
            for y in range(m):
                if order.ucs_mask(x) >> y & 1:
                    objective[j * m + y] = Fraction(1)
            out = solve(LinearProgram(nv, tuple(base_cons), tuple(objective), nonneg=True))
            assert out.status == "optimal"
            if out.objective_value > sums[j][x]:
                return True
    return False


def test_sd_efficiency_oracle_matches_per_cell_formulation():
    rng = random.Random(79)
    from mtra.model import all_discrete_assignments

    disagreements = 0
    for _ in range(25):
        inst = spaces.random_profile(rng, rng.choice([2, 3]), rng.choice([1, 2]), "general")
        if inst.m > 4:
            continue
        assignments = all_discrete_assignments(inst)
        picks = rng.sample(assignments, k=min(rng.randint(1, 3), len(assignments)))
        rows = [[Fraction(0)] * inst.m for _ in range(inst.n)]
        for disc in picks:
            for j, x in enumerate(disc.bundles):
                rows[j][x] += Fraction(1, len(picks))
        P = FractionalAssignment(tuple(tuple(r) for r in rows))
        aggregate = check_sd_efficiency(inst, P).passed
        per_cell = not _dominated_per_cell(inst, P)
        if aggregate != per_cell:
            disagreements += 1
    assert disagreements == 0


def test_no_cycle_implies_efficient_on_random_lotteries():
    # random mixtures of discrete assignments, screened by the cycle
    # certificate, must pass the complete LP oracle
    rng = random.Random(43)
    from mtra.model import all_discrete_assignments

    checked = 0
    for _ in range(30):
        inst = spaces.random_profile(rng, 2, rng.choice([1, 2]), "general")
        assignments = all_discrete_assignments(inst)
        picks = rng.sample(assignments, k=min(2, len(assignments)))
        weights = [F(1, len(picks))] * len(picks)
        rows = [[F(0)] * inst.m for _ in range(inst.n)]
        for w, disc in zip(weights, picks):
            for j, x in enumerate(disc.bundles):
                rows[j][x] += w
        P = FractionalAssignment(tuple(tuple(r) for r in rows))
        if find_generalized_cycle(inst, P) is None:
            checked += 1
            assert check_sd_efficiency(inst, P).passed
    assert checked > 0


# -- envy / ete / ordinal fairness ------------------------------------------------


def test_envy_eating_output_strong_on_cp_profiles():
    rng = random.Random(47)
    for _ in range(15):
        inst = spaces.random_profile(rng, rng.choice([2, 3]), rng.choice([1, 2]), "cpnet")
        out, _ = mps(inst)
        assert check_envy(inst, out, "strong").passed
        assert check_ordinal_fairness(inst, out).passed


def test_envy_weak_fails_three_chains(three_chains):
    report = check_envy(three_chains, mgd(three_chains), "weak")
    assert not report.passed
    assert (report.witness.agent, report.witness.other) == (1, 0)


def test_envy_uniform_identical_prefs():
    inst = build_instance(
        {
            "agents": 2,
            "types": [{"name": "F", "items": ["1F", "2F"]}],
            "preferences": [{"kind": "partial", "edges": [["1F", "2F"]]}] * 2,
        }
    )
    uniform = FractionalAssignment.from_rows([["1/2", "1/2"]] * 2)
    assert check_envy(inst, uniform, "strong").passed


def test_ete(three_chains):
    twins = Instance(
        three_chains.types, (three_chains.preferences[0], three_chains.preferences[0], three_chains.preferences[2])
    )
    good = mgd(twins)
    assert check_ete(twins, good).passed
    bad = FractionalAssignment.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    report = check_ete(twins, bad)
    assert not report.passed and (report.witness.agent, report.witness.other) == (0, 1)
    # all-distinct preferences: vacuous pass
    assert check_ete(three_chains, bad).passed


def test_ordinal_fairness_three_chains(three_chains):
    report = check_ordinal_fairness(three_chains, mgd(three_chains))
    assert not report.passed
    w = report.witness
    assert (w.bundle, w.agent, w.other) == (three_chains.bundle_by_name["1F"], 0, 1)


def test_ordinal_fairness_alternative_outcome():
    inst = fixtures.chain_twins()
    bn = inst.bundle_by_name
    P = FractionalAssignment.from_rows(
        [
            [0, "1/2", "1/2", 0],
            [0, "1/2", "1/2", 0],
        ]
    )
    assert check_ordinal_fairness(inst, P).passed
    assert P != mps(inst)[0]


# -- decomposability / ex-post -----------------------------------------------------


def test_decomposability_dependent_pair(dependent_pair):
    report = check_decomposability(dependent_pair, fixtures.assignment_4())
    assert not report.passed and report.witness.certificate is not None


def test_decomposability_mrp(mixed_pair):
    result = mrp(mixed_pair, MrpExact(), fixtures.sort_a(mixed_pair))
    report = check_decomposability(mixed_pair, result.assignment)
    assert report.passed
    assert report.witness.expectation(mixed_pair) == result.assignment


def test_decomposability_discrete(mixed_pair):
    bn = mixed_pair.bundle_by_name
    P = from_discrete(mixed_pair, DiscreteAssignment((bn["1F1B"], bn["2F2B"])))
    report = check_decomposability(mixed_pair, P)
    assert report.passed and len(report.witness.entries) == 1


def test_decomposability_at_guard_boundary():
    # four agents, one type: 24 discrete assignments, still decidable
    rng = random.Random(71)
    inst = spaces.random_profile(rng, 4, 1, "general")
    result = mrp(inst, MrpExact()).assignment
    assert check_decomposability(inst, result).passed
    assert check_ex_post_efficiency(inst, result).passed


def test_decomposability_guard():
    inst = build_instance(
        {
            "agents": 5,
            "types": [{"name": "F", "items": [f"{i}F" for i in range(1, 6)]}],
            "preferences": [{"kind": "partial", "edges": []}] * 5,
        }
    )
    uniform = FractionalAssignment.from_rows([[F(1, 5)] * 5] * 5)
    with pytest.raises(InstanceTooLargeToDecide):
        check_decomposability(inst, uniform)


def test_ex_post_mrp_passes(mixed_pair):
    result = mrp(mixed_pair, MrpExact(), fixtures.sort_a(mixed_pair))
    assert check_ex_post_efficiency(mixed_pair, result.assignment).passed


def test_ex_post_fails_for_dependent_pair(dependent_pair):
    assert not check_ex_post_efficiency(dependent_pair, fixtures.assignment_4()).passed


def test_ex_post_fails_for_dominated_mixture():
    inst = build_instance(
        {
            "agents": 2,
            "types": [{"name": "F", "items": ["1F", "2F"]}],
            "preferences": [
                {"kind": "partial", "edges": [["1F", "2F"]]},
                {"kind": "partial", "edges": [["2F", "1F"]]},
            ],
        }
    )
    uniform = FractionalAssignment.from_rows([["1/2", "1/2"]] * 2)
    assert check_decomposability(inst, uniform).passed
    assert not check_ex_post_efficiency(inst, uniform).passed


# -- strategyproofness / upper invariance --------------------------------------------


def test_mrp_sd_sp_on_cp_profiles():
    rng = random.Random(53)
    for _ in range(8):
        inst = spaces.random_profile(rng, 2, 2, "cpnet")
        report = check_strategyproofness(
            "mrp", inst, spaces.CpNetMisreports("all"), "sd"
        )
        assert report.passed, report


def test_mrp_sd_sp_fails_blank_vs_chain(blank_vs_chain):
    report = check_strategyproofness(
        "mrp", blank_vs_chain, spaces.LinearOrderMisreports(), "sd", tiebreaks=[None]
    )
    assert not report.passed
    w = report.witness
    assert w.agent == 0
    assert w.manipulated.row(0) == (F(0), F(1))


def test_mgd_weak_sp_fails_three_chains(three_chains):
    report = check_strategyproofness(
        "mgd", three_chains, spaces.LinearOrderMisreports(), "weak", tiebreaks=[None]
    )
    assert not report.passed
    assert report.witness.agent == 2


def test_misreport_space_guard():
    rng = random.Random(59)
    inst = spaces.random_profile(rng, 3, 2, "general")
    with pytest.raises(MisreportSpaceTooLarge):
        check_strategyproofness("mrp", inst, spaces.LinearOrderMisreports(), "weak")


def test_upper_invariance_mps_on_cp_profiles():
    rng = random.Random(61)
    for _ in range(6):
        inst = spaces.random_profile(rng, 2, 2, "cpnet")
        assert check_upper_invariance("mps", inst, spaces.CpNetTransforms()).passed


def test_upper_invariance_fails_blank_vs_chain(blank_vs_chain):
    lie = prefs.PartialOrder.from_pairs(2, [(1, 0)])
    transforms = spaces.ExplicitTransforms(((0, lie, 1),))
    for mech in ("mrp", "mps"):
        assert not check_upper_invariance(mech, blank_vs_chain, transforms, tiebreaks=[None]).passed


def test_upper_invariance_identity_passes(blank_vs_chain):
    transforms = spaces.ExplicitTransforms(((0, blank_vs_chain.preferences[0], 1),))
    assert check_upper_invariance("mrp", blank_vs_chain, transforms, tiebreaks=[None]).passed


def test_deletion_transforms_generate_valid_candidates():
    rng = random.Random(5)
    total = 0
    for _ in range(8):
        inst = spaces.random_profile(rng, rng.choice([2, 3]), rng.choice([1, 2]), "general")
        P, _ = mps(inst)
        for j, new, pivot in spaces.DeletionTransforms().candidates(inst, P):
            ok, _ = prefs.is_uit(inst.orders[j], new, pivot, P.row(j))
            assert ok
            total += 1
    assert total > 0


def test_upper_invariance_mgd_fails_via_deletion(three_chains):
    # dropping a zero-share bundle from the second chain merges its sort
    # with the first agent's, changing the pivot column
    report = check_upper_invariance(
        "mgd", three_chains, spaces.DeletionTransforms(), tiebreaks=[None]
    )
    assert not report.passed
    w = report.witness
    assert w.truthful.entry(w.agent, w.pivot) != w.manipulated.entry(w.agent, w.pivot)


def test_ucs_sums_match_direct_computation(mixed_pair):
    row = fixtures.assignment_1().row(0)
    sums = ucs_sums(mixed_pair.orders[0], row)
    assert sums == (F(1, 2), F(1), F(1), F(1))


def test_mgd_lottery_outcomes_are_efficient():
    rng = random.Random(67)
    for _ in range(10):
        inst = spaces.random_profile(rng, rng.choice([2, 3]), rng.choice([1, 2]), "general")
        for prob, disc in mgd_decompose(inst).entries:
            assert check_sd_efficiency(inst, from_discrete(inst, disc)).passed
