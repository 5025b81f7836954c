"""Verification oracles for the fairness and efficiency axioms.

Every check returns a :class:`PropertyReport`; a failing report carries a
witness that can be re-checked independently of the code path that found
it (a dominating assignment, an envy pair, a manipulation, a Farkas
certificate, ...).  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from . import preferences as prefs
from . import spaces
from .errors import InstanceTooLargeToDecide, UniverseMismatch
from .lp import EQ, GE, LinearProgram, constraint, feasibility, solve
from .mechanisms import MrpExact, Tiebreak, mgd, mps, mrp
from .model import (
    ZERO,
    DiscreteAssignment,
    FractionalAssignment,
    Instance,
    Lottery,
    Preference,
    all_discrete_assignments,
    from_discrete,
    validate_assignment,
)

# -- stochastic dominance --------------------------------------------------


@dataclass(frozen=True)
class SdVerdict:
    """Outcome of comparing two allocation rows under one preference.

    ``slack[x]`` is the upper-contour-sum difference (p minus q) at
    bundle x; ``p_dominates_q`` iff every slack is nonnegative.
    """

    p_dominates_q: bool
    q_dominates_p: bool
    slack: tuple[Fraction, ...]


def ucs_sums(order: prefs.PartialOrder, row: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Per bundle, the total share the row puts on its upper contour set."""
    out = []
    for x in range(order.m):
        mask = order.ucs_mask(x)
        total = ZERO
        y = 0
        while mask:
            if mask & 1:
                total += row[y]
            mask >>= 1
            y += 1
        out.append(total)
    return tuple(out)


def sd_compare(
    order: prefs.PartialOrder, p_row: Sequence[Fraction], q_row: Sequence[Fraction]
) -> SdVerdict:
    """Stochastic dominance: p dominates q iff p's upper-contour share is
    at least q's at every bundle."""
    if len(p_row) != order.m or len(q_row) != order.m:
        raise UniverseMismatch("allocation rows do not match the bundle universe")
    sp = ucs_sums(order, p_row)
    sq = ucs_sums(order, q_row)
    slack = tuple(a - b for a, b in zip(sp, sq))
    return SdVerdict(
        p_dominates_q=all(v >= 0 for v in slack),
        q_dominates_p=all(v <= 0 for v in slack),
        slack=slack,
    )


# -- improvable tuples and generalized cycles --------------------------------


@dataclass(frozen=True)
class ImprovableTuple:
    better: int
    worse: int
    agent: int


def improvable_tuples(instance: Instance, P: FractionalAssignment) -> tuple[ImprovableTuple, ...]:
    """All (x, x̂, j) with x preferred to x̂ by j and j holding share of x̂."""
    out = []
    for j in range(instance.n):
        order = instance.orders[j]
        row = P.row(j)
        for worse in range(instance.m):
            if row[worse] == 0:
                continue
            for better in prefs._bits(order.above[worse]):
                out.append(ImprovableTuple(better, worse, j))
    return tuple(sorted(out, key=lambda t: (t.better, t.worse, t.agent)))


def find_generalized_cycle(
    instance: Instance, P: FractionalAssignment
) -> frozenset[tuple[int, int]] | None:
    """Greatest set of improvable pairs closed under "every left item
    appears on some right side"; None when the only closed set is empty.

    Computed as a pruning fixpoint: repeatedly delete pairs whose left
    bundle holds an item that no remaining right bundle holds.  Pruning
    preserves every closed subset, so the fixpoint is nonempty exactly
    when some generalized cycle exists.
    """
    pairs = {(t.better, t.worse) for t in improvable_tuples(instance, P)}
    while pairs:
        right_items = {
            o for _, worse in pairs for o in instance.bundle_items[worse]
        }
        keep = {
            (better, worse)
            for better, worse in pairs
            if all(o in right_items for o in instance.bundle_items[better])
        }
        if keep == pairs:
            return frozenset(pairs)
        pairs = keep
    return None


# -- property reports --------------------------------------------------------


@dataclass(frozen=True)
class PropertyReport:
    prop: str
    passed: bool
    witness: object = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class EnvyWitness:
    agent: int
    other: int


@dataclass(frozen=True)
class OrdinalFairnessWitness:
    bundle: int
    agent: int
    other: int


@dataclass(frozen=True)
class ManipulationWitness:
    agent: int
    misreport: Preference
    truthful: FractionalAssignment
    manipulated: FractionalAssignment
    tiebreak: object = None


@dataclass(frozen=True)
class InvarianceWitness:
    agent: int
    misreport: Preference
    pivot: int
    truthful: FractionalAssignment
    manipulated: FractionalAssignment
    tiebreak: object = None


@dataclass(frozen=True)
class FarkasWitness:
    """Row multipliers proving an exact linear system infeasible."""

    certificate: tuple[Fraction, ...]


# -- assignment-level axioms --------------------------------------------------


def check_sd_efficiency(instance: Instance, P: FractionalAssignment) -> PropertyReport:
    """No assignment Q != P has weakly larger upper-contour sums everywhere.

    Decided by one aggregate LP over candidate assignments Q that are
    constrained to dominate P, maximizing the total upper-contour slack.
    The optimum exceeds the baseline exactly when a dominating Q != P
    exists: upper-contour sums pin a row down uniquely, so equal sums at
    the optimum force Q = P.
    """
    n, m = instance.n, instance.m
    nv = n * m
    cons = []
    for j in range(n):
        row = [0] * nv
        for x in range(m):
            row[j * m + x] = 1
        cons.append(constraint(row, EQ, 1))
    for o in range(n * instance.p):
        row = [0] * nv
        for j in range(n):
            for x, items in enumerate(instance.bundle_items):
                if o in items:
                    row[j * m + x] = 1
        cons.append(constraint(row, EQ, 1))
    base = ZERO
    depth_coeffs = [ZERO] * nv
    for j in range(n):
        order = instance.orders[j]
        sums = ucs_sums(order, P.row(j))
        for x in range(m):
            row = [0] * nv
            for y in prefs._bits(order.ucs_mask(x)):
                row[j * m + y] = 1
            cons.append(constraint(row, GE, sums[x]))
            base += sums[x]
        for y in range(m):
            depth_coeffs[j * m + y] = Fraction(order.downset_size(y))
    lp = LinearProgram(nv, tuple(cons), tuple(depth_coeffs), nonneg=True)
    out = solve(lp)
    assert out.optimal, "P itself is feasible, so the LP cannot fail"
    assert out.objective_value >= base
    if out.objective_value == base:
        return PropertyReport("sd-efficiency", True)
    rows = tuple(
        tuple(out.witness[j * m + x] for x in range(m)) for j in range(n)
    )
    Q = FractionalAssignment(rows)
    assert validate_assignment(Q, instance) is None
    assert Q != P
    for j in range(n):
        assert sd_compare(instance.orders[j], Q.row(j), P.row(j)).p_dominates_q
    return PropertyReport("sd-efficiency", False, witness=Q)


def check_envy(
    instance: Instance, P: FractionalAssignment, strength: str = "strong"
) -> PropertyReport:
    """strong: everyone sd-prefers her own row to every other row.
    weak: nobody sd-prefers another row unless the rows are equal."""
    name = "sd-envy-freeness" if strength == "strong" else "weak-sd-envy-freeness"
    for j in range(instance.n):
        order = instance.orders[j]
        for k in range(instance.n):
            if j == k:
                continue
            if strength == "strong":
                if not sd_compare(order, P.row(j), P.row(k)).p_dominates_q:
                    return PropertyReport(name, False, witness=EnvyWitness(j, k))
            else:
                verdict = sd_compare(order, P.row(k), P.row(j))
                if verdict.p_dominates_q and P.row(j) != P.row(k):
                    return PropertyReport(name, False, witness=EnvyWitness(j, k))
    return PropertyReport(name, True)


def check_ete(instance: Instance, P: FractionalAssignment) -> PropertyReport:
    """Agents with identical preference relations get identical rows."""
    for j in range(instance.n):
        for k in range(j + 1, instance.n):
            if instance.orders[j] == instance.orders[k] and P.row(j) != P.row(k):
                return PropertyReport(
                    "equal-treatment-of-equals", False, witness=EnvyWitness(j, k)
                )
    return PropertyReport("equal-treatment-of-equals", True)


def check_ordinal_fairness(instance: Instance, P: FractionalAssignment) -> PropertyReport:
    """Wherever an agent holds positive share, her upper-contour sum is
    no larger than anyone else's at the same bundle."""
    sums = [ucs_sums(instance.orders[j], P.row(j)) for j in range(instance.n)]
    for j in range(instance.n):
        row = P.row(j)
        for x in range(instance.m):
            if row[x] == 0:
                continue
            for k in range(instance.n):
                if k != j and sums[j][x] > sums[k][x]:
                    return PropertyReport(
                        "ordinal-fairness",
                        False,
                        witness=OrdinalFairnessWitness(x, j, k),
                    )
    return PropertyReport("ordinal-fairness", True)


DECOMPOSITION_AGENT_LIMIT = 4
DECOMPOSITION_TYPE_LIMIT = 2


def _decomposition_guard(instance: Instance) -> None:
    if instance.n > DECOMPOSITION_AGENT_LIMIT or instance.p > DECOMPOSITION_TYPE_LIMIT:
        raise InstanceTooLargeToDecide(
            f"cannot enumerate (n!)^p discrete assignments for n={instance.n}, p={instance.p}"
        )


def _lottery_lp(
    instance: Instance,
    P: FractionalAssignment,
    assignments: Sequence[DiscreteAssignment],
) -> tuple[LinearProgram, Sequence[DiscreteAssignment]]:
    nv = len(assignments)
    cons = []
    for j in range(instance.n):
        for x in range(instance.m):
            row = [1 if a.bundles[j] == x else 0 for a in assignments]
            cons.append(constraint(row, EQ, P.entry(j, x)))
    cons.append(constraint([1] * nv, EQ, 1))
    return LinearProgram(nv, tuple(cons), None, nonneg=True), assignments


def _lottery_from_witness(
    witness: Sequence[Fraction], assignments: Sequence[DiscreteAssignment]
) -> Lottery:
    entries = tuple(
        (w, a) for w, a in zip(witness, assignments) if w > 0
    )
    return Lottery(entries)


def check_decomposability(instance: Instance, P: FractionalAssignment) -> PropertyReport:
    """Is P a mixture of discrete assignments?  Exact LP feasibility over
    all (n!)^p of them; a pass carries the lottery, a fail the Farkas
    certificate of the matching equations."""
    _decomposition_guard(instance)
    lp, assignments = _lottery_lp(instance, P, all_discrete_assignments(instance))
    out = feasibility(lp)
    if out.optimal:
        lottery = _lottery_from_witness(out.witness, assignments)
        assert lottery.expectation(instance) == P
        return PropertyReport("decomposability", True, witness=lottery)
    return PropertyReport(
        "decomposability", False, witness=FarkasWitness(out.certificate)
    )


def _discrete_sd_efficient(instance: Instance, disc: DiscreteAssignment) -> bool:
    return _discrete_sd_efficient_cached(instance, disc.bundles)


@lru_cache(maxsize=100_000)
def _discrete_sd_efficient_cached(instance: Instance, bundles: tuple[int, ...]) -> bool:
    P = from_discrete(instance, DiscreteAssignment(bundles))
    # absence of a generalized cycle certifies efficiency outright;
    # otherwise fall back to the complete LP oracle
    if find_generalized_cycle(instance, P) is None:
        return True
    return check_sd_efficiency(instance, P).passed


def check_ex_post_efficiency(instance: Instance, P: FractionalAssignment) -> PropertyReport:
    """Is P a mixture of *sd-efficient* discrete assignments?"""
    _decomposition_guard(instance)
    efficient = [
        a for a in all_discrete_assignments(instance) if _discrete_sd_efficient(instance, a)
    ]
    lp, assignments = _lottery_lp(instance, P, efficient)
    out = feasibility(lp)
    if out.optimal:
        lottery = _lottery_from_witness(out.witness, assignments)
        assert lottery.expectation(instance) == P
        return PropertyReport("ex-post-efficiency", True, witness=lottery)
    return PropertyReport(
        "ex-post-efficiency", False, witness=FarkasWitness(out.certificate)
    )


# -- mechanism-level axioms ---------------------------------------------------


def mechanism_callable(mechanism: str) -> Callable[[Instance, Tiebreak], FractionalAssignment]:
    """Exact-expectation evaluation of a mechanism by id."""
    if mechanism == "mrp":
        return lambda inst, tb: mrp(inst, MrpExact(), tb).assignment
    if mechanism == "mps":
        return lambda inst, tb: mps(inst, tb)[0]
    if mechanism == "mgd":
        return lambda inst, tb: mgd(inst, tb)
    raise ValueError(f"unknown mechanism {mechanism!r}")


def _default_tiebreaks(instance: Instance) -> tuple[object, ...]:
    return spaces.sweep_tiebreaks(instance.m)


def _order_of(instance: Instance, pref: Preference) -> prefs.PartialOrder:
    if isinstance(pref, prefs.PartialOrder):
        return pref
    return prefs.induce_order(pref)


def check_strategyproofness(
    mechanism: str,
    instance: Instance,
    misreports: spaces.MisreportSpace,
    strength: str = "sd",
    tiebreaks: Iterable[object] | None = None,
) -> PropertyReport:
    """sd: truth-telling sd-dominates every misreport.
    weak: no misreport sd-dominates truth-telling unless it leaves the
    agent's own row unchanged."""
    name = ("sd" if strength == "sd" else "weak-sd") + "-strategyproofness"
    fn = mechanism_callable(mechanism)
    detail = f"{mechanism} against {misreports.describe()}"
    if tiebreaks is None:
        tiebreaks = _default_tiebreaks(instance)
    for tb in tiebreaks:
        truth = fn(instance, tb)
        for j in range(instance.n):
            order = instance.orders[j]
            seen: dict[prefs.PartialOrder, FractionalAssignment] = {}
            for report in misreports.for_agent(instance, j):
                rep_order = _order_of(instance, report)
                if rep_order == order:
                    continue  # a truthful report cannot manipulate
                lied = seen.get(rep_order)
                if lied is None:
                    lied = fn(instance.with_preference(j, report), tb)
                    seen[rep_order] = lied
                if strength == "sd":
                    if not sd_compare(order, truth.row(j), lied.row(j)).p_dominates_q:
                        return PropertyReport(
                            name,
                            False,
                            witness=ManipulationWitness(j, report, truth, lied, tb),
                            detail=detail,
                        )
                else:
                    verdict = sd_compare(order, lied.row(j), truth.row(j))
                    if verdict.p_dominates_q and lied.row(j) != truth.row(j):
                        return PropertyReport(
                            name,
                            False,
                            witness=ManipulationWitness(j, report, truth, lied, tb),
                            detail=detail,
                        )
    return PropertyReport(name, True, detail=detail)


def check_upper_invariance(
    mechanism: str,
    instance: Instance,
    transforms: spaces.TransformSource,
    tiebreaks: Iterable[object] | None = None,
) -> PropertyReport:
    """The pivot column of the output must survive every valid upper
    invariant transformation of any single agent's preference."""
    fn = mechanism_callable(mechanism)
    detail = f"{mechanism} against {transforms.describe()}"
    if tiebreaks is None:
        tiebreaks = _default_tiebreaks(instance)
    for tb in tiebreaks:
        truth = fn(instance, tb)
        seen: dict[tuple[int, prefs.PartialOrder], FractionalAssignment] = {}
        for j, report, pivot in transforms.candidates(instance, truth):
            old = instance.orders[j]
            new = _order_of(instance, report)
            if new == old:
                continue  # identical order, identical run
            valid, _ = prefs.is_uit(old, new, pivot, truth.row(j))
            if not valid:
                continue
            key = (j, new)
            lied = seen.get(key)
            if lied is None:
                lied = fn(instance.with_preference(j, report), tb)
                seen[key] = lied
            for k in range(instance.n):
                if lied.entry(k, pivot) != truth.entry(k, pivot):
                    return PropertyReport(
                        "upper-invariance",
                        False,
                        witness=InvarianceWitness(j, report, pivot, truth, lied, tb),
                        detail=detail,
                    )
    return PropertyReport("upper-invariance", True, detail=detail)
