"""The three allocation mechanisms and their shared machinery.

All three operate on deterministic topological sorts of the agents'
partial orders, so every result is a pure function of
(instance, tiebreak[, seed]).  Tie-breaks matter: different sorts of the
same partial order can change the output, so each entry point accepts
``tiebreak`` as None (canonical bundle order), a single bundle sequence
shared by all agents, or one sequence per agent.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import preferences as prefs
from .errors import DimensionMismatch, TooManyAgentsForExact
from .model import (
    ONE,
    ZERO,
    DiscreteAssignment,
    FractionalAssignment,
    Instance,
    Lottery,
)

EXACT_AGENT_LIMIT = 8

Tiebreak = Sequence[int] | Sequence[Sequence[int]] | None


def resolve_sorts(instance: Instance, tiebreak: Tiebreak = None) -> tuple[tuple[int, ...], ...]:
    """Per-agent linear orders used by every mechanism."""
    breaks = _per_agent_tiebreaks(instance, tiebreak)
    return tuple(
        prefs.topological_sort(order, tb)
        for order, tb in zip(instance.orders, breaks)
    )


def _per_agent_tiebreaks(instance: Instance, tiebreak: Tiebreak) -> list[Sequence[int]]:
    canonical = tuple(range(instance.m))
    if tiebreak is None:
        return [canonical] * instance.n
    first = list(tiebreak)[0] if len(tiebreak) else None
    if isinstance(first, int) or first is None:
        if len(tiebreak) != instance.m:
            raise DimensionMismatch("tiebreak must rank every bundle")
        return [tuple(tiebreak)] * instance.n  # type: ignore[arg-type]
    if len(tiebreak) != instance.n:
        raise DimensionMismatch("per-agent tiebreak list must cover every agent")
    return [tuple(tb) for tb in tiebreak]  # type: ignore[union-attr]


def serial_dictatorship(
    instance: Instance,
    sorts: Sequence[Sequence[int]],
    priority: Sequence[int],
) -> DiscreteAssignment:
    """Agents pick their first available bundle in priority order."""
    supply = [1] * (instance.n * instance.p)
    chosen: dict[int, int] = {}
    for j in priority:
        x = prefs.ext(sorts[j], instance.bundle_items, supply)
        chosen[j] = x
        for o in instance.bundle_items[x]:
            supply[o] -= 1
    return DiscreteAssignment(tuple(chosen[j] for j in range(instance.n)))


# -- MRP -----------------------------------------------------------------


@dataclass(frozen=True)
class MrpSingle:
    """Run one fixed priority order."""

    priority: tuple[int, ...]


@dataclass(frozen=True)
class MrpExact:
    """Average over all n! priority orders (n <= 8)."""


@dataclass(frozen=True)
class MrpMonteCarlo:
    """Empirical average over k sampled priority orders."""

    samples: int
    seed: int = 0


MrpMode = MrpSingle | MrpExact | MrpMonteCarlo


@dataclass(frozen=True)
class MrpResult:
    assignment: FractionalAssignment
    lottery: Lottery | None
    mode: MrpMode


def mrp(instance: Instance, mode: MrpMode = MrpExact(), tiebreak: Tiebreak = None) -> MrpResult:
    """Random priority over topological sorts.

    Exact mode enumerates priority orders lexicographically and returns
    the uniform lottery over the serial-dictatorship outcomes as the
    decomposition witness.
    """
    sorts = resolve_sorts(instance, tiebreak)
    n = instance.n
    if isinstance(mode, MrpSingle):
        disc = serial_dictatorship(instance, sorts, mode.priority)
        return MrpResult(_matrix_from_discrete(instance, disc), _point_lottery(disc), mode)
    if isinstance(mode, MrpExact):
        if n > EXACT_AGENT_LIMIT:
            raise TooManyAgentsForExact(
                f"exact expectation enumerates {n}! priority orders; limit is {EXACT_AGENT_LIMIT}"
            )
        counts = [[0] * instance.m for _ in range(n)]
        outcome_weight: dict[tuple[int, ...], int] = {}
        total = 0
        for priority in itertools.permutations(range(n)):
            disc = serial_dictatorship(instance, sorts, priority)
            outcome_weight[disc.bundles] = outcome_weight.get(disc.bundles, 0) + 1
            for j, x in enumerate(disc.bundles):
                counts[j][x] += 1
            total += 1
        rows = tuple(
            tuple(Fraction(c, total) for c in row) for row in counts
        )
        lottery = Lottery(
            tuple(
                (Fraction(w, total), DiscreteAssignment(b))
                for b, w in outcome_weight.items()
            )
        )
        return MrpResult(FractionalAssignment(rows), lottery, mode)
    if isinstance(mode, MrpMonteCarlo):
        rng = random.Random(mode.seed)
        counts = [[0] * instance.m for _ in range(n)]
        for _ in range(mode.samples):
            priority = list(range(n))
            rng.shuffle(priority)
            disc = serial_dictatorship(instance, sorts, priority)
            for j, x in enumerate(disc.bundles):
                counts[j][x] += 1
        rows = tuple(
            tuple(Fraction(c, mode.samples) for c in row) for row in counts
        )
        return MrpResult(FractionalAssignment(rows), None, mode)
    raise TypeError(f"unknown MRP mode {mode!r}")


def _matrix_from_discrete(instance: Instance, disc: DiscreteAssignment) -> FractionalAssignment:
    rows = []
    for x in disc.bundles:
        row = [ZERO] * instance.m
        row[x] = ONE
        rows.append(tuple(row))
    return FractionalAssignment(tuple(rows))


def _point_lottery(disc: DiscreteAssignment) -> Lottery:
    return Lottery(((ONE, disc),))


# -- MPS -----------------------------------------------------------------


@dataclass(frozen=True)
class MpsRound:
    start: Fraction
    end: Fraction
    eaten: tuple[int, ...]  # bundle per agent
    exhausted: tuple[int, ...]  # flat item ids


@dataclass(frozen=True)
class MpsTrace:
    rounds: tuple[MpsRound, ...]

    def exhaustion_time(self, item: int) -> Fraction:
        for r in self.rounds:
            if item in r.exhausted:
                return r.end
        raise KeyError(item)


def mps(instance: Instance, tiebreak: Tiebreak = None) -> tuple[FractionalAssignment, MpsTrace]:
    """Simultaneous eating at unit rate.

    Every round each agent consumes the first available bundle of her
    sort; the round length is the smallest supply/consumers ratio among
    the items actually being consumed, and the whole argmin set is
    removed at once.  Items nobody is eating impose no bound.
    """
    sorts = resolve_sorts(instance, tiebreak)
    n, p = instance.n, instance.p
    supply: list[Fraction] = [ONE] * (n * p)
    alive = set(range(n * p))
    rows = [[ZERO] * instance.m for _ in range(n)]
    rounds: list[MpsRound] = []
    clock = ZERO
    while alive:
        # an item's supply hits zero exactly when it leaves `alive`
        eaten = tuple(
            prefs.ext(sorts[j], instance.bundle_items, supply) for j in range(n)
        )
        consumers = [0] * (n * p)
        for x in eaten:
            for o in instance.bundle_items[x]:
                consumers[o] += 1
        step = min(
            (supply[o] / consumers[o] for o in alive if consumers[o]),
            default=None,
        )
        assert step is not None and step > 0, "every agent eats until the clock hits 1"
        for j, x in enumerate(eaten):
            rows[j][x] += step
        exhausted = []
        for o in list(alive):
            if consumers[o]:
                supply[o] -= step * consumers[o]
                if supply[o] == 0:
                    exhausted.append(o)
                    alive.remove(o)
        assert exhausted, "each round must exhaust at least one item"
        clock += step
        rounds.append(MpsRound(clock - step, clock, eaten, tuple(exhausted)))
        # conservation: per type, remaining supply equals n * (1 - clock)
        for t in range(p):
            left = sum(
                (supply[instance.item_id(t, i)] for i in range(n) if instance.item_id(t, i) in alive),
                ZERO,
            )
            assert left == n * (1 - clock)
    assert clock == 1
    return FractionalAssignment(tuple(tuple(r) for r in rows)), MpsTrace(tuple(rounds))


# -- MGD -----------------------------------------------------------------


def _groups(sorts: Sequence[Sequence[int]]) -> dict[tuple[int, ...], tuple[int, ...]]:
    """Agents keyed by identical linear order (the literal Group(j, >'))."""
    groups: dict[tuple[int, ...], list[int]] = {}
    for j, s in enumerate(sorts):
        groups.setdefault(tuple(s), []).append(j)
    return {k: tuple(v) for k, v in groups.items()}


def mgd(instance: Instance, tiebreak: Tiebreak = None) -> FractionalAssignment:
    """General dictatorship: each round agent j shares her first available
    bundle equally with everyone whose sort equals hers, then its items
    are removed."""
    sorts = resolve_sorts(instance, tiebreak)
    n = instance.n
    groups = _groups(sorts)
    supply = [1] * (n * instance.p)
    rows = [[ZERO] * instance.m for _ in range(n)]
    for j in range(n):
        top = prefs.ext(sorts[j], instance.bundle_items, supply)
        group = groups[tuple(sorts[j])]
        share = Fraction(1, len(group))
        for member in group:
            assert rows[member][top] == 0, "a group never revisits a bundle"
            rows[member][top] = share
        for o in instance.bundle_items[top]:
            supply[o] -= 1
    return FractionalAssignment(tuple(tuple(r) for r in rows))


def mgd_decompose(instance: Instance, tiebreak: Tiebreak = None) -> Lottery:
    """Lottery witness for MGD: rotate members inside each equal-sort
    group through the group's priority positions, lcm-many times, and
    average the serial dictatorship outcomes uniformly."""
    sorts = resolve_sorts(instance, tiebreak)
    n = instance.n
    groups = _groups(sorts)
    group_list = list(groups.values())
    k = math.lcm(*(len(g) for g in group_list))
    outcome_weight: dict[tuple[int, ...], int] = {}
    for u in range(1, k + 1):
        priority = [0] * n
        for members in group_list:
            size = len(members)
            for m_pos, agent in enumerate(members, start=1):
                w = ((m_pos + u - 2) % size) + 1
                # the slot originally held by `agent` is taken by the
                # w-th member of the same group
                priority[agent] = members[w - 1]
        order = [priority[j] for j in range(n)]
        disc = serial_dictatorship(instance, sorts, order)
        outcome_weight[disc.bundles] = outcome_weight.get(disc.bundles, 0) + 1
    return Lottery(
        tuple(
            (Fraction(w, k), DiscreteAssignment(b))
            for b, w in outcome_weight.items()
        )
    )
