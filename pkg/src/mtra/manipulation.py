"""Search for CPT manipulations of the eating mechanism.

With three agents sharing the dependency graph F -> B, the eating
mechanism stops being truthful: an agent can misreport her conditional
B-tables and end up with a share vector that stochastically dominates
truth-telling.  The search below finds such profiles from scratch.

The search space is cut down by symmetry and structure before being
scanned exhaustively per candidate:

* agents 2 and 3 are identical twins (their CPTs coincide);
* item relabeling fixes the manipulator's F-order to 1F>2F>3F and her
  B-row under 1F to 1B>2B>3B (both without loss of generality, since the
  mechanism commutes with item relabeling on CP-net profiles);
* the twins' top F-item is 1F as well, so the early rounds are
  contested (manipulations need contested items to change exhaustion
  times);
* the manipulator misreports only her B-rows, keeping the F-order.

Candidate profiles are visited in a seed-fixed shuffled order; for each,
every B-row misreport is tried.  Every reported hit is re-verified
through the public mechanism and dominance APIs.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from . import preferences as prefs
from .axioms import sd_compare
from .mechanisms import mps
from .model import Instance
from .spaces import square_types

ZERO = Fraction(0)
ONE = Fraction(1)

_ORDERS3 = tuple(itertools.permutations(range(3)))
_IDENT = (0, 1, 2)
_PARENTS = ((), (0,))


def shared_fb_net(f_order: Sequence[int], b_rows: Sequence[Sequence[int]]) -> prefs.CPNet:
    """A 3x3 CP-net with dependency F -> B."""
    return prefs.CPNet(
        (3, 3),
        _PARENTS,
        (
            (((), tuple(f_order)),),
            tuple(((k,), tuple(b_rows[k])) for k in range(3)),
        ),
    )


def _fast_mps_rows(agents: Sequence[tuple[Sequence[int], Sequence[Sequence[int]]]]):
    """Share vectors of the eating mechanism for F->B CP-nets (3 agents).

    A bundle is (f, b); tops are computed straight from the tables, which
    matches the general mechanism on CP-net profiles where the first
    available bundle of any topological sort is the unique best one.
    """
    supply = [ONE] * 6  # items: F0 F1 F2 B0 B1 B2
    rows = [dict() for _ in agents]
    remaining = 6
    while remaining:
        eaten = []
        for f_order, b_rows in agents:
            f = next(i for i in f_order if supply[i] > 0)
            b = next(i for i in b_rows[f] if supply[3 + i] > 0)
            eaten.append((f, b))
        cons = [0] * 6
        for f, b in eaten:
            cons[f] += 1
            cons[3 + b] += 1
        step = min(supply[o] / cons[o] for o in range(6) if cons[o])
        for j, (f, b) in enumerate(eaten):
            key = f * 3 + b
            rows[j][key] = rows[j].get(key, ZERO) + step
        for o in range(6):
            if cons[o]:
                supply[o] -= step * cons[o]
                if supply[o] == 0:
                    remaining -= 1
    return [tuple(r.get(x, ZERO) for x in range(9)) for r in rows]


@dataclass(frozen=True)
class ManipulationHit:
    """A verified profitable CPT misreport under the eating mechanism."""

    instance: Instance
    misreport: prefs.CPNet
    agent: int
    truthful_row: tuple[Fraction, ...]
    manipulated_row: tuple[Fraction, ...]

    @property
    def truthful_shares(self) -> tuple[Fraction, ...]:
        return tuple(sorted((v for v in self.truthful_row if v > 0), reverse=True))

    @property
    def manipulated_shares(self) -> tuple[Fraction, ...]:
        return tuple(sorted((v for v in self.manipulated_row if v > 0), reverse=True))


def _candidate_profiles(seed: int) -> Iterator[tuple[tuple, tuple, tuple]]:
    """(b2, b3, twins) combos in a seed-fixed shuffled order."""
    twins_f = tuple(o for o in _ORDERS3 if o[0] == 0)
    combos = [
        (b2, b3, (f23, bb))
        for b2 in _ORDERS3
        for b3 in _ORDERS3
        for f23 in twins_f
        for bb in itertools.product(_ORDERS3, repeat=3)
    ]
    random.Random(seed).shuffle(combos)
    return iter(combos)


def search_cpt_manipulations(
    max_hits: int = 1,
    require_pattern: tuple[tuple[Fraction, ...], tuple[Fraction, ...]] | None = None,
    seed: int = 2,
    time_budget: float | None = None,
    max_profiles: int | None = None,
) -> list[ManipulationHit]:
    """Scan shared-F->B twin profiles for strict weak-SP violations.

    Stops when ``max_hits`` hits are collected (all matching
    ``require_pattern`` if given: a pair of sorted positive share
    multisets for truth and lie), the time budget runs out, or the
    candidate space is exhausted.  Hits are re-verified with the general
    mechanism before being returned.
    """
    deadline = None if time_budget is None else time.monotonic() + time_budget
    hits: list[ManipulationHit] = []
    scanned = 0
    for b2, b3, (f23, bb) in _candidate_profiles(seed):
        if deadline is not None and time.monotonic() > deadline:
            break
        if max_profiles is not None and scanned >= max_profiles:
            break
        scanned += 1
        truth_tables = (_IDENT, (_IDENT, b2, b3))
        twin_tables = (f23, bb)
        rows = _fast_mps_rows((truth_tables, twin_tables, twin_tables))
        truth_row = rows[0]
        net1 = shared_fb_net(*truth_tables)
        order1 = prefs.induce_order(net1)
        ucs_masks = [order1.ucs_mask(x) for x in range(9)]
        truth_sums = _mask_sums(truth_row, ucs_masks)
        for mrows in itertools.product(_ORDERS3, repeat=3):
            if mrows == truth_tables[1]:
                continue
            lie_row = _fast_mps_rows(
                ((_IDENT, mrows), twin_tables, twin_tables)
            )[0]
            if lie_row == truth_row:
                continue
            lie_sums = _mask_sums(lie_row, ucs_masks)
            if all(a >= b for a, b in zip(lie_sums, truth_sums)):
                hit = _verify_hit(truth_tables, twin_tables, mrows)
                if hit is None:
                    continue
                if require_pattern is not None:
                    want_truth, want_lie = require_pattern
                    if (
                        hit.truthful_shares != tuple(sorted(want_truth, reverse=True))
                        or hit.manipulated_shares != tuple(sorted(want_lie, reverse=True))
                    ):
                        continue
                hits.append(hit)
                if len(hits) >= max_hits:
                    return hits
                break
    return hits


def _mask_sums(row: Sequence[Fraction], masks: Sequence[int]) -> list[Fraction]:
    out = []
    for mask in masks:
        total = ZERO
        y = 0
        while mask:
            if mask & 1:
                total += row[y]
            mask >>= 1
            y += 1
        out.append(total)
    return out


def _verify_hit(truth_tables, twin_tables, mrows) -> ManipulationHit | None:
    """Re-run the hit through the public mechanism and dominance APIs."""
    net1 = shared_fb_net(*truth_tables)
    twins = shared_fb_net(*twin_tables)
    mis = shared_fb_net(_IDENT, mrows)
    instance = Instance(square_types(3, 2), (net1, twins, twins))
    truth, _ = mps(instance)
    lied, _ = mps(instance.with_preference(0, mis))
    order1 = instance.orders[0]
    verdict = sd_compare(order1, lied.row(0), truth.row(0))
    if not verdict.p_dominates_q or lied.row(0) == truth.row(0):
        return None
    return ManipulationHit(
        instance=instance,
        misreport=mis,
        agent=0,
        truthful_row=truth.row(0),
        manipulated_row=lied.row(0),
    )


KNOWN_SHARE_PATTERN = (
    (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)),
    (Fraction(1, 3), Fraction(1, 3), Fraction(2, 9), Fraction(1, 9)),
)
