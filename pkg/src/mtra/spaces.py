"""Preference spaces: enumerations, misreport spaces, transform sources,
and random profile generation for property sweeps.

Exhaustive spaces carry explicit size guards; anything bigger must be
probed through an explicit or sampled space, and every space exposes a
``describe()`` string so property reports can record what was actually
checked.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from . import preferences as prefs
from .errors import MisreportSpaceTooLarge
from .model import FractionalAssignment, Instance, Preference, TypeDef

ENUMERATION_LIMIT = 200_000


@lru_cache(maxsize=64)
def all_linear_orders(m: int) -> tuple[prefs.PartialOrder, ...]:
    return tuple(
        prefs.PartialOrder.from_chain(perm)
        for perm in itertools.permutations(range(m))
    )


@lru_cache(maxsize=16)
def all_partial_orders(m: int) -> tuple[prefs.PartialOrder, ...]:
    """Every labeled strict partial order on m elements (m <= 4)."""
    if m > 4:
        raise MisreportSpaceTooLarge(f"cannot enumerate posets on {m} bundles")
    pairs = [(a, b) for a in range(m) for b in range(m) if a != b]
    out = []
    for mask in range(1 << len(pairs)):
        chosen = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        rel = [0] * m
        for better, worse in chosen:
            rel[worse] |= 1 << better
        closed = _close(list(rel), m)
        if closed is None:
            continue
        if closed == rel:  # count each poset once: keep the closed subsets
            out.append(prefs.PartialOrder(m, tuple(rel)))
    return tuple(out)


def _close(above: list[int], m: int) -> list[int] | None:
    changed = True
    while changed:
        changed = False
        for x in range(m):
            acc = above[x]
            extra = 0
            rest = acc
            while rest:
                y = (rest & -rest).bit_length() - 1
                rest &= rest - 1
                extra |= above[y]
            if extra & ~acc:
                above[x] = acc | extra
                changed = True
    for x in range(m):
        if above[x] & (1 << x):
            return None
    return above


@lru_cache(maxsize=64)
def acyclic_dependency_graphs(p: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All acyclic parent assignments over p types (p <= 3)."""
    if p > 3:
        raise MisreportSpaceTooLarge(f"cannot enumerate dependency graphs on {p} types")
    edges = [(a, b) for a in range(p) for b in range(p) if a != b]
    out = []
    for mask in range(1 << len(edges)):
        chosen = [edges[i] for i in range(len(edges)) if mask >> i & 1]
        parents = tuple(
            tuple(sorted(a for a, b in chosen if b == t)) for t in range(p)
        )
        if _graph_acyclic(parents, p):
            out.append(parents)
    return tuple(out)


def _graph_acyclic(parents: Sequence[Sequence[int]], p: int) -> bool:
    placed: set[int] = set()
    remaining = set(range(p))
    while remaining:
        ready = [t for t in remaining if set(parents[t]) <= placed]
        if not ready:
            return False
        placed.update(ready)
        remaining.difference_update(ready)
    return True


def count_cpnets(sizes: Sequence[int], parents: Sequence[Sequence[int]]) -> int:
    total = 1
    for i, size in enumerate(sizes):
        rows = 1
        for q in parents[i]:
            rows *= sizes[q]
        orders = 1
        for k in range(2, size + 1):
            orders *= k
        total *= orders**rows
    return total


def enumerate_cpnets(
    sizes: tuple[int, ...], parents: tuple[tuple[int, ...], ...]
) -> Iterator[prefs.CPNet]:
    """All CP-nets over a fixed dependency graph."""
    if count_cpnets(sizes, parents) > ENUMERATION_LIMIT:
        raise MisreportSpaceTooLarge(
            f"{count_cpnets(sizes, parents)} CP-nets over graph {parents}"
        )
    per_type: list[list[tuple]] = []
    for i, size in enumerate(sizes):
        keys = list(itertools.product(*(range(sizes[q]) for q in parents[i])))
        orders = list(itertools.permutations(range(size)))
        rows = [
            tuple(zip(keys, combo))
            for combo in itertools.product(orders, repeat=len(keys))
        ]
        per_type.append(rows)
    for combo in itertools.product(*per_type):
        yield prefs.CPNet(sizes, parents, tuple(combo))


@lru_cache(maxsize=32)
def all_cpnets(sizes: tuple[int, ...]) -> tuple[prefs.CPNet, ...]:
    """All CP-nets over all acyclic dependency graphs."""
    out: list[prefs.CPNet] = []
    for parents in acyclic_dependency_graphs(len(sizes)):
        out.extend(enumerate_cpnets(sizes, parents))
    return tuple(out)


@lru_cache(maxsize=32)
def all_independent_cpnets(sizes: tuple[int, ...]) -> tuple[prefs.CPNet, ...]:
    per_type = [list(itertools.permutations(range(s))) for s in sizes]
    return tuple(
        prefs.CPNet.independent(combo) for combo in itertools.product(*per_type)
    )


@lru_cache(maxsize=32)
def cpnet_order_representatives(
    sizes: tuple[int, ...],
) -> tuple[tuple[prefs.PartialOrder, prefs.CPNet], ...]:
    """One representative CP-net per distinct induced order."""
    by_order: dict[prefs.PartialOrder, prefs.CPNet] = {}
    for net in all_cpnets(sizes):
        order = prefs.induce_order(net)
        by_order.setdefault(order, net)
    return tuple(by_order.items())


# -- misreport spaces ------------------------------------------------------


class MisreportSpace:
    """Iterable of alternative reports for one agent."""

    def for_agent(self, instance: Instance, agent: int) -> Iterable[Preference]:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class LinearOrderMisreports(MisreportSpace):
    """Every linear order over the bundles; exact only for tiny universes."""

    limit: int = 4

    def for_agent(self, instance: Instance, agent: int) -> Iterable[Preference]:
        if instance.m > self.limit:
            raise MisreportSpaceTooLarge(
                f"{instance.m}! linear orders exceed the exhaustive guard"
            )
        return all_linear_orders(instance.m)

    def describe(self) -> str:
        return "all linear orders over bundles"


@dataclass(frozen=True)
class PartialOrderMisreports(MisreportSpace):
    def for_agent(self, instance: Instance, agent: int) -> Iterable[Preference]:
        return all_partial_orders(instance.m)

    def describe(self) -> str:
        return "all partial orders over bundles"


@dataclass(frozen=True)
class CpNetMisreports(MisreportSpace):
    """All CP-nets over a fixed dependency graph.

    ``graph`` is "own" (the agent's declared graph), "all" (every acyclic
    graph), or an explicit parents tuple.
    """

    graph: object = "own"

    def for_agent(self, instance: Instance, agent: int) -> Iterable[Preference]:
        if self.graph == "all":
            return all_cpnets(instance.sizes)
        if self.graph == "own":
            net = instance.cpnet(agent)
            if net is None:
                raise MisreportSpaceTooLarge(
                    f"agent {agent} has no CP-net to take a dependency graph from"
                )
            parents = net.parents
        else:
            parents = tuple(tuple(g) for g in self.graph)  # type: ignore[arg-type]
        return tuple(enumerate_cpnets(instance.sizes, parents))

    def describe(self) -> str:
        return f"CP-nets over dependency graph {self.graph!r}"


@dataclass(frozen=True)
class IndependentCpNetMisreports(MisreportSpace):
    def for_agent(self, instance: Instance, agent: int) -> Iterable[Preference]:
        return all_independent_cpnets(instance.sizes)

    def describe(self) -> str:
        return "all independent CP-nets"


@dataclass(frozen=True)
class ExplicitMisreports(MisreportSpace):
    """A fixed list of reports, the escape hatch for large universes."""

    reports: tuple[Preference, ...]

    def for_agent(self, instance: Instance, agent: int) -> Iterable[Preference]:
        return self.reports

    def describe(self) -> str:
        return f"explicit list of {len(self.reports)} reports"


@dataclass(frozen=True)
class SampledLinearOrderMisreports(MisreportSpace):
    """Seed-deterministic sample of linear orders over the bundles."""

    samples: int
    seed: int = 0

    def for_agent(self, instance: Instance, agent: int) -> Iterable[Preference]:
        rng = random.Random(f"{self.seed}:{instance.m}:{agent}")
        out = []
        for _ in range(self.samples):
            perm = list(range(instance.m))
            rng.shuffle(perm)
            out.append(prefs.PartialOrder.from_chain(perm))
        return tuple(out)

    def describe(self) -> str:
        return f"{self.samples} sampled linear orders (seed {self.seed})"


# -- upper-invariance transform sources ------------------------------------


class TransformSource:
    """Yields candidate (agent, preference, pivot) transformations.

    Candidates are *not* assumed valid; the invariance checker validates
    each against the formal definition before using it.
    """

    def candidates(
        self, instance: Instance, assignment: FractionalAssignment
    ) -> Iterator[tuple[int, Preference, int]]:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ExplicitTransforms(TransformSource):
    items: tuple[tuple[int, Preference, int], ...]

    def candidates(self, instance, assignment):
        yield from self.items

    def describe(self) -> str:
        return f"explicit list of {len(self.items)} transformations"


@dataclass(frozen=True)
class DeletionTransforms(TransformSource):
    """Delete up to ``max_removed`` zero-share bundles from the relation.

    Dropping every pair that involves a removed bundle restricts the
    relation, which stays transitive, so the construction never invents
    relations the original order did not have.
    """

    max_removed: int = 2

    def candidates(self, instance, assignment):
        for j in range(instance.n):
            order = instance.orders[j]
            row = assignment.row(j)
            zero = [y for y in range(instance.m) if row[y] == 0]
            for size in range(1, self.max_removed + 1):
                for z in itertools.combinations(zero, size):
                    new = order.without_bundles(z)
                    if new == order:
                        continue
                    for pivot in range(instance.m):
                        if pivot in z:
                            continue
                        yield j, new, pivot

    def describe(self) -> str:
        return f"deletion transforms, at most {self.max_removed} bundles removed"


@dataclass(frozen=True)
class CpNetTransforms(TransformSource):
    """Candidate CP-net reports over every acyclic dependency graph,
    one representative per distinct induced order."""

    def candidates(self, instance, assignment):
        reps = cpnet_order_representatives(instance.sizes)
        for j in range(instance.n):
            truth = instance.orders[j]
            for order, net in reps:
                if order == truth:
                    continue
                for pivot in range(instance.m):
                    yield j, net, pivot

    def describe(self) -> str:
        return "CP-net transformations over all acyclic dependency graphs"


# -- random profiles -------------------------------------------------------

_TYPE_LETTERS = "FBCDE"


def square_types(n: int, p: int) -> tuple[TypeDef, ...]:
    """Default naming scheme: items 1F..nF of type F, 1B..nB of type B, .."""
    return tuple(
        TypeDef(_TYPE_LETTERS[t], tuple(f"{i + 1}{_TYPE_LETTERS[t]}" for i in range(n)))
        for t in range(p)
    )


def random_partial_order(rng: random.Random, m: int) -> prefs.PartialOrder:
    """Random subrelation of a random linear order, transitively closed."""
    perm = list(range(m))
    rng.shuffle(perm)
    density = rng.random()
    pairs = []
    for a in range(m):
        for b in range(a + 1, m):
            if rng.random() < density:
                pairs.append((perm[a], perm[b]))
    return prefs.PartialOrder.from_pairs(m, pairs)


def random_cpnet(
    rng: random.Random, sizes: Sequence[int], independent: bool = False
) -> prefs.CPNet:
    p = len(sizes)
    if independent:
        parents: tuple[tuple[int, ...], ...] = tuple(() for _ in range(p))
    else:
        parents = rng.choice(acyclic_dependency_graphs(p))
    tables = []
    for i in range(p):
        keys = itertools.product(*(range(sizes[q]) for q in parents[i]))
        rows = []
        for key in keys:
            order = list(range(sizes[i]))
            rng.shuffle(order)
            rows.append((key, tuple(order)))
        tables.append(tuple(sorted(rows)))
    return prefs.CPNet(tuple(sizes), parents, tuple(tables))


def random_profile(
    rng: random.Random, n: int, p: int, kind: str
) -> Instance:
    """kind: "general" | "cpnet" | "independent"."""
    types = square_types(n, p)
    m = n**p
    preferences: list[Preference] = []
    for _ in range(n):
        if kind == "general":
            preferences.append(random_partial_order(rng, m))
        elif kind == "cpnet":
            preferences.append(random_cpnet(rng, (n,) * p))
        elif kind == "independent":
            preferences.append(random_cpnet(rng, (n,) * p, independent=True))
        else:
            raise ValueError(f"unknown profile kind {kind!r}")
    # occasionally force a duplicated preference so equal-treatment bites
    if n >= 2 and rng.random() < 0.3:
        j = rng.randrange(n - 1)
        preferences[j + 1] = preferences[j]
    return Instance(types, tuple(preferences))


def sweep_tiebreaks(m: int) -> tuple[object, ...]:
    """Default tie-break set: canonical order plus its reverse."""
    return (None, tuple(reversed(range(m))))
