"""Instances, bundles, and fractional/discrete assignments.

An instance is square: ``n`` agents, ``p`` item types with exactly ``n``
items each, one unit of supply per item.  Every agent receives one item
of each type, so the allocation objects live over the ``n**p`` bundles
enumerated by :func:`enumerate_bundles`.

All shares are exact rationals (:class:`fractions.Fraction`); no routine
in this package ever rounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

from . import preferences as prefs
from .errors import (
    DimensionMismatch,
    DuplicateItemName,
    MissingPreference,
    ParseError,
    TypeSizeMismatch,
)

Preference = Union[prefs.PartialOrder, prefs.CPNet]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class TypeDef:
    """One item type: a name and its ordered item names."""

    name: str
    items: tuple[str, ...]


@dataclass(frozen=True)
class Instance:
    """A validated allocation instance.

    ``preferences[j]`` is either a :class:`~mtra.preferences.PartialOrder`
    over the bundle universe or an acyclic :class:`~mtra.preferences.CPNet`
    over the type structure.
    """

    types: tuple[TypeDef, ...]
    preferences: tuple[Preference, ...]

    def __post_init__(self) -> None:
        n = len(self.preferences)
        if n == 0:
            raise MissingPreference("an instance needs at least one agent")
        names: set[str] = set()
        for t in self.types:
            if t.name in names:
                raise DuplicateItemName(f"type name {t.name!r} reused")
            names.add(t.name)
        item_names: set[str] = set()
        for t in self.types:
            if len(t.items) != n:
                raise TypeSizeMismatch(
                    f"type {t.name!r} has {len(t.items)} items for {n} agents"
                )
            for it in t.items:
                if it in item_names:
                    raise DuplicateItemName(f"item name {it!r} reused")
                item_names.add(it)
        for j, pref in enumerate(self.preferences):
            if isinstance(pref, prefs.PartialOrder):
                if pref.m != self.m:
                    raise ParseError(
                        f"agent {j} order ranges over {pref.m} bundles, expected {self.m}"
                    )
            elif isinstance(pref, prefs.CPNet):
                if pref.sizes != self.sizes:
                    raise ParseError(f"agent {j} CP-net does not match the type sizes")
            else:
                raise ParseError(f"agent {j} preference has unsupported type")

    # -- structure -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.preferences)

    @property
    def p(self) -> int:
        return len(self.types)

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(t.items) for t in self.types)

    @cached_property
    def m(self) -> int:
        out = 1
        for s in self.sizes:
            out *= s
        return out

    @cached_property
    def item_names(self) -> tuple[str, ...]:
        """Flat item ids: type-major, declaration order."""
        return tuple(it for t in self.types for it in t.items)

    def item_id(self, type_index: int, item_index: int) -> int:
        return type_index * self.n + item_index

    @cached_property
    def bundles(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            itertools.product(*(range(s) for s in self.sizes))
        )

    @cached_property
    def bundle_items(self) -> tuple[tuple[int, ...], ...]:
        """Per bundle, the flat item ids it contains."""
        return tuple(
            tuple(self.item_id(t, coord) for t, coord in enumerate(b))
            for b in self.bundles
        )

    @cached_property
    def bundle_names(self) -> tuple[str, ...]:
        return tuple(
            "".join(self.types[t].items[coord] for t, coord in enumerate(b))
            for b in self.bundles
        )

    @cached_property
    def bundle_by_name(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.bundle_names)}

    @cached_property
    def orders(self) -> tuple[prefs.PartialOrder, ...]:
        """Per-agent partial order (CP-nets induced on demand, cached)."""
        return tuple(
            p if isinstance(p, prefs.PartialOrder) else prefs.induce_order(p)
            for p in self.preferences
        )

    def cpnet(self, agent: int) -> prefs.CPNet | None:
        p = self.preferences[agent]
        return p if isinstance(p, prefs.CPNet) else None

    @property
    def is_cp_profile(self) -> bool:
        return all(isinstance(p, prefs.CPNet) for p in self.preferences)

    @property
    def is_independent_cp_profile(self) -> bool:
        return self.is_cp_profile and all(
            p.is_independent for p in self.preferences  # type: ignore[union-attr]
        )

    def with_preference(self, agent: int, preference: Preference) -> "Instance":
        """Copy of the instance with one agent's preference replaced."""
        new = list(self.preferences)
        new[agent] = preference
        return Instance(self.types, tuple(new))


def enumerate_bundles(instance: Instance) -> tuple[tuple[int, ...], ...]:
    """All bundles in canonical lexicographic order.

    The order is the global tie-break reference: type order first, item
    declaration order within a type.
    """
    return instance.bundles


def build_instance(spec: Mapping) -> Instance:
    """Validate a parsed instance description (the dict form of the file
    format documented in :mod:`mtra.io`) into an :class:`Instance`."""
    try:
        agents = int(spec["agents"])
        raw_types = list(spec["types"])
        raw_prefs = list(spec["preferences"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"instance description is malformed: {exc}") from exc
    if agents <= 0:
        raise ParseError("agent count must be positive")
    if len(raw_prefs) != agents:
        raise MissingPreference(
            f"{len(raw_prefs)} preferences declared for {agents} agents"
        )
    types = []
    for t in raw_types:
        try:
            types.append(TypeDef(str(t["name"]), tuple(str(i) for i in t["items"])))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"type description is malformed: {exc}") from exc
    # Construct a preference-less shell first so name resolution can use it.
    shell = Instance(tuple(types), (prefs.PartialOrder.empty(_bundle_count(types)),) * agents)
    parsed = tuple(_parse_preference(shell, q) for q in raw_prefs)
    return Instance(tuple(types), parsed)


def _bundle_count(types: Sequence[TypeDef]) -> int:
    out = 1
    for t in types:
        out *= len(t.items)
    return out


def _parse_preference(shell: Instance, raw: Mapping) -> Preference:
    try:
        kind = raw["kind"]
    except (KeyError, TypeError) as exc:
        raise ParseError("preference entry lacks a 'kind'") from exc
    if kind == "partial":
        pairs = []
        for edge in raw.get("edges", ()):
            try:
                better, worse = edge
            except (TypeError, ValueError) as exc:
                raise ParseError(f"bad edge {edge!r}") from exc
            pairs.append((_resolve_bundle(shell, better), _resolve_bundle(shell, worse)))
        return prefs.PartialOrder.from_pairs(shell.m, pairs)
    if kind == "cpnet":
        return _parse_cpnet(shell, raw)
    raise ParseError(f"unknown preference kind {kind!r}")


def _resolve_bundle(instance: Instance, name: str) -> int:
    try:
        return instance.bundle_by_name[str(name)]
    except KeyError:
        raise ParseError(f"unknown bundle name {name!r}") from None


def _parse_cpnet(shell: Instance, raw: Mapping) -> prefs.CPNet:
    type_index = {t.name: i for i, t in enumerate(shell.types)}
    item_index = {
        it: (ti, ii)
        for ti, t in enumerate(shell.types)
        for ii, it in enumerate(t.items)
    }
    parents: dict[int, list[int]] = {i: [] for i in range(shell.p)}
    for edge in raw.get("dependency", ()):
        try:
            parent, child = edge
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad dependency edge {edge!r}") from exc
        if parent not in type_index or child not in type_index:
            raise ParseError(f"dependency edge {edge!r} names unknown types")
        parents[type_index[child]].append(type_index[parent])
    tables: dict[int, dict[tuple[int, ...], tuple[int, ...]]] = {}
    raw_cpt = raw.get("cpt", {})
    for tname, rows in raw_cpt.items():
        if tname not in type_index:
            raise ParseError(f"CPT names unknown type {tname!r}")
        ti = type_index[tname]
        parent_list = sorted(parents[ti])
        table: dict[tuple[int, ...], tuple[int, ...]] = {}
        for key, ordered in rows.items():
            table[_parse_parent_key(key, parent_list, item_index)] = tuple(
                _resolve_item(item_index, ti, it) for it in ordered
            )
        tables[ti] = table
    return prefs.CPNet.from_tables(shell.sizes, {k: tuple(sorted(v)) for k, v in parents.items()}, tables)


def _parse_parent_key(
    key: str,
    parent_list: Sequence[int],
    item_index: Mapping[str, tuple[int, int]],
) -> tuple[int, ...]:
    if not parent_list:
        if key not in ("", "-"):
            raise ParseError(f"parentless CPT row must use key '' (got {key!r})")
        return ()
    found: dict[int, int] = {}
    rest = str(key)
    while rest:
        for name, (ti, ii) in item_index.items():
            if rest.startswith(name) and ti in parent_list and ti not in found:
                found[ti] = ii
                rest = rest[len(name):]
                break
        else:
            raise ParseError(f"cannot resolve CPT key {key!r}")
    if set(found) != set(parent_list):
        raise ParseError(f"CPT key {key!r} does not cover the parent types")
    return tuple(found[t] for t in sorted(parent_list))


def _resolve_item(
    item_index: Mapping[str, tuple[int, int]], type_i: int, name: str
) -> int:
    try:
        ti, ii = item_index[str(name)]
    except KeyError:
        raise ParseError(f"unknown item name {name!r}") from None
    if ti != type_i:
        raise ParseError(f"item {name!r} listed under the wrong type")
    return ii


# -- assignments ---------------------------------------------------------


def _as_fraction(value) -> Fraction:
    if isinstance(value, (Fraction, int, str)):
        return Fraction(value)
    raise ParseError(f"share {value!r} is not an exact rational")


@dataclass(frozen=True)
class FractionalAssignment:
    """An agents x bundles matrix of exact rational shares."""

    rows: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "FractionalAssignment":
        return cls(tuple(tuple(_as_fraction(v) for v in row) for row in rows))

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def m(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def row(self, agent: int) -> tuple[Fraction, ...]:
        return self.rows[agent]

    def entry(self, agent: int, bundle: int) -> Fraction:
        return self.rows[agent][bundle]


@dataclass(frozen=True)
class AssignmentViolation:
    """First structural constraint an assignment matrix breaks."""

    kind: str  # "entry-range" | "row-sum" | "item-marginal"
    subject: str
    actual: Fraction


def validate_assignment(
    P: FractionalAssignment, instance: Instance
) -> AssignmentViolation | None:
    """None iff row sums and per-item marginals are all exactly one."""
    if P.n != instance.n or P.m != instance.m:
        raise DimensionMismatch(
            f"matrix is {P.n}x{P.m}, instance needs {instance.n}x{instance.m}"
        )
    for j, row in enumerate(P.rows):
        for x, v in enumerate(row):
            if v < 0 or v > 1:
                return AssignmentViolation(
                    "entry-range", f"agent {j} bundle {instance.bundle_names[x]}", v
                )
    for j, row in enumerate(P.rows):
        total = sum(row, ZERO)
        if total != 1:
            return AssignmentViolation("row-sum", f"agent {j}", total)
    for o, item in enumerate(instance.item_names):
        total = ZERO
        for j in range(instance.n):
            for x, items in enumerate(instance.bundle_items):
                if o in items:
                    total += P.rows[j][x]
        if total != 1:
            return AssignmentViolation("item-marginal", item, total)
    return None


@dataclass(frozen=True)
class DiscreteAssignment:
    """One bundle per agent, no item used twice."""

    bundles: tuple[int, ...]

    def validate(self, instance: Instance) -> None:
        if len(self.bundles) != instance.n:
            raise DimensionMismatch("one bundle per agent required")
        used: set[int] = set()
        for x in self.bundles:
            for o in instance.bundle_items[x]:
                if o in used:
                    raise DimensionMismatch(
                        f"item {instance.item_names[o]} assigned twice"
                    )
                used.add(o)


def from_discrete(instance: Instance, assignment: DiscreteAssignment) -> FractionalAssignment:
    """0/1 matrix embedding of a discrete assignment."""
    assignment.validate(instance)
    rows = []
    for x in assignment.bundles:
        row = [ZERO] * instance.m
        row[x] = ONE
        rows.append(tuple(row))
    return FractionalAssignment(tuple(rows))


@dataclass(frozen=True)
class Lottery:
    """Probability-weighted discrete assignments (a decomposition witness)."""

    entries: tuple[tuple[Fraction, DiscreteAssignment], ...]

    def __post_init__(self) -> None:
        if any(prob <= 0 for prob, _ in self.entries):
            raise DimensionMismatch("lottery probabilities must be positive")
        if sum((prob for prob, _ in self.entries), ZERO) != 1:
            raise DimensionMismatch("lottery probabilities must sum to one")

    def expectation(self, instance: Instance) -> FractionalAssignment:
        rows = [[ZERO] * instance.m for _ in range(instance.n)]
        for prob, disc in self.entries:
            for j, x in enumerate(disc.bundles):
                rows[j][x] += prob
        return FractionalAssignment(tuple(tuple(r) for r in rows))


def all_discrete_assignments(instance: Instance) -> list[DiscreteAssignment]:
    """Every discrete assignment: one permutation of items per type."""
    per_type = [
        list(itertools.permutations(range(instance.n))) for _ in range(instance.p)
    ]
    out = []
    for combo in itertools.product(*per_type):
        bundles = tuple(
            prefs.bundle_index([perm[j] for perm in combo], instance.sizes)
            for j in range(instance.n)
        )
        out.append(DiscreteAssignment(bundles))
    return out
