"""Strict partial orders, preference graphs, and acyclic CP-nets.

Everything in this module works over an abstract universe of ``m`` bundles
identified by the integers ``0..m-1``; binding bundle indices to named items
is the job of :mod:`mtra.model`.  A bundle over ``p`` item types is encoded
in mixed radix: the bundle ``(x_1, .., x_p)`` (one item index per type) has
index ``((x_1 * n + x_2) * n + ...) + x_p``, so the canonical enumeration
order is lexicographic by (type position, item position).

Relations are stored as bitmask rows: ``above[x]`` has bit ``y`` set iff
``y`` is strictly preferred to ``x``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import (
    CyclicDependency,
    IncompleteCPT,
    InconsistentOrder,
    NothingAvailable,
    UniverseMismatch,
)


def bundle_index(bundle: Sequence[int], sizes: Sequence[int]) -> int:
    """Mixed-radix index of a bundle given per-type item counts."""
    idx = 0
    for coord, size in zip(bundle, sizes):
        idx = idx * size + coord
    return idx


def bundle_tuple(index: int, sizes: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`bundle_index`."""
    coords = []
    for size in reversed(sizes):
        index, coord = divmod(index, size)
        coords.append(coord)
    return tuple(reversed(coords))


def _closure(above: list[int], m: int) -> list[int]:
    # Warshall over bitmask columns: above[x] collects everything above x.
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
    return above


@dataclass(frozen=True)
class PartialOrder:
    """A strict partial order over ``m`` bundles.

    ``above[x]`` is the bitmask of bundles strictly preferred to ``x``.
    The relation is stored transitively closed; construction asserts
    irreflexivity and anti-symmetry (which closure would otherwise hide).
    """

    m: int
    above: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.above) != self.m:
            raise InconsistentOrder("relation size does not match universe")
        for x in range(self.m):
            if self.above[x] >> self.m:
                raise InconsistentOrder("relation mentions bundles outside universe")
            if self.above[x] & (1 << x):
                raise InconsistentOrder("relation is not irreflexive")
        closed = _closure(list(self.above), self.m)
        if tuple(closed) != self.above:
            raise InconsistentOrder("relation is not transitively closed")
        for x in range(self.m):
            rest = self.above[x]
            while rest:
                y = (rest & -rest).bit_length() - 1
                rest &= rest - 1
                if self.above[y] & (1 << x):
                    raise InconsistentOrder("relation is not anti-symmetric")

    @classmethod
    def from_pairs(cls, m: int, pairs: Iterable[tuple[int, int]]) -> "PartialOrder":
        """Build the order generated by ``better > worse`` pairs.

        The pairs are transitively closed; a cyclic pair set is rejected.
        """
        above = [0] * m
        for better, worse in pairs:
            if not (0 <= better < m and 0 <= worse < m):
                raise InconsistentOrder(f"edge ({better},{worse}) outside universe")
            above[worse] |= 1 << better
        above = _closure(above, m)
        for x in range(m):
            if above[x] & (1 << x):
                raise InconsistentOrder("edge list induces a cycle")
        return cls(m, tuple(above))

    @classmethod
    def empty(cls, m: int) -> "PartialOrder":
        return cls(m, (0,) * m)

    @classmethod
    def from_chain(cls, chain: Sequence[int]) -> "PartialOrder":
        """Linear order: ``chain[0]`` is the best bundle."""
        m = len(chain)
        above = [0] * m
        mask = 0
        for x in chain:
            above[x] = mask
            mask |= 1 << x
        return cls(m, tuple(above))

    # -- queries ---------------------------------------------------------

    def prefers(self, x: int, y: int) -> bool:
        """True iff x is strictly preferred to y."""
        return bool(self.above[y] & (1 << x))

    def ucs_mask(self, x: int) -> int:
        """Bitmask of the upper contour set of ``x`` (always contains x)."""
        return self.above[x] | (1 << x)

    def upper_contour_set(self, x: int) -> frozenset[int]:
        return frozenset(_bits(self.ucs_mask(x)))

    def downset_size(self, y: int) -> int:
        """Number of bundles whose upper contour set contains ``y``."""
        bit = 1 << y
        return sum(1 for x in range(self.m) if self.above[x] & bit) + 1

    def is_linear(self) -> bool:
        return sorted(mask.bit_count() for mask in self.above) == list(range(self.m))

    def restricted_equal(self, other: "PartialOrder", subset_mask: int) -> bool:
        """Do the two relations agree on every pair inside ``subset_mask``?"""
        if self.m != other.m:
            return False
        for x in _bits(subset_mask):
            if (self.above[x] & subset_mask) != (other.above[x] & subset_mask):
                return False
        return True

    def without_bundles(self, removed: Iterable[int]) -> "PartialOrder":
        """Drop every relation involving the given bundles (kept in universe).

        The result is the restriction of the relation to the remaining
        bundles, which is again transitive, so no re-closure can resurrect
        deleted pairs.
        """
        drop = 0
        for z in removed:
            drop |= 1 << z
        keep = ~drop
        above = tuple(
            0 if (1 << x) & drop else self.above[x] & keep for x in range(self.m)
        )
        return PartialOrder(self.m, above)


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask &= mask - 1


@dataclass(frozen=True)
class PreferenceGraph:
    """Covering-edge (Hasse) graph of a partial order."""

    m: int
    edges: tuple[tuple[int, int], ...]

    def transitive_closure(self) -> PartialOrder:
        return PartialOrder.from_pairs(self.m, self.edges)


def preference_graph(order: PartialOrder) -> PreferenceGraph:
    """Edges (x, y) with x > y and nothing strictly between."""
    edges = []
    for y in range(order.m):
        for x in _bits(order.above[y]):
            # z strictly between x and y: x > z and z > y
            between = order.above[y] & _down_mask(order, x)
            if not between:
                edges.append((x, y))
    return PreferenceGraph(order.m, tuple(sorted(edges)))


def _down_mask(order: PartialOrder, x: int) -> int:
    mask = 0
    bit = 1 << x
    for z in range(order.m):
        if order.above[z] & bit:
            mask |= 1 << z
    return mask


def upper_contour_set(order: PartialOrder, x: int) -> frozenset[int]:
    return order.upper_contour_set(x)


def topological_sort(order: PartialOrder, tiebreak: Sequence[int]) -> tuple[int, ...]:
    """Deterministic linear extension of ``order``.

    Repeatedly emits the tiebreak-least source among the bundles whose
    remaining strictly-better set is empty.  ``tiebreak`` must be a
    permutation of the universe.
    """
    m = order.m
    if sorted(tiebreak) != list(range(m)):
        raise InconsistentOrder("tiebreak is not a permutation of the universe")
    emitted = 0
    result = []
    for _ in range(m):
        for x in tiebreak:
            if emitted & (1 << x):
                continue
            if order.above[x] & ~emitted == 0:
                result.append(x)
                emitted |= 1 << x
                break
    return tuple(result)


def is_linear_extension(order: PartialOrder, linear: Sequence[int]) -> bool:
    seen = 0
    for x in linear:
        if order.above[x] & ~seen:
            return False
        seen |= 1 << x
    return seen == (1 << order.m) - 1


def ext(
    linear: Sequence[int],
    bundle_items: Sequence[tuple[int, ...]],
    supply: Sequence,
) -> int:
    """First bundle in ``linear`` whose items all have supply > 0."""
    for x in linear:
        if all(supply[o] > 0 for o in bundle_items[x]):
            return x
    raise NothingAvailable("no bundle in the order is fully available")


def is_uit(
    old: PartialOrder,
    new: PartialOrder,
    pivot: int,
    row: Sequence,
) -> tuple[bool, frozenset[int] | str]:
    """Is ``new`` an upper invariant transformation of ``old`` at ``pivot``?

    ``row`` is the agent's allocation row under the assignment the
    transformation is taken at; only its zero entries matter.  Returns
    ``(True, Z)`` with the removed set, or ``(False, reason)``.

    Only the upper contour set of the pivot is constrained: the removed
    bundles must carry zero share, and the two relations must agree on
    what remains.  The relation outside the new upper contour set is
    deliberately left unchecked.
    """
    if old.m != new.m:
        raise UniverseMismatch("orders range over different universes")
    u_old = old.ucs_mask(pivot)
    u_new = new.ucs_mask(pivot)
    if u_new & ~u_old:
        return False, "upper contour set of the pivot gained bundles"
    z_mask = u_old & ~u_new
    for z in _bits(z_mask):
        if row[z] != 0:
            return False, f"removed bundle {z} has positive share"
    if not old.restricted_equal(new, u_new):
        return False, "relations disagree on the surviving upper contour set"
    return True, frozenset(_bits(z_mask))


# -- CP-nets -------------------------------------------------------------


@dataclass(frozen=True)
class CPNet:
    """An acyclic CP-net over ``p`` item types.

    ``sizes[i]`` is the number of items of type ``i``; ``parents[i]`` the
    sorted tuple of types type ``i`` depends on; ``tables[i]`` maps each
    assignment to the parents (a tuple of item indices, ordered like
    ``parents[i]``) to a strict order over type ``i``'s items, stored as
    a sorted tuple of (parent assignment, item order) pairs so the whole
    net is hashable.
    """

    sizes: tuple[int, ...]
    parents: tuple[tuple[int, ...], ...]
    tables: tuple[tuple[tuple[tuple[int, ...], tuple[int, ...]], ...], ...]

    def __post_init__(self) -> None:
        p = len(self.sizes)
        if len(self.parents) != p or len(self.tables) != p:
            raise IncompleteCPT("per-type parent or table list has wrong length")
        self._check_acyclic()
        for i in range(p):
            expected = set(itertools.product(*(range(self.sizes[q]) for q in self.parents[i])))
            seen = set()
            for key, row in self.tables[i]:
                if key in seen:
                    raise IncompleteCPT(f"duplicate row for type {i} at {key}")
                seen.add(key)
                if sorted(row) != list(range(self.sizes[i])):
                    raise IncompleteCPT(f"row for type {i} at {key} is not a total order")
            if seen != expected:
                raise IncompleteCPT(f"table for type {i} does not cover the parent product")

    def _check_acyclic(self) -> None:
        order = self.type_order()
        if order is None:
            raise CyclicDependency("CP-net dependency graph is cyclic")

    def type_order(self) -> tuple[int, ...] | None:
        """Types in dependency-topological order, or None if cyclic."""
        p = len(self.sizes)
        remaining = set(range(p))
        out: list[int] = []
        placed: set[int] = set()
        while remaining:
            ready = sorted(i for i in remaining if set(self.parents[i]) <= placed)
            if not ready:
                return None
            out.append(ready[0])
            placed.add(ready[0])
            remaining.remove(ready[0])
        return tuple(out)

    def row(self, type_index: int, parent_assignment: tuple[int, ...]) -> tuple[int, ...]:
        for key, order in self.tables[type_index]:
            if key == parent_assignment:
                return order
        raise IncompleteCPT(f"no row for type {type_index} at {parent_assignment}")

    @property
    def is_independent(self) -> bool:
        return all(not pa for pa in self.parents)

    @classmethod
    def independent(cls, orders: Sequence[Sequence[int]]) -> "CPNet":
        """CP-net with an edgeless dependency graph."""
        sizes = tuple(len(o) for o in orders)
        parents = tuple(() for _ in orders)
        tables = tuple((((), tuple(order)),) for order in orders)
        return cls(sizes, parents, tables)

    @classmethod
    def from_tables(
        cls,
        sizes: Sequence[int],
        parents: Mapping[int, Sequence[int]],
        tables: Mapping[int, Mapping[tuple[int, ...], Sequence[int]]],
    ) -> "CPNet":
        p = len(sizes)
        parent_tuple = tuple(tuple(sorted(parents.get(i, ()))) for i in range(p))
        table_tuple = tuple(
            tuple(sorted((tuple(k), tuple(v)) for k, v in tables.get(i, {}).items()))
            for i in range(p)
        )
        return cls(tuple(sizes), parent_tuple, table_tuple)


def induce_order(cpnet: CPNet) -> PartialOrder:
    """Partial order induced by a CP-net: closure of sanctioned flips.

    A flip fixes the parents of one type and swaps that type's item for a
    CPT-better one, with every other type held fixed at an arbitrary value.
    """
    return _induced_order_cached(cpnet)


@lru_cache(maxsize=65536)
def _induced_order_cached(cpnet: CPNet) -> PartialOrder:
    sizes = cpnet.sizes
    p = len(sizes)
    m = 1
    for s in sizes:
        m *= s
    pairs: list[tuple[int, int]] = []
    for i in range(p):
        others = [q for q in range(p) if q != i]
        for key, row in cpnet.tables[i]:
            parent_of = dict(zip(cpnet.parents[i], key))
            free = [q for q in others if q not in parent_of]
            for rest in itertools.product(*(range(sizes[q]) for q in free)):
                coords = [0] * p
                for q, v in parent_of.items():
                    coords[q] = v
                for q, v in zip(free, rest):
                    coords[q] = v
                for a in range(len(row)):
                    for b in range(a + 1, len(row)):
                        coords[i] = row[a]
                        better = bundle_index(coords, sizes)
                        coords[i] = row[b]
                        worse = bundle_index(coords, sizes)
                        pairs.append((better, worse))
    return PartialOrder.from_pairs(m, pairs)


def top_cpnet(cpnet: CPNet, remaining: Sequence[Iterable[int]]) -> tuple[int, ...]:
    """Unique best available bundle of an acyclic CP-net.

    Walks the types in dependency order, at each type picking the
    CPT-best remaining item given the already chosen parent items.
    ``remaining[i]`` must be a nonempty subset of type ``i``'s items.
    """
    remaining_sets = [set(r) for r in remaining]
    if any(not r for r in remaining_sets):
        raise NothingAvailable("a type has no remaining items")
    chosen: dict[int, int] = {}
    order = cpnet.type_order()
    assert order is not None  # construction rejects cyclic nets
    for i in order:
        key = tuple(chosen[q] for q in cpnet.parents[i])
        row = cpnet.row(i, key)
        chosen[i] = next(o for o in row if o in remaining_sets[i])
    return tuple(chosen[i] for i in range(len(cpnet.sizes)))
