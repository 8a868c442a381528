"""Exact rational model of weighted fair-division instances and allocations.

All numeric quantities are `fractions.Fraction`; no floating point is used
anywhere in the computational paths. Instances are immutable and hashable,
so every operation in the library is a pure function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    AllocationError,
    BudgetExceededError,
    DimensionMismatchError,
    NegativeUtilityError,
    NonPositiveWeightError,
    TooFewAgentsError,
)

Rational = Fraction

DEFAULT_ENUM_BUDGET = 10**7


def rat(value: int | str | Fraction) -> Fraction:
    """Coerce an exact value ("p/q" string, integer, or Fraction) to Fraction.

    Floats are rejected: they would silently break exactness.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a rational value: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"not an exact rational value: {value!r}")


def rat_str(value: Fraction) -> str:
    """Render a Fraction as "p/q" (or "p" when the denominator is 1)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Instance:
    """A weighted fair-division instance.

    `weights[i]` is agent i's entitlement (strictly positive) and
    `utilities[i][g]` is agent i's value for item g (nonnegative).
    Agents and items are 0-indexed.
    """

    weights: tuple[Fraction, ...]
    utilities: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if len(self.weights) < 2:
            raise TooFewAgentsError(f"need at least 2 agents, got {len(self.weights)}")
        if len(self.utilities) != len(self.weights):
            raise DimensionMismatchError(
                f"{len(self.weights)} weights but {len(self.utilities)} utility rows"
            )
        m = len(self.utilities[0]) if self.utilities else 0
        for i, row in enumerate(self.utilities):
            if len(row) != m:
                raise DimensionMismatchError(f"utility row {i} has {len(row)} items, expected {m}")
        for i, w in enumerate(self.weights):
            if w <= 0:
                raise NonPositiveWeightError(f"weight of agent {i} is {w}; weights must be > 0")
        for i, row in enumerate(self.utilities):
            for g, u in enumerate(row):
                if u < 0:
                    raise NegativeUtilityError(f"utility of agent {i} for item {g} is {u}")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def m(self) -> int:
        return len(self.utilities[0]) if self.utilities else 0

    @cached_property
    def total_weight(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @cached_property
    def utility_totals(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, Fraction(0)) for row in self.utilities)

    @cached_property
    def identical_items(self) -> bool:
        """True when every agent assigns one common value to every item."""
        values = {u for row in self.utilities for u in row}
        return len(values) <= 1

    @cached_property
    def binary(self) -> bool:
        return all(u == 0 or u == 1 for row in self.utilities for u in row)

    def utility(self, agent: int, item: int) -> Fraction:
        return self.utilities[agent][item]

    def row(self, agent: int) -> tuple[Fraction, ...]:
        return self.utilities[agent]

    def weight_share(self, agent: int) -> Fraction:
        """Relative entitlement w_i / w_N."""
        return self.weights[agent] / self.total_weight


def make_instance(weights: Iterable, utilities: Iterable[Iterable]) -> Instance:
    """Build a validated Instance, coercing entries through `rat`."""
    w = tuple(rat(x) for x in weights)
    u = tuple(tuple(rat(x) for x in row) for row in utilities)
    return Instance(w, u)


def validate_instance(raw: Mapping) -> Instance:
    """Validate a raw instance description (the JSON wire format).

    Expected shape: {"weights": ["2/5", "3/5"], "utilities": [["40", "60"], ...]}
    with rationals as "p/q" strings or integers.
    """
    if not isinstance(raw, Mapping):
        raise DimensionMismatchError("instance description must be a mapping")
    try:
        weights = raw["weights"]
        utilities = raw["utilities"]
    except KeyError as exc:
        raise DimensionMismatchError(f"instance description missing key {exc}") from exc
    if not isinstance(weights, Sequence) or not isinstance(utilities, Sequence):
        raise DimensionMismatchError("weights and utilities must be arrays")
    try:
        return make_instance(weights, utilities)
    except ValueError as exc:
        raise DimensionMismatchError(str(exc)) from exc


def instance_to_json(inst: Instance) -> dict:
    return {
        "weights": [rat_str(w) for w in inst.weights],
        "utilities": [[rat_str(u) for u in row] for row in inst.utilities],
    }


@dataclass(frozen=True)
class Allocation:
    """A complete partition of the items into one bundle per agent."""

    bundles: tuple[frozenset[int], ...]

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def m(self) -> int:
        return sum(len(b) for b in self.bundles)

    @cached_property
    def counts(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.bundles)

    @cached_property
    def owners(self) -> tuple[int, ...]:
        """Owner of each item, indexed by item."""
        owner = [0] * self.m
        for i, bundle in enumerate(self.bundles):
            for g in bundle:
                owner[g] = i
        return tuple(owner)

    def bundle(self, agent: int) -> frozenset[int]:
        return self.bundles[agent]


def make_allocation(inst: Instance, bundles: Iterable[Iterable[int]]) -> Allocation:
    """Build an Allocation for `inst`, checking it partitions the item set."""
    sets = tuple(frozenset(b) for b in bundles)
    if len(sets) != inst.n:
        raise AllocationError(f"{len(sets)} bundles for {inst.n} agents")
    seen: set[int] = set()
    total = 0
    for b in sets:
        total += len(b)
        seen.update(b)
    if total != len(seen) or seen != set(range(inst.m)):
        raise AllocationError("bundles must be disjoint and cover every item exactly once")
    return Allocation(sets)


def allocation_from_owners(n: int, owners: Sequence[int]) -> Allocation:
    """Build an Allocation from the owner-per-item vector."""
    buckets: list[set[int]] = [set() for _ in range(n)]
    for g, i in enumerate(owners):
        if not 0 <= i < n:
            raise AllocationError(f"owner {i} of item {g} out of range")
        buckets[i].add(g)
    return Allocation(tuple(frozenset(b) for b in buckets))


def parse_allocation(raw: Mapping, inst: Instance) -> Allocation:
    """Validate a raw allocation description against an instance.

    Expected shape: {"bundles": [[0, 1], [2]]} with 0-based item indices.
    """
    if not isinstance(raw, Mapping) or "bundles" not in raw:
        raise AllocationError('allocation description must be a mapping with a "bundles" key')
    bundles = raw["bundles"]
    if not isinstance(bundles, Sequence):
        raise AllocationError("bundles must be an array of arrays")
    try:
        cleaned = [[int(g) for g in b] for b in bundles]
    except (TypeError, ValueError) as exc:
        raise AllocationError(f"bundle entries must be integers: {exc}") from exc
    return make_allocation(inst, cleaned)


def allocation_to_json(alloc: Allocation) -> dict:
    return {"bundles": [sorted(b) for b in alloc.bundles]}


def bundle_utility(inst: Instance, agent: int, items: Iterable[int]) -> Fraction:
    """Additive utility of `agent` for the given set of items."""
    if not 0 <= agent < inst.n:
        raise IndexError(f"agent {agent} out of range")
    row = inst.utilities[agent]
    total = Fraction(0)
    for g in items:
        if not 0 <= g < inst.m:
            raise IndexError(f"item {g} out of range")
        total += row[g]
    return total


def allocation_count(inst: Instance) -> int:
    return inst.n ** inst.m


def enumerate_allocations(inst: Instance, budget: int | None = None) -> Iterator[Allocation]:
    """Yield all n^m complete allocations exactly once, in a fixed order.

    The owner of item 0 varies slowest. Raises BudgetExceededError up front
    when n^m exceeds the budget (default 10^7).
    """
    limit = DEFAULT_ENUM_BUDGET if budget is None else budget
    count = allocation_count(inst)
    if count > limit:
        raise BudgetExceededError(
            f"enumeration needs {count} allocations, budget is {limit}",
            required=count,
            budget=limit,
        )
    n = inst.n
    for owners in itertools.product(range(n), repeat=inst.m):
        yield allocation_from_owners(n, owners)


def iter_owner_vectors(inst: Instance, budget: int | None = None) -> Iterator[tuple[int, ...]]:
    """Like enumerate_allocations but yields raw owner tuples (no set objects)."""
    limit = DEFAULT_ENUM_BUDGET if budget is None else budget
    count = allocation_count(inst)
    if count > limit:
        raise BudgetExceededError(
            f"enumeration needs {count} allocations, budget is {limit}",
            required=count,
            budget=limit,
        )
    return itertools.product(range(inst.n), repeat=inst.m)


@dataclass(frozen=True)
class IdenticalCounts:
    """Per-agent item counts for an identical-items allocation."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        for c in self.counts:
            if c < 0:
                raise AllocationError(f"negative count {c}")

    @property
    def m(self) -> int:
        return sum(self.counts)


def counts_to_allocation(
    counts: IdenticalCounts | Sequence[int], m: int | None = None
) -> Allocation:
    """Canonical allocation for identical items: consecutive blocks of items.

    Agent 0 receives items 0..c0-1, agent 1 the next c1 items, and so on.
    When `m` is given, the counts must sum to it.
    """
    if isinstance(counts, IdenticalCounts):
        counts = counts.counts
    if m is not None and sum(counts) != m:
        raise AllocationError(f"counts sum to {sum(counts)}, expected {m}")
    bundles = []
    start = 0
    for c in counts:
        if c < 0:
            raise AllocationError(f"negative count {c}")
        bundles.append(frozenset(range(start, start + c)))
        start += c
    return Allocation(tuple(bundles))


def iter_counts(m: int, n: int) -> Iterator[tuple[int, ...]]:
    """All n-tuples of nonnegative integers summing to m.

    Enumerated in descending lexicographic order, which matches the order in
    which the corresponding canonical identical-items allocations appear in
    enumerate_allocations (agent 0 greedy first).
    """
    if n == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in iter_counts(m - first, n - 1):
            yield (first,) + rest


def identical_instance(weights: Iterable, m: int, value: int | str | Fraction = 1) -> Instance:
    """Instance with m identical items of the given common value."""
    w = tuple(rat(x) for x in weights)
    v = rat(value)
    rows = tuple(tuple(v for _ in range(m)) for _ in w)
    return Instance(w, rows)
