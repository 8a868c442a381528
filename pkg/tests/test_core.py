import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fairdiv as fd
from fairdiv.errors import (
    AllocationError,
    BudgetExceededError,
    DimensionMismatchError,
    NegativeUtilityError,
    NonPositiveWeightError,
    TooFewAgentsError,
)

from conftest import random_instance


class TestRat:
    def test_parses_fraction_strings(self):
        assert fd.rat("2/5") == Fraction(2, 5)
        assert fd.rat("40") == 40
        assert fd.rat(7) == 7
        assert fd.rat("0.4") == Fraction(2, 5)  # decimal strings stay exact

    def test_rejects_floats(self):
        with pytest.raises(ValueError):
            fd.rat(0.4)

    def test_round_trip(self):
        assert fd.rat_str(Fraction(3, 4)) == "3/4"
        assert fd.rat_str(Fraction(5)) == "5"
        assert fd.rat(fd.rat_str(Fraction(-7, 3))) == Fraction(-7, 3)


class TestInstanceValidation:
    def test_smallest_legal_instance(self):
        inst = fd.make_instance([1, 1], [[1], [1]])
        assert inst.total_weight == 2
        assert inst.n == 2 and inst.m == 1

    def test_forty_sixty(self):
        inst = fd.validate_instance(
            {"weights": ["2/5", "3/5"], "utilities": [["40", "60"], ["40", "60"]]}
        )
        assert inst.weights == (Fraction(2, 5), Fraction(3, 5))
        assert inst.total_weight == 1

    def test_zero_weight_rejected(self):
        with pytest.raises(NonPositiveWeightError):
            fd.make_instance([0, 1], [[1], [1]])

    def test_single_agent_rejected(self):
        with pytest.raises(TooFewAgentsError):
            fd.make_instance([1], [[1]])

    def test_negative_utility_rejected(self):
        with pytest.raises(NegativeUtilityError):
            fd.make_instance([1, 1], [[1], [-1]])

    def test_ragged_rows_rejected(self):
        with pytest.raises(DimensionMismatchError):
            fd.make_instance([1, 1], [[1, 2], [1]])

    def test_missing_keys_rejected(self):
        with pytest.raises(DimensionMismatchError):
            fd.validate_instance({"weights": [1, 2]})

    def test_flags(self):
        identical = fd.identical_instance([4, 1, 1], 3)
        assert identical.identical_items and identical.binary
        mixed = fd.make_instance([1, 1], [[40, 60], [40, 60]])
        assert not mixed.identical_items and not mixed.binary
        binary = fd.make_instance([1, 2], [[1, 0], [0, 1]])
        assert binary.binary and not binary.identical_items


class TestBundleUtility:
    def test_sum_of_items(self):
        inst = fd.make_instance(["2/5", "3/5"], [[40, 60], [40, 60]])
        assert fd.bundle_utility(inst, 0, [0, 1]) == 100

    def test_empty_set(self):
        inst = fd.make_instance([1, 1], [[3, 4], [5, 6]])
        assert fd.bundle_utility(inst, 1, []) == 0

    def test_identical_units(self):
        inst = fd.identical_instance([1, 1, 1], 3)
        assert fd.bundle_utility(inst, 2, [0, 2]) == 2

    def test_out_of_range(self):
        inst = fd.make_instance([1, 1], [[1], [1]])
        with pytest.raises(IndexError):
            fd.bundle_utility(inst, 0, [5])
        with pytest.raises(IndexError):
            fd.bundle_utility(inst, 9, [0])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**30))
    def test_additive_over_disjoint_sets(self, seed):
        rng = random.Random(seed)
        inst = random_instance(rng, max_n=3, max_m=6)
        items = list(range(inst.m))
        rng.shuffle(items)
        cut = rng.randint(0, inst.m)
        left, right = items[:cut], items[cut:]
        for i in range(inst.n):
            assert fd.bundle_utility(inst, i, left) + fd.bundle_utility(inst, i, right) \
                == fd.bundle_utility(inst, i, items)


class TestEnumeration:
    def test_two_by_two(self):
        inst = fd.identical_instance([1, 1], 2)
        assert len(list(fd.enumerate_allocations(inst))) == 4

    def test_three_cubed_distinct(self):
        inst = fd.identical_instance([1, 1, 1], 3)
        allocations = list(fd.enumerate_allocations(inst))
        assert len(allocations) == 27
        assert len({a.owners for a in allocations}) == 27

    def test_budget_exceeded(self):
        inst = fd.identical_instance([1, 1, 1], 20)
        with pytest.raises(BudgetExceededError) as exc:
            next(iter(fd.enumerate_allocations(inst)))
        assert exc.value.required == 3**20

    def test_larger_enumeration_is_exhaustive_and_distinct(self):
        inst = fd.identical_instance([1, 1, 1, 1], 6)
        owners = {a.owners for a in fd.enumerate_allocations(inst)}
        assert len(owners) == 4**6

    def test_first_item_varies_slowest(self):
        inst = fd.identical_instance([1, 1], 2)
        owners = [a.owners for a in fd.enumerate_allocations(inst)]
        assert owners == [(0, 0), (0, 1), (1, 0), (1, 1)]

    @settings(max_examples=15, deadline=None)
    @given(st.integers(2, 3), st.integers(0, 4))
    def test_every_allocation_is_a_partition(self, n, m):
        inst = fd.identical_instance([1] * n, m)
        for alloc in fd.enumerate_allocations(inst):
            assert sum(len(b) for b in alloc.bundles) == m
            assert set().union(*alloc.bundles) == set(range(m)) if m else True


class TestAllocations:
    def test_make_allocation_validates_partition(self):
        inst = fd.identical_instance([1, 1], 3)
        with pytest.raises(AllocationError):
            fd.make_allocation(inst, [[0, 1], [1, 2]])
        with pytest.raises(AllocationError):
            fd.make_allocation(inst, [[0], [1]])

    def test_counts_to_allocation(self):
        assert fd.counts_to_allocation([1, 1, 1]).bundles == (
            frozenset({0}), frozenset({1}), frozenset({2}))
        assert fd.counts_to_allocation([3, 0, 0]).bundles == (
            frozenset({0, 1, 2}), frozenset(), frozenset())
        assert fd.counts_to_allocation([2, 1, 0]).bundles == (
            frozenset({0, 1}), frozenset({2}), frozenset())

    def test_counts_sum_mismatch(self):
        with pytest.raises(AllocationError):
            fd.counts_to_allocation([2, 1], m=4)

    def test_parse_allocation_round_trip(self):
        inst = fd.identical_instance([1, 1], 3)
        alloc = fd.make_allocation(inst, [[0, 2], [1]])
        parsed = fd.parse_allocation(fd.allocation_to_json(alloc), inst)
        assert parsed == alloc

    def test_owners_round_trip(self):
        alloc = fd.allocation_from_owners(3, (2, 0, 1, 2))
        assert alloc.owners == (2, 0, 1, 2)
        assert alloc.counts == (1, 1, 2)


def test_iter_counts_matches_enumeration_order():
    counts = list(fd.iter_counts(3, 3))
    assert len(counts) == 10
    assert counts[0] == (3, 0, 0)
    assert all(sum(c) == 3 for c in counts)
    # descending lexicographic
    assert counts == sorted(counts, reverse=True)


def test_instance_json_round_trip():
    inst = fd.make_instance(["2/5", "3/5"], [["40", "60"], [0, "1/3"]])
    again = fd.validate_instance(fd.instance_to_json(inst))
    assert again == inst
