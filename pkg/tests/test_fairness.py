import itertools
from fractions import Fraction

import pytest

import fairdiv as fd
from fairdiv.errors import NotIdenticalItemsError, ParameterError

from conftest import random_instance

GRID = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]


def ef1_oracle(inst, alloc):
    """Independent unweighted EF1 check: try removing each single item."""
    for i in range(inst.n):
        mine = fd.bundle_utility(inst, i, alloc.bundles[i])
        for j in range(inst.n):
            if i == j:
                continue
            theirs = fd.bundle_utility(inst, i, alloc.bundles[j])
            if mine >= theirs:
                continue
            if not any(mine >= theirs - inst.utilities[i][g] for g in alloc.bundles[j]):
                return False
    return True


def prop1_oracle(inst, alloc):
    """Independent unweighted PROP1 check."""
    for i in range(inst.n):
        mine = fd.bundle_utility(inst, i, alloc.bundles[i])
        need = inst.utility_totals[i] / inst.n
        if mine >= need:
            continue
        outside = [inst.utilities[i][g] for g in range(inst.m) if g not in alloc.bundles[i]]
        best = max(outside, default=Fraction(0))
        if mine + best < need:
            return False
    return True


class TestWeightedEnvy:
    def test_identical_411(self):
        inst = fd.identical_instance([4, 1, 1], 3)
        alloc = fd.counts_to_allocation([1, 1, 1])
        assert fd.weighted_envy(inst, alloc, 0, 1) == Fraction(3, 4)

    def test_clamped_at_zero(self):
        inst = fd.make_instance([1, 1], [[5, 0], [0, 5]])
        alloc = fd.make_allocation(inst, [[0], [1]])
        for i, j in [(0, 1), (1, 0)]:
            assert fd.weighted_envy(inst, alloc, i, j) == 0

    def test_forty_sixty_envy(self):
        inst = fd.make_instance(["2/5", "3/5"], [[40, 60], [40, 60]])
        alloc = fd.make_allocation(inst, [[], [0, 1]])
        assert fd.weighted_envy(inst, alloc, 0, 1) == Fraction(500, 3)

    def test_same_agent_rejected(self):
        inst = fd.identical_instance([1, 1], 2)
        with pytest.raises(ParameterError):
            fd.weighted_envy(inst, fd.counts_to_allocation([1, 1]), 0, 0)


class TestCheckWef:
    def test_411_one_each_passes_wef10(self):
        inst = fd.identical_instance([4, 1, 1], 3)
        alloc = fd.counts_to_allocation([1, 1, 1])
        assert fd.check_wef(inst, alloc, 1, 0).satisfied

    def test_411_copy_variant(self):
        inst = fd.identical_instance([4, 1, 1], 3)
        assert fd.check_wef(inst, fd.counts_to_allocation([3, 0, 0]), 0, 1).satisfied
        verdict = fd.check_wef(inst, fd.counts_to_allocation([1, 1, 1]), 0, 1)
        assert not verdict.satisfied
        assert verdict.witnesses[0].agents[0] == 0  # heavy agent is the envier

    def test_parameter_range(self):
        inst = fd.identical_instance([1, 1], 2)
        with pytest.raises(ParameterError):
            fd.check_wef(inst, fd.counts_to_allocation([1, 1]), 2, 0)

    def test_equal_weights_matches_ef1(self, rng):
        for _ in range(40):
            inst = random_instance(rng, n=rng.randint(2, 3), max_m=4)
            inst = fd.Instance((Fraction(1),) * inst.n, inst.utilities)
            for alloc in fd.enumerate_allocations(inst):
                expected = ef1_oracle(inst, alloc)
                for x in (Fraction(0), Fraction(1, 2), Fraction(1)):
                    assert fd.check_wef(inst, alloc, x, 1 - x).satisfied == expected

    def test_monotone_in_x_and_y(self, rng):
        for _ in range(30):
            inst = random_instance(rng, max_n=3, max_m=5)
            alloc = fd.run_sequence(inst, fd.adaptive_wef_sequence(inst, Fraction(1, 2)))
            for x, y in itertools.product(GRID[:3], GRID[:3]):
                if fd.check_wef(inst, alloc, x, y).satisfied:
                    assert fd.check_wef(inst, alloc, 1, y).satisfied
                    assert fd.check_wef(inst, alloc, x, 1).satisfied


class TestCheckWprop:
    def test_thm4_style_failures(self):
        inst = fd.identical_instance(["1/10", "1/10", "8/10"], 4)
        verdict = fd.check_wprop(inst, fd.counts_to_allocation([1, 1, 2]), 0, 1)
        assert not verdict.satisfied
        assert verdict.witnesses[0].agents == (2,)  # heavy agent needs 2.2 -> 3 items
        verdict = fd.check_wprop(inst, fd.counts_to_allocation([0, 1, 3]), 1, 0)
        assert not verdict.satisfied
        assert verdict.witnesses[0].agents == (0,)

    def test_agent_with_everything_always_passes(self):
        inst = fd.make_instance([1, 3], [[1, 2], [3, 4]])
        alloc = fd.make_allocation(inst, [[0, 1], []])
        for x, y in itertools.product(GRID, GRID):
            verdict = fd.check_wprop(inst, alloc, x, y, include_satisfied=True)
            agent0 = [w for w in verdict.witnesses if w.agents == (0,)]
            assert agent0[0].margin >= 0

    def test_equal_weights_matches_prop1(self, rng):
        for _ in range(60):
            inst = random_instance(rng, n=2, max_m=5)
            inst = fd.Instance((Fraction(1), Fraction(1)), inst.utilities)
            for alloc in fd.enumerate_allocations(inst):
                expected = prop1_oracle(inst, alloc)
                assert fd.check_wprop(inst, alloc, Fraction(1, 2), Fraction(1, 2)).satisfied \
                    == expected


class TestCheckWpropStar:
    def test_implied_by_wef(self, rng):
        for _ in range(25):
            inst = random_instance(rng, max_n=3, max_m=5)
            for alloc in itertools.islice(fd.enumerate_allocations(inst), 40):
                for x, y in ((Fraction(1), Fraction(0)), (Fraction(1, 2), Fraction(1, 2))):
                    if fd.check_wef(inst, alloc, x, y).satisfied:
                        assert fd.check_wprop_star(inst, alloc, x, y).satisfied

    def test_implies_wprop(self, rng):
        for _ in range(25):
            inst = random_instance(rng, max_n=3, max_m=5)
            for alloc in itertools.islice(fd.enumerate_allocations(inst), 40):
                for x, y in ((Fraction(1), Fraction(0)), (Fraction(1, 4), Fraction(3, 4))):
                    if fd.check_wprop_star(inst, alloc, x, y).satisfied:
                        assert fd.check_wprop(inst, alloc, x, y).satisfied

    def test_zero_zero_is_exact_weighted_proportionality(self, rng):
        for _ in range(40):
            inst = random_instance(rng, max_n=3, max_m=4)
            alloc = fd.ordered_round_robin(inst)
            expected = all(
                fd.bundle_utility(inst, i, alloc.bundles[i])
                >= inst.weight_share(i) * inst.utility_totals[i]
                for i in range(inst.n)
            )
            assert fd.check_wprop_star(inst, alloc, 0, 0).satisfied == expected


class TestCheckWwef1:
    def test_implied_by_any_wef_x(self, rng):
        for _ in range(25):
            inst = random_instance(rng, max_n=3, max_m=5)
            for x in GRID:
                alloc = fd.run_sequence(inst, fd.adaptive_wef_sequence(inst, x))
                assert fd.check_wwef1(inst, alloc).satisfied

    def test_mwnw_outputs_pass(self, rng):
        for _ in range(10):
            inst = random_instance(rng, max_n=3, max_m=4)
            for alloc in fd.max_weighted_nash(inst).optima:
                assert fd.check_wwef1(inst, alloc).satisfied

    def test_thm5_fixture_separates_wwef1_from_wprop(self):
        inst = fd.mwnw_violates_wprop_instance(Fraction(1, 2))
        outcome = fd.mwnw_identical_counts(inst.weights, inst.m)
        for counts in outcome.optima:
            alloc = fd.counts_to_allocation(counts)
            assert fd.check_wwef1(inst, alloc).satisfied
            assert not fd.check_wprop(inst, alloc, Fraction(1, 2), Fraction(1, 2)).satisfied


class TestCheckOef1:
    def test_round_robin_passes(self, rng):
        for _ in range(30):
            inst = random_instance(rng, max_n=4, max_m=7)
            assert fd.check_oef1(inst, fd.ordered_round_robin(inst)).satisfied

    def test_strong_mutual_envy_fails_ef1(self):
        inst = fd.make_instance([1, 1], [[0, 0, 10, 10], [10, 10, 0, 0]])
        alloc = fd.make_allocation(inst, [[0, 1], [2, 3]])
        assert not fd.check_oef1(inst, alloc).satisfied

    def test_equal_weight_mutual_envy_cycle_fails(self):
        # EF1 holds but no ordering avoids envy toward a later agent
        inst = fd.make_instance([1, 1], [[1, 2], [2, 1]])
        alloc = fd.make_allocation(inst, [[0], [1]])
        verdict = fd.check_oef1(inst, alloc)
        assert not verdict.satisfied

    def test_weight_direction(self):
        inst = fd.make_instance([3, 1], [[2, 1], [2, 1]])
        lighter_envies = fd.make_allocation(inst, [[0], [1]])
        assert fd.check_oef1(inst, lighter_envies).satisfied
        heavier_envies = fd.make_allocation(inst, [[1], [0]])
        assert not fd.check_oef1(inst, heavier_envies).satisfied


class TestCheckQuota:
    def test_411_quotas(self):
        inst = fd.identical_instance([4, 1, 1], 3)
        report = fd.check_quota(inst, fd.counts_to_allocation([1, 1, 1]))
        assert report.quotas == (Fraction(2), Fraction(1, 2), Fraction(1, 2))
        assert not report.lower_ok[0] and report.upper_ok[0]
        report = fd.check_quota(inst, fd.counts_to_allocation([3, 0, 0]))
        assert not report.upper_ok[0] and report.lower_ok[0]
        for counts in ([2, 1, 0], [2, 0, 1]):
            assert fd.check_quota(inst, fd.counts_to_allocation(counts)).satisfied

    def test_requires_identical_items(self):
        inst = fd.make_instance([1, 1], [[40, 60], [40, 60]])
        with pytest.raises(NotIdenticalItemsError):
            fd.check_quota(inst, fd.counts_to_allocation([1, 1]))


def test_identical_verdicts_depend_only_on_counts():
    """All allocations with the same counts get the same verdicts."""
    inst = fd.identical_instance([3, 1, 2], 4)
    by_counts = {}
    for alloc in fd.enumerate_allocations(inst):
        key = alloc.counts
        verdicts = (
            fd.check_wef(inst, alloc, 1, 0).satisfied,
            fd.check_wef(inst, alloc, 0, 1).satisfied,
            fd.check_wprop(inst, alloc, Fraction(1, 2), Fraction(1, 2)).satisfied,
            fd.check_quota(inst, alloc).satisfied,
        )
        assert by_counts.setdefault(key, verdicts) == verdicts
