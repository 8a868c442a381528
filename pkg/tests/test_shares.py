import itertools
import random
from fractions import Fraction

import pytest

import fairdiv as fd
from fairdiv import shares
from fairdiv._simplex import solve_bundle_feasibility
from fairdiv.errors import ParameterError, SearchBudgetExceededError, TooManyItemsError

from conftest import random_instance


def mms_oracle(inst, agent, l, d):
    """Raw enumeration over all d^m labeled assignments."""
    best = None
    row = inst.row(agent)
    for assignment in itertools.product(range(d), repeat=inst.m):
        sums = [Fraction(0)] * d
        for g, slot in enumerate(assignment):
            sums[slot] += row[g]
        value = sum(sorted(sums)[:l])
        if best is None or value > best:
            best = value
    return best if best is not None else Fraction(0)


def wmms_oracle(inst, agent):
    """Raw enumeration over labeled n-partitions."""
    best = Fraction(0)
    row = inst.row(agent)
    for assignment in itertools.product(range(inst.n), repeat=inst.m):
        sums = [Fraction(0)] * inst.n
        for g, slot in enumerate(assignment):
            sums[slot] += row[g]
        ratio = min(s / w for s, w in zip(sums, inst.weights))
        best = max(best, ratio)
    return inst.weights[agent] * best


def omms_oracle(inst, agent):
    """Direct max over every (l, d) pair with l/d <= w_i/w_N and d <= m."""
    share = inst.weight_share(agent)
    best = Fraction(0)
    for d in range(1, inst.m + 1):
        for l in range(1, d + 1):
            if Fraction(l, d) <= share:
                best = max(best, mms_oracle(inst, agent, l, d))
    return best


FORTY_SIXTY = fd.make_instance(["2/5", "3/5"], [[40, 60], [40, 60]])


class TestGoldens:
    def test_mms_forty_sixty(self):
        assert fd.mms(FORTY_SIXTY, 0) == 40

    def test_nmms_forty_sixty(self):
        assert fd.nmms(FORTY_SIXTY, 0) == 32

    def test_wmms_forty_sixty(self):
        assert fd.wmms(FORTY_SIXTY, 0) == 40

    def test_aps_forty_sixty(self):
        assert fd.aps(FORTY_SIXTY, 0) == 0
        assert fd.aps(FORTY_SIXTY, 1) == 40

    def test_omms_three_agents(self):
        inst = fd.make_instance(["1/5", "1/5", "3/5"], [[40, 60]] * 3)
        assert fd.omms(inst, 2) == 40


class TestEdgeCases:
    def test_fewer_items_than_bundles(self):
        inst = fd.make_instance([1, 1, 1], [[5], [5], [5]])
        assert fd.mms(inst, 0, 1, 3) == 0

    def test_l_equals_d_gives_everything(self):
        inst = fd.make_instance([1, 1], [[3, 4, 5], [1, 1, 1]])
        assert fd.mms(inst, 0, 3, 3) == 12

    def test_more_agents_than_items_zero_shares(self):
        inst = fd.make_instance([1, 2, 3], [[7, 9]] * 3)
        for i in range(3):
            assert fd.nmms(inst, i) == 0
            assert fd.wmms(inst, i) == 0

    def test_tiny_share_gives_zero_omms(self):
        inst = fd.make_instance(["1/100", 1], [[5, 5], [5, 5]])
        assert fd.omms(inst, 0) == 0

    def test_bad_l_d(self):
        with pytest.raises(ParameterError):
            fd.mms(FORTY_SIXTY, 0, 3, 2)

    def test_all_zero_utilities(self):
        inst = fd.make_instance([1, 2], [[0, 0], [0, 0]])
        for kind in fd.SHARE_KINDS:
            assert fd.share_value(inst, 0, kind) == 0


class TestSearchAgainstOracles:
    def test_mms_matches_raw_enumeration(self, rng):
        for _ in range(20):
            inst = random_instance(rng, max_n=3, max_m=6)
            d = rng.randint(1, 3)
            l = rng.randint(1, d)
            assert fd.mms(inst, 0, l, d) == mms_oracle(inst, 0, l, d)

    def test_mms_equal_values_fast_path(self):
        inst = fd.identical_instance([1, 1, 1], 5, value="3/2")
        for d in (2, 3, 4):
            for l in range(1, d + 1):
                assert fd.mms(inst, 0, l, d) == mms_oracle(inst, 0, l, d)

    def test_wmms_matches_raw_enumeration(self, rng):
        for _ in range(15):
            inst = random_instance(rng, max_n=3, max_m=5)
            for i in range(inst.n):
                assert fd.wmms(inst, i) == wmms_oracle(inst, i)

    def test_omms_minimal_d_reduction_is_exact(self, rng):
        for _ in range(10):
            inst = random_instance(rng, max_n=3, max_m=5)
            for i in range(inst.n):
                assert fd.omms(inst, i) == omms_oracle(inst, i)


class TestShareRelations:
    def test_equal_weights_collapse(self, rng):
        for _ in range(15):
            inst = random_instance(rng, max_n=3, max_m=6)
            inst = fd.Instance((Fraction(2),) * inst.n, inst.utilities)
            for i in range(inst.n):
                base = fd.mms(inst, i)
                assert fd.nmms(inst, i) == base
                assert fd.wmms(inst, i) == base
                assert fd.omms(inst, i) == base
                assert fd.aps(inst, i) >= base

    def test_aps_at_least_omms(self, rng):
        for _ in range(15):
            inst = random_instance(rng, max_n=4, max_m=6)
            for i in range(inst.n):
                assert fd.aps(inst, i) >= fd.omms(inst, i)

    def test_scale_covariance(self, rng):
        factor = Fraction(3, 2)
        for _ in range(8):
            inst = random_instance(rng, max_n=3, max_m=5)
            scaled_rows = list(inst.utilities)
            scaled_rows[0] = tuple(u * factor for u in scaled_rows[0])
            scaled = fd.Instance(inst.weights, tuple(scaled_rows))
            for kind in fd.SHARE_KINDS:
                assert fd.share_value(scaled, 0, kind) \
                    == factor * fd.share_value(inst, 0, kind)


class TestApsInternals:
    def test_lp_agrees_with_identical_closed_form(self):
        # the equal-value fast path and the simplex route must coincide
        for n, m, weights in [(2, 4, [1, 3]), (3, 5, ["1/2", "1/3", 2]), (4, 6, [5, 1, 1, 1])]:
            inst = fd.identical_instance(weights, m)
            for i in range(n):
                fast = fd.aps(inst, i)
                lp = shares._aps_lp(inst, i)
                assert fast == lp

    def test_aps_cap(self):
        inst = fd.identical_instance([1, 1], 15)
        with pytest.raises(TooManyItemsError):
            fd.aps(inst, 0)
        assert fd.aps(inst, 0, item_cap=15) == 7

    def test_collection_witness_is_feasible(self):
        value, collection = shares.aps_with_collection(FORTY_SIXTY, 1)
        assert value == 40
        total = sum(weight for _, weight in collection)
        assert total == FORTY_SIXTY.total_weight
        for bundle, _ in collection:
            assert fd.bundle_utility(FORTY_SIXTY, 1, bundle) >= 40
        for g in range(2):
            load = sum(w for bundle, w in collection if g in bundle)
            assert load <= FORTY_SIXTY.weights[1]


class TestSimplex:
    def test_simple_feasible(self):
        # two singletons, enough capacity
        sol = solve_bundle_feasibility([0b01, 0b10], 2, Fraction(1), Fraction(3, 5))
        assert sol is not None and sum(sol) == 1

    def test_infeasible_when_capacity_too_small(self):
        sol = solve_bundle_feasibility([0b01, 0b10, 0b11], 2, Fraction(1), Fraction(2, 5))
        assert sol is None

    def test_empty_bundle_absorbs_weight(self):
        sol = solve_bundle_feasibility([0b00], 2, Fraction(7, 3), Fraction(1, 10))
        assert sol == [Fraction(7, 3)]


class TestBudgets:
    def test_search_budget_exceeded(self):
        rng = random.Random(7)
        values = [[Fraction(rng.randint(1, 50))] * 1 for _ in range(12)]
        inst = fd.make_instance([1, 1, 1],
                                [[Fraction(rng.randint(1, 50)) for _ in range(12)]] * 3)
        with pytest.raises(SearchBudgetExceededError):
            fd.mms(inst, 0, 1, 3, budget=50)


class TestShareReportAndFairness:
    def test_report_matches_functions(self):
        report = fd.share_report(FORTY_SIXTY)
        row = report.rows[0]
        assert (row.mms, row.nmms, row.wmms, row.aps) == (40, 32, 40, 0)
        assert row.mms_partition is not None
        # witness partition really achieves the mms value
        sums = sorted(
            fd.bundle_utility(FORTY_SIXTY, 0, part) for part in row.mms_partition
        )
        assert sums[0] == row.mms

    def test_round_robin_is_one_over_n_nmms(self, rng):
        for _ in range(15):
            inst = random_instance(rng, max_n=3, max_m=6)
            alloc = fd.ordered_round_robin(inst)
            verdict = fd.check_share_fairness(inst, alloc, "nmms", Fraction(1, inst.n))
            assert verdict.satisfied

    def test_aps_fair_allocation(self):
        alloc = fd.make_allocation(FORTY_SIXTY, [[], [0, 1]])
        assert fd.check_share_fairness(FORTY_SIXTY, alloc, "aps", 1).satisfied
        verdict = fd.check_share_fairness(FORTY_SIXTY, alloc, "nmms", Fraction(1, 100))
        assert not verdict.satisfied
        assert verdict.witnesses[0].agents == (0,)

    def test_negative_alpha_rejected(self):
        alloc = fd.make_allocation(FORTY_SIXTY, [[0], [1]])
        with pytest.raises(ParameterError):
            fd.check_share_fairness(FORTY_SIXTY, alloc, "mms", -1)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ParameterError):
            fd.share_value(FORTY_SIXTY, 0, "median")
