"""Exact computation of the five share thresholds and share-based fairness.

The partition searches run over integers (each agent's utility row is scaled
by a common factor first) with canonical symmetry breaking and exact bound
pruning. Budgets count visited search states and fail loudly; nothing is ever
silently approximated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Sequence

from .core import Allocation, Instance, iter_counts, rat
from .errors import ParameterError, SearchBudgetExceededError, TooManyItemsError
from .fairness import AllocationProfile, Verdict, Witness
from ._simplex import solve_bundle_feasibility

ZERO = Fraction(0)

DEFAULT_SEARCH_BUDGET = 10**7
DEFAULT_APS_ITEM_CAP = 14

SHARE_KINDS = ("mms", "nmms", "wmms", "omms", "aps")


def _scaled_row(row: Sequence[Fraction]) -> tuple[tuple[int, ...], tuple[int, ...], Fraction]:
    """Split a utility row into (sorted scaled values, matching item ids, scale).

    Zero-valued items are dropped: they change no bundle value. The returned
    integers are row values divided by `scale`, sorted descending.
    """
    nonzero = [(v, g) for g, v in enumerate(row) if v > 0]
    nonzero.sort(key=lambda p: (-p[0], p[1]))
    if not nonzero:
        return (), (), Fraction(1)
    denom_lcm = 1
    for v, _ in nonzero:
        denom_lcm = denom_lcm * v.denominator // gcd(denom_lcm, v.denominator)
    nums = [v.numerator * (denom_lcm // v.denominator) for v, _ in nonzero]
    g = 0
    for x in nums:
        g = gcd(g, x)
    scale = Fraction(g, denom_lcm)
    return tuple(x // g for x in nums), tuple(g_ for _, g_ in nonzero), scale


def _sum_l_smallest(sums: list[int], pad_to: int, l: int) -> int:
    padded = sorted(sums)
    zeros = pad_to - len(sums)
    if zeros >= l:
        return 0
    return sum(padded[: l - zeros])


def _water_level(sums: list[int], pad_to: int, budget_left: int) -> Fraction:
    """Largest level L with sum(max(0, L - s)) <= budget_left over all d slots."""
    s = [0] * (pad_to - len(sums)) + sorted(sums)
    acc = 0
    for k in range(1, pad_to + 1):
        acc += s[k - 1]
        level = Fraction(budget_left + acc, k)
        if k == pad_to or level <= s[k]:
            return level
    raise AssertionError("water level search cannot fall through")


@lru_cache(maxsize=4096)
def _max_min_l_of_d(
    vals: tuple[int, ...], l: int, d: int, budget: int
) -> tuple[int, tuple[tuple[int, ...], ...]]:
    """Maximize the sum of the l smallest bundle values over partitions of
    `vals` (descending positive ints) into at most d bundles.

    Returns (value, partition by positions into exactly d bundles). Canonical
    search: a new bundle may only open as the next unused one, and sibling
    bundles with equal sums are visited once.
    """
    m = len(vals)
    if m == 0:
        return 0, tuple(() for _ in range(d))

    # equal values: balanced bundle sizes are optimal
    if vals[0] == vals[-1]:
        v = vals[0]
        q, r = divmod(m, d)
        sizes = [q + 1] * r + [q] * (d - r)
        value = v * (l * q + max(0, l - (d - r)))
        partition = []
        start = 0
        for size in sorted(sizes, reverse=True):
            partition.append(tuple(range(start, start + size)))
            start += size
        return value, tuple(partition)

    suffix = [0] * (m + 1)
    for k in range(m - 1, -1, -1):
        suffix[k] = suffix[k + 1] + vals[k]

    # greedy seed: next value to the currently smallest bundle
    seed_sums = [0] * d
    seed_parts: list[list[int]] = [[] for _ in range(d)]
    for k, v in enumerate(vals):
        b = min(range(d), key=lambda i: seed_sums[i])
        seed_sums[b] += v
        seed_parts[b].append(k)
    best = _sum_l_smallest(seed_sums, d, l)
    best_partition = tuple(tuple(p) for p in seed_parts)

    sums: list[int] = []
    parts: list[list[int]] = []
    nodes = 0

    def descend(k: int) -> None:
        nonlocal best, best_partition, nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceededError(
                f"partition search exceeded {budget} states", budget=budget
            )
        if k == m:
            value = _sum_l_smallest(sums, d, l)
            if value > best:
                best = value
                filled = [tuple(p) for p in parts]
                filled.extend(() for _ in range(d - len(filled)))
                best_partition = tuple(filled)
            return
        remaining = suffix[k]
        if l == 1:
            if _water_level(sums, d, remaining) <= best:
                return
        elif _sum_l_smallest(sums, d, l) + remaining <= best:
            return
        v = vals[k]
        tried: set[int] = set()
        for b in range(len(sums)):
            if sums[b] in tried:
                continue
            tried.add(sums[b])
            sums[b] += v
            parts[b].append(k)
            descend(k + 1)
            sums[b] -= v
            parts[b].pop()
        if len(sums) < d:
            sums.append(v)
            parts.append([k])
            descend(k + 1)
            sums.pop()
            parts.pop()

    descend(0)
    return best, best_partition


def mms(
    inst: Instance,
    agent: int,
    l: int = 1,
    d: int | None = None,
    budget: int | None = None,
) -> Fraction:
    """Maximin share: best-over-d-partitions worst union of l bundles.

    With additive utilities the worst union of l bundles is the sum of the l
    smallest bundle values. Defaults to the classic 1-out-of-n share.
    """
    value, _ = mms_with_partition(inst, agent, l, d, budget)
    return value


def mms_with_partition(
    inst: Instance,
    agent: int,
    l: int = 1,
    d: int | None = None,
    budget: int | None = None,
) -> tuple[Fraction, tuple[tuple[int, ...], ...]]:
    """Like `mms` but also returns a witness d-partition (item indices)."""
    d = inst.n if d is None else d
    if l < 1 or d < 1 or l > d:
        raise ParameterError(f"need 1 <= l <= d, got l={l}, d={d}")
    budget = DEFAULT_SEARCH_BUDGET if budget is None else budget
    vals, items, scale = _scaled_row(inst.row(agent))
    raw, positions = _max_min_l_of_d(vals, l, d, budget)
    partition = [list(items[p] for p in part) for part in positions]
    # zero-valued items do not affect any bundle value; park them in bundle 0
    placed = {g for part in partition for g in part}
    partition[0].extend(g for g in range(inst.m) if g not in placed)
    return scale * raw, tuple(tuple(sorted(p)) for p in partition)


def nmms(inst: Instance, agent: int, budget: int | None = None) -> Fraction:
    """Normalized maximin share: (w_i/w_N) * n * MMS_i."""
    return inst.weight_share(agent) * inst.n * mms(inst, agent, budget=budget)


def _weighted_level(
    sums: list[int], weights: tuple[Fraction, ...], budget_left: int
) -> Fraction:
    """Largest r with sum(max(0, r*w_j - s_j)) <= budget_left."""
    order = sorted(range(len(weights)), key=lambda j: Fraction(sums[j]) / weights[j])
    acc_v = Fraction(0)
    acc_w = Fraction(0)
    for k, j in enumerate(order, start=1):
        acc_v += sums[j]
        acc_w += weights[j]
        level = (budget_left + acc_v) / acc_w
        if k == len(order):
            return level
        nxt = order[k]
        if level <= Fraction(sums[nxt]) / weights[nxt]:
            return level
    raise AssertionError("weighted level search cannot fall through")


def _wmms_search(
    vals: tuple[int, ...], weights: tuple[Fraction, ...], budget: int
) -> tuple[Fraction, tuple[tuple[int, ...], ...]]:
    """Maximize min_j bundle_j/w_j over assignments of vals to labeled slots.

    Slots carry distinct weights, so symmetry is broken only between slots
    that agree on both weight and current sum.
    """
    n = len(weights)
    m = len(vals)
    if m < n:
        parts = tuple((k,) if k < m else () for k in range(n))
        return Fraction(0), parts

    # equal values: only bundle sizes matter, enumerate integer compositions
    if vals and vals[0] == vals[-1]:
        v = vals[0]
        best_ratio = Fraction(-1)
        best_counts: tuple[int, ...] = ()
        for counts in iter_counts(m, n):
            ratio = min(Fraction(c * v) / w for c, w in zip(counts, weights))
            if ratio > best_ratio:
                best_ratio = ratio
                best_counts = counts
        parts = []
        start = 0
        for c in best_counts:
            parts.append(tuple(range(start, start + c)))
            start += c
        return best_ratio, tuple(parts)

    suffix = [0] * (m + 1)
    for k in range(m - 1, -1, -1):
        suffix[k] = suffix[k + 1] + vals[k]

    sums = [0] * n
    parts: list[list[int]] = [[] for _ in range(n)]
    best = Fraction(-1)
    best_partition: tuple[tuple[int, ...], ...] = tuple(() for _ in range(n))

    # greedy seed: next value to the neediest slot
    seed_sums = [0] * n
    seed_parts: list[list[int]] = [[] for _ in range(n)]
    for k, v in enumerate(vals):
        j = min(range(n), key=lambda s: (Fraction(seed_sums[s]) / weights[s], s))
        seed_sums[j] += v
        seed_parts[j].append(k)
    best = min(Fraction(seed_sums[j]) / weights[j] for j in range(n))
    best_partition = tuple(tuple(p) for p in seed_parts)

    nodes = 0

    def descend(k: int) -> None:
        nonlocal best, best_partition, nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceededError(
                f"partition search exceeded {budget} states", budget=budget
            )
        if k == m:
            ratio = min(Fraction(sums[j]) / weights[j] for j in range(n))
            if ratio > best:
                best = ratio
                best_partition = tuple(tuple(p) for p in parts)
            return
        if _weighted_level(sums, weights, suffix[k]) <= best:
            return
        v = vals[k]
        tried: set[tuple[Fraction, int]] = set()
        for j in range(n):
            key = (weights[j], sums[j])
            if key in tried:
                continue
            tried.add(key)
            sums[j] += v
            parts[j].append(k)
            descend(k + 1)
            sums[j] -= v
            parts[j].pop()

    descend(0)
    return best, best_partition


def wmms(inst: Instance, agent: int, budget: int | None = None) -> Fraction:
    """Weighted maximin share: w_i times the best worst bundle-to-weight ratio
    over labeled n-partitions."""
    value, _ = wmms_with_partition(inst, agent, budget)
    return value


def wmms_with_partition(
    inst: Instance, agent: int, budget: int | None = None
) -> tuple[Fraction, tuple[tuple[int, ...], ...]]:
    budget = DEFAULT_SEARCH_BUDGET if budget is None else budget
    vals, items, scale = _scaled_row(inst.row(agent))
    ratio, positions = _wmms_search(vals, inst.weights, budget)
    if ratio < 0:
        ratio = Fraction(0)
    partition = [list(items[p] for p in part) for part in positions]
    placed = {g for part in partition for g in part}
    partition[0].extend(g for g in range(inst.m) if g not in placed)
    value = inst.weights[agent] * scale * ratio
    return value, tuple(tuple(sorted(p)) for p in partition)


def omms(inst: Instance, agent: int, budget: int | None = None) -> Fraction:
    """Ordinal maximin share: best l-out-of-d share over l/d <= w_i/w_N, d <= m."""
    value, _, _ = omms_with_witness(inst, agent, budget)
    return value


def omms_with_witness(
    inst: Instance, agent: int, budget: int | None = None
) -> tuple[Fraction, tuple[int, int] | None, tuple[tuple[int, ...], ...] | None]:
    """OMMS value plus the achieving (l, d) pair and its witness partition.

    For a fixed l, merging bundles can only raise the sum of the l smallest,
    so only the smallest d with l/d <= w_i/w_N needs to be searched.
    """
    budget = DEFAULT_SEARCH_BUDGET if budget is None else budget
    share = inst.weight_share(agent)
    vals, items, scale = _scaled_row(inst.row(agent))
    total = sum(vals)
    best = ZERO
    best_pair: tuple[int, int] | None = None
    best_partition: tuple[tuple[int, ...], ...] | None = None
    for l in range(1, inst.m + 1):
        ratio = Fraction(l) / share
        d = max(l, -(-ratio.numerator // ratio.denominator))
        if d > inst.m:
            break
        if vals and Fraction(l * total, d) * scale <= best:
            continue
        raw, positions = _max_min_l_of_d(vals, l, d, budget)
        value = scale * raw
        if value > best:
            best = value
            best_pair = (l, d)
            partition = [list(items[p] for p in part) for part in positions]
            placed = {g for part in partition for g in part}
            partition[0].extend(g for g in range(inst.m) if g not in placed)
            best_partition = tuple(tuple(sorted(p)) for p in partition)
    return best, best_pair, best_partition


def aps(inst: Instance, agent: int, item_cap: int | None = None) -> Fraction:
    """AnyPrice share via the exact feasibility formulation.

    The optimum equals some subset utility, so we binary-search the sorted
    distinct subset sums, deciding each threshold with a rational simplex
    over the minimal bundles reaching it.
    """
    value, _ = aps_with_collection(inst, agent, item_cap)
    return value


def aps_with_collection(
    inst: Instance, agent: int, item_cap: int | None = None
) -> tuple[Fraction, tuple[tuple[tuple[int, ...], Fraction], ...] | None]:
    cap = DEFAULT_APS_ITEM_CAP if item_cap is None else item_cap
    if inst.m > cap:
        raise TooManyItemsError(
            f"aps supports at most {cap} items (got {inst.m}); raise the cap explicitly"
        )
    vals, items, scale = _scaled_row(inst.row(agent))
    if not vals:
        return ZERO, None
    if vals[0] == vals[-1]:
        # all valued items identical: the share is a whole number of items
        q = inst.weight_share(agent) * len(vals)
        return vals[0] * scale * (q.numerator // q.denominator), None
    return _aps_lp_scaled(inst, agent, vals, items, scale)


def _aps_lp(inst: Instance, agent: int) -> Fraction:
    """AnyPrice share via the simplex route only, bypassing the equal-value
    closed form; used to cross-validate the fast path."""
    vals, items, scale = _scaled_row(inst.row(agent))
    if not vals:
        return ZERO
    value, _ = _aps_lp_scaled(inst, agent, vals, items, scale)
    return value


def _aps_lp_scaled(
    inst: Instance,
    agent: int,
    vals: tuple[int, ...],
    items: tuple[int, ...],
    scale: Fraction,
) -> tuple[Fraction, tuple[tuple[tuple[int, ...], Fraction], ...]]:
    mp = len(vals)
    total_weight = inst.total_weight
    cap_weight = inst.weights[agent]
    size = 1 << mp
    subset = [0] * size
    for mask in range(1, size):
        low = mask & -mask
        subset[mask] = subset[mask ^ low] + vals[low.bit_length() - 1]
    candidates = sorted(set(subset))

    def minimal_columns(z: int) -> list[int]:
        # only inclusion-minimal bundles reaching z matter: shifting weight
        # from a superset to a minimal subset never tightens a constraint
        cols = []
        for mask in range(size):
            if subset[mask] < z:
                continue
            minimal = True
            rest = mask
            while rest:
                low = rest & -rest
                if subset[mask] - vals[low.bit_length() - 1] >= z:
                    minimal = False
                    break
                rest ^= low
            if minimal:
                cols.append(mask)
        return cols

    def feasible(z: int) -> list[Fraction] | None:
        return solve_bundle_feasibility(minimal_columns(z), mp, total_weight, cap_weight)

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if feasible(candidates[mid]) is not None:
            lo = mid
        else:
            hi = mid - 1
    best = candidates[lo]
    columns = minimal_columns(best)
    solution = solve_bundle_feasibility(columns, mp, total_weight, cap_weight)
    collection = []
    for mask, lam in zip(columns, solution):
        if lam > 0:
            bundle = tuple(items[b] for b in range(mp) if mask & (1 << b))
            collection.append((bundle, lam))
    return scale * best, tuple(collection)


def share_value(
    inst: Instance,
    agent: int,
    kind: str,
    budget: int | None = None,
    item_cap: int | None = None,
) -> Fraction:
    if kind == "mms":
        return mms(inst, agent, budget=budget)
    if kind == "nmms":
        return nmms(inst, agent, budget=budget)
    if kind == "wmms":
        return wmms(inst, agent, budget=budget)
    if kind == "omms":
        return omms(inst, agent, budget=budget)
    if kind == "aps":
        return aps(inst, agent, item_cap=item_cap)
    raise ParameterError(f"unknown share kind {kind!r}; expected one of {SHARE_KINDS}")


def share_vector(
    inst: Instance, kind: str, budget: int | None = None, item_cap: int | None = None
) -> tuple[Fraction, ...]:
    return tuple(share_value(inst, i, kind, budget, item_cap) for i in range(inst.n))


@dataclass(frozen=True)
class AgentShares:
    agent: int
    mms: Fraction
    nmms: Fraction
    wmms: Fraction
    omms: Fraction
    aps: Fraction
    mms_partition: tuple[tuple[int, ...], ...] | None = None
    wmms_partition: tuple[tuple[int, ...], ...] | None = None
    omms_pair: tuple[int, int] | None = None
    aps_collection: tuple[tuple[tuple[int, ...], Fraction], ...] | None = None


@dataclass(frozen=True)
class ShareReport:
    rows: tuple[AgentShares, ...]

    def values(self, kind: str) -> tuple[Fraction, ...]:
        return tuple(getattr(row, kind) for row in self.rows)


def share_report(
    inst: Instance,
    budget: int | None = None,
    item_cap: int | None = None,
    with_witnesses: bool = True,
) -> ShareReport:
    """Compute all five shares for every agent.

    Budget failures are re-raised with the offending share kind prepended.
    """

    def compute(kind, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SearchBudgetExceededError as exc:
            raise SearchBudgetExceededError(f"{kind}: {exc}", budget=exc.budget) from exc

    rows = []
    for i in range(inst.n):
        mms_value, mms_part = compute("mms", mms_with_partition, inst, i, budget=budget)
        wmms_value, wmms_part = compute("wmms", wmms_with_partition, inst, i, budget=budget)
        omms_value, omms_pair, _ = compute("omms", omms_with_witness, inst, i, budget=budget)
        aps_value, aps_coll = aps_with_collection(inst, i, item_cap=item_cap)
        rows.append(
            AgentShares(
                agent=i,
                mms=mms_value,
                nmms=inst.weight_share(i) * inst.n * mms_value,
                wmms=wmms_value,
                omms=omms_value,
                aps=aps_value,
                mms_partition=mms_part if with_witnesses else None,
                wmms_partition=wmms_part if with_witnesses else None,
                omms_pair=omms_pair if with_witnesses else None,
                aps_collection=aps_coll if with_witnesses else None,
            )
        )
    return ShareReport(rows=tuple(rows))


def check_share_fairness(
    inst: Instance,
    alloc: Allocation,
    kind: str,
    alpha: Fraction | int | str,
    budget: int | None = None,
    item_cap: int | None = None,
    include_satisfied: bool = False,
) -> Verdict:
    """Does every agent receive at least alpha times her share threshold?"""
    alpha = rat(alpha)
    if alpha < 0:
        raise ParameterError(f"alpha must be >= 0, got {alpha}")
    prof = AllocationProfile.from_allocation(inst, alloc)
    witnesses = []
    satisfied = True
    for i in range(inst.n):
        threshold = alpha * share_value(inst, i, kind, budget, item_cap)
        margin = prof.bundle_values[i][i] - threshold
        if margin < 0:
            satisfied = False
        if margin < 0 or include_satisfied:
            witnesses.append(Witness(agents=(i,), margin=margin))
    return Verdict(satisfied=satisfied, witnesses=tuple(witnesses))
