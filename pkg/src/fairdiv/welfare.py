"""Optimizing allocation rules and constructive algorithms.

Nash-welfare comparison never touches floats: weights are cleared to integer
powers and products compared by cross multiplication of big integers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .core import (
    Allocation,
    DEFAULT_ENUM_BUDGET,
    IdenticalCounts,
    Instance,
    allocation_from_owners,
    iter_counts,
    rat,
)
from .errors import (
    BudgetExceededError,
    NotBinaryError,
    NotWastelessError,
    PreconditionViolatedError,
)
from . import shares

ZERO = Fraction(0)


@dataclass(frozen=True)
class RuleOutcome:
    """All optima of an optimizing rule plus the canonical one.

    The canonical optimum is the first in allocation-encoding order (owner of
    item 0 varies slowest), i.e. the lexicographically smallest encoding.
    """

    optima: tuple[Allocation, ...]
    canonical: Allocation


@dataclass(frozen=True)
class CountsOutcome:
    """Identical-items analogue of RuleOutcome, over count vectors."""

    optima: tuple[tuple[int, ...], ...]
    canonical: tuple[int, ...]


def _weight_powers(weights: Sequence[Fraction]) -> tuple[int, ...]:
    """Integer exponents proportional to the weights (denominators cleared)."""
    denom_lcm = 1
    for w in weights:
        denom_lcm = denom_lcm * w.denominator // gcd(denom_lcm, w.denominator)
    powers = [w.numerator * (denom_lcm // w.denominator) for w in weights]
    g = 0
    for p in powers:
        g = gcd(g, p)
    return tuple(p // g for p in powers)


def _nash_key(utils: Sequence[Fraction], pow_cache: list[dict]) -> tuple[int, int, int]:
    """(positive count, product numerator, product denominator) for the
    weighted Nash objective restricted to positive-utility agents."""
    count = 0
    num = 1
    den = 1
    for i, u in enumerate(utils):
        if u > 0:
            count += 1
            cached = pow_cache[i].get(u)
            if cached is None:
                p = pow_cache[i]["__power__"]
                cached = (u.numerator**p, u.denominator**p)
                pow_cache[i][u] = cached
            num *= cached[0]
            den *= cached[1]
    return count, num, den


def _nash_better(a: tuple[int, int, int], b: tuple[int, int, int]) -> bool:
    if a[0] != b[0]:
        return a[0] > b[0]
    return a[1] * b[2] > b[1] * a[2]


def _nash_equal(a: tuple[int, int, int], b: tuple[int, int, int]) -> bool:
    return a[0] == b[0] and a[1] * b[2] == b[1] * a[2]


def leximin_key(values: Iterable[Fraction]) -> tuple[Fraction, ...]:
    """Sorted-ascending vector; tuples compare in leximin order."""
    return tuple(sorted(values))


def _weg_terms(inst: Instance) -> list[dict]:
    """Per-agent memo from bundle utility to the egalitarian objective term
    u_i(A_i)/u_i(M) - w_i/w_N; zero-valuation agents contribute the constant
    -w_i/w_N."""
    memos: list[dict] = []
    for i in range(inst.n):
        total = inst.utility_totals[i]
        share = inst.weight_share(i)
        memos.append({"__total__": total, "__share__": share})
    return memos


def _weg_term(memo: dict, u: Fraction) -> Fraction:
    cached = memo.get(u)
    if cached is None:
        total = memo["__total__"]
        share = memo["__share__"]
        cached = -share if total == 0 else u / total - share
        memo[u] = cached
    return cached


def _scan_owner_range(
    inst: Instance, mode: str, start: int, stop: int
) -> tuple[tuple | None, list[tuple[int, ...]]]:
    """Scan allocation encodings [start, stop) and return the best key with
    every owner vector attaining it, in encoding order."""
    n, m = inst.n, inst.m
    rows = inst.utilities
    if mode == "nash":
        powers = _weight_powers(inst.weights)
        pow_cache: list[dict] = [{"__power__": p} for p in powers]

        def key_of(utils):
            return _nash_key(utils, pow_cache)

        better, equal = _nash_better, _nash_equal
    elif mode == "weg":
        memos = _weg_terms(inst)

        def key_of(utils):
            return leximin_key(_weg_term(memos[i], u) for i, u in enumerate(utils))

        def better(a, b):
            return a > b

        def equal(a, b):
            return a == b

    else:
        raise ValueError(f"unknown scan mode {mode!r}")

    owners = _owners_at(start, n, m)
    best_key = None
    optima: list[tuple[int, ...]] = []
    for _ in range(stop - start):
        utils = [ZERO] * n
        for g in range(m):
            o = owners[g]
            utils[o] += rows[o][g]
        key = key_of(utils)
        if best_key is None or better(key, best_key):
            best_key = key
            optima = [tuple(owners)]
        elif equal(key, best_key):
            optima.append(tuple(owners))
        _advance(owners, n)
    return best_key, optima


def _owners_at(index: int, n: int, m: int) -> list[int]:
    owners = [0] * m
    for g in range(m - 1, -1, -1):
        index, owners[g] = divmod(index, n)
    return owners


def _advance(owners: list[int], n: int) -> None:
    for g in range(len(owners) - 1, -1, -1):
        owners[g] += 1
        if owners[g] < n:
            return
        owners[g] = 0


def _optimize(inst: Instance, mode: str, budget: int | None, jobs: int) -> RuleOutcome:
    limit = DEFAULT_ENUM_BUDGET if budget is None else budget
    count = inst.n**inst.m
    if count > limit:
        raise BudgetExceededError(
            f"optimizing over {count} allocations exceeds budget {limit}",
            required=count,
            budget=limit,
        )
    if jobs <= 1 or count < 4 * jobs:
        best_key, optima = _scan_owner_range(inst, mode, 0, count)
    else:
        bounds = [count * k // jobs for k in range(jobs + 1)]
        chunks = [(inst, mode, bounds[k], bounds[k + 1]) for k in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_chunk, chunks))
        best_key = None
        optima = []
        if mode == "nash":
            better, equal = _nash_better, _nash_equal
        else:
            better, equal = (lambda a, b: a > b), (lambda a, b: a == b)
        for key, owners_list in results:
            if key is None:
                continue
            if best_key is None or better(key, best_key):
                best_key = key
                optima = list(owners_list)
            elif equal(key, best_key):
                optima.extend(owners_list)
    allocations = tuple(allocation_from_owners(inst.n, o) for o in optima)
    return RuleOutcome(optima=allocations, canonical=allocations[0])


def _scan_chunk(args):
    return _scan_owner_range(*args)


def max_weighted_nash(
    inst: Instance, budget: int | None = None, jobs: int = 1
) -> RuleOutcome:
    """All maximizers of the weighted Nash product, with the standard tie
    structure: first maximize how many agents get positive utility, then the
    weighted product over those agents."""
    return _optimize(inst, "nash", budget, jobs)


def weg(inst: Instance, budget: int | None = None, jobs: int = 1) -> RuleOutcome:
    """All weighted-egalitarian optima: leximin over the normalized surplus
    u_i(A_i)/u_i(M) - w_i/w_N."""
    return _optimize(inst, "weg", budget, jobs)


def mwnw_identical_counts(weights: Sequence, m: int) -> CountsOutcome:
    """Weighted-Nash optima over identical items, in count space.

    For identical items every allocation with the same counts has the same
    objective, so the count-level optimum set characterizes all optima.
    """
    w = tuple(rat(x) for x in weights)
    powers = _weight_powers(w)
    best: tuple[int, int] | None = None  # (positive count, product)
    optima: list[tuple[int, ...]] = []
    for counts in iter_counts(m, len(w)):
        positive = sum(1 for c in counts if c > 0)
        product = 1
        for c, p in zip(counts, powers):
            if c > 0:
                product *= c**p
        key = (positive, product)
        if best is None or key > best:
            best = key
            optima = [counts]
        elif key == best:
            optima.append(counts)
    return CountsOutcome(optima=tuple(optima), canonical=optima[0])


def weg_identical_counts(weights: Sequence, m: int) -> CountsOutcome:
    """Exhaustive leximin optimum set over identical-item count vectors."""
    w = tuple(rat(x) for x in weights)
    total = sum(w, ZERO)
    quotas = [wi / total * m for wi in w]
    best_key = None
    optima: list[tuple[int, ...]] = []
    for counts in iter_counts(m, len(w)):
        key = leximin_key(c - q for c, q in zip(counts, quotas))
        if best_key is None or key > best_key:
            best_key = key
            optima = [counts]
        elif key == best_key:
            optima.append(counts)
    return CountsOutcome(optima=tuple(optima), canonical=optima[0])


def weg_identical(weights: Sequence, m: int) -> IdenticalCounts:
    """Leximin-optimal integer counts for identical items, without search.

    Seed with largest remainders (floors, then +1 to the biggest fractional
    parts), then apply single-item transfers until none improves the leximin
    vector. Agrees with weg_identical_counts on every instance.
    """
    w = tuple(rat(x) for x in weights)
    n = len(w)
    total = sum(w, ZERO)
    quotas = [wi / total * m for wi in w]
    counts = [q.numerator // q.denominator for q in quotas]
    remainder = m - sum(counts)
    by_fraction = sorted(range(n), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in by_fraction[:remainder]:
        counts[i] += 1

    def key_of(c: Sequence[int]) -> tuple[Fraction, ...]:
        return leximin_key(ci - q for ci, q in zip(c, quotas))

    current = key_of(counts)
    improved = True
    while improved:
        improved = False
        for i in range(n):
            if counts[i] == 0:
                continue
            for j in range(n):
                if i == j:
                    continue
                counts[i] -= 1
                counts[j] += 1
                candidate = key_of(counts)
                if candidate > current:
                    current = candidate
                    improved = True
                    break
                counts[i] += 1
                counts[j] -= 1
            if improved:
                break
    return IdenticalCounts(tuple(counts))


def ordered_round_robin(inst: Instance) -> Allocation:
    """Unweighted round robin with agents ordered by weight descending
    (ties by index); each picks her favourite remaining item."""
    order = sorted(range(inst.n), key=lambda i: (-inst.weights[i], i))
    remaining = list(range(inst.m))
    owners = [0] * inst.m
    turn = 0
    while remaining:
        agent = order[turn % inst.n]
        row = inst.utilities[agent]
        best = max(remaining, key=lambda g: (row[g], -g))
        owners[best] = agent
        remaining.remove(best)
        turn += 1
    return allocation_from_owners(inst.n, owners)


def half_nmms_allocate(inst: Instance, budget: int | None = None) -> Allocation:
    """Greedy algorithm guaranteeing everyone half her normalized maximin
    share, provided no single item exceeds an agent's NMMS.

    Utilities are rescaled so each agent's NMMS equals her normalized weight
    times n; while some agent is below half her target, the highest-value
    (unsatisfied agent, free item) pair is served. Leftover items go to
    agent 0.
    """
    n, m = inst.n, inst.m
    nmms_values = [shares.nmms(inst, i, budget=budget) for i in range(n)]
    for i in range(n):
        for g in range(m):
            if inst.utilities[i][g] > nmms_values[i]:
                raise PreconditionViolatedError(
                    f"u_{i}(item {g}) = {inst.utilities[i][g]} exceeds NMMS_{i} = {nmms_values[i]}"
                )
    norm = [inst.weight_share(i) for i in range(n)]
    scale = [
        (norm[i] * n / nmms_values[i]) if nmms_values[i] > 0 else ZERO for i in range(n)
    ]
    target = [norm[i] * n / 2 for i in range(n)]
    active = [i for i in range(n) if nmms_values[i] > 0]
    value = [ZERO] * n
    free = set(range(m))
    owners = [0] * m
    while free:
        unsatisfied = [i for i in active if value[i] < target[i]]
        if not unsatisfied:
            break
        best_pair = None
        best_value = None
        for i in unsatisfied:
            row = inst.utilities[i]
            for g in free:
                v = row[g] * scale[i]
                if best_value is None or v > best_value or (
                    v == best_value and (i, g) < best_pair
                ):
                    best_value = v
                    best_pair = (i, g)
        i, g = best_pair
        owners[g] = i
        value[i] += best_value
        free.remove(g)
    # remaining items are appended to agent 0's bundle
    for g in free:
        owners[g] = 0
    return allocation_from_owners(n, owners)


def weg_binary_quota_graph(
    inst: Instance, alloc: Allocation
) -> dict[int, tuple[int, ...]]:
    """Quota graph for binary valuations and a wasteless allocation.

    Edge i -> j when i holds fewer desired items than her proportional count
    w_i * z_i while j holds more than w_j * z_i of the items i desires (with
    weights normalized to sum 1). Wasteless allocations yield acyclic graphs.
    """
    if not inst.binary:
        raise NotBinaryError("quota graph requires 0/1 utilities")
    desired = [frozenset(g for g in range(inst.m) if inst.utilities[i][g] == 1) for i in range(inst.n)]
    for i in range(inst.n):
        if not alloc.bundles[i] <= desired[i]:
            raise NotWastelessError(
                f"agent {i} holds items she values at zero; allocation is not wasteless"
            )
    share = [inst.weight_share(i) for i in range(inst.n)]
    edges: dict[int, tuple[int, ...]] = {}
    for i in range(inst.n):
        z = len(desired[i])
        if len(alloc.bundles[i]) >= share[i] * z:
            edges[i] = ()
            continue
        out = []
        for j in range(inst.n):
            if j == i:
                continue
            if len(alloc.bundles[j] & desired[i]) > share[j] * z:
                out.append(j)
        edges[i] = tuple(out)
    return edges


def graph_is_acyclic(edges: dict[int, tuple[int, ...]]) -> bool:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in edges}

    def dfs(u: int) -> bool:
        color[u] = GRAY
        for v in edges.get(u, ()):
            if color.get(v, WHITE) == GRAY:
                return False
            if color.get(v, WHITE) == WHITE and not dfs(v):
                return False
        color[u] = BLACK
        return True

    return all(color[v] != WHITE or dfs(v) for v in list(edges))
