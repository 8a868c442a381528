"""Verifiers for comparison-based fairness notions.

Each checker returns a Verdict whose witnesses carry exact rational margins
(the slack of the binding inequality; >= 0 means satisfied). By default only
violations are recorded; pass include_satisfied=True to get a margin for
every agent or pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Sequence

from .core import Allocation, Instance, rat
from .errors import NotIdenticalItemsError, ParameterError

ZERO = Fraction(0)


@dataclass(frozen=True)
class Witness:
    """One evaluated inequality: the agents involved, its slack, and the
    single-item set the relaxation chose (empty when no item applies)."""

    agents: tuple[int, ...]
    margin: Fraction
    items: tuple[int, ...] = ()
    prefix: int | None = None

    @property
    def violated(self) -> bool:
        return self.margin < 0


@dataclass(frozen=True)
class Verdict:
    satisfied: bool
    witnesses: tuple[Witness, ...] = ()

    def violations(self) -> tuple[Witness, ...]:
        return tuple(w for w in self.witnesses if w.violated)


@dataclass(frozen=True)
class QuotaReport:
    """Item-count quotas q_i = (w_i/w_N) * m for identical items."""

    quotas: tuple[Fraction, ...]
    counts: tuple[int, ...]
    lower_ok: tuple[bool, ...]
    upper_ok: tuple[bool, ...]

    @property
    def all_lower(self) -> bool:
        return all(self.lower_ok)

    @property
    def all_upper(self) -> bool:
        return all(self.upper_ok)

    @property
    def satisfied(self) -> bool:
        return self.all_lower and self.all_upper


@dataclass(frozen=True)
class AllocationProfile:
    """Precomputed per-allocation quantities shared by the pair checkers.

    bundle_values[i][j] is u_i(A_j); best_in[i][j] is (value, item) of i's
    favourite item inside A_j (None when A_j is empty); best_out[i] is i's
    favourite item outside A_i (None when A_i = M).
    """

    inst: Instance
    bundle_values: tuple[tuple[Fraction, ...], ...]
    best_in: tuple[tuple[tuple[Fraction, int] | None, ...], ...]
    best_out: tuple[tuple[Fraction, int] | None, ...]
    counts: tuple[int, ...]

    @classmethod
    def from_owners(cls, inst: Instance, owners: Sequence[int]) -> "AllocationProfile":
        n = inst.n
        values = [[ZERO] * n for _ in range(n)]
        best_in: list[list[tuple[Fraction, int] | None]] = [[None] * n for _ in range(n)]
        counts = [0] * n
        for g, j in enumerate(owners):
            counts[j] += 1
            for i in range(n):
                u = inst.utilities[i][g]
                values[i][j] += u
                cur = best_in[i][j]
                if cur is None or u > cur[0]:
                    best_in[i][j] = (u, g)
        best_out: list[tuple[Fraction, int] | None] = []
        for i in range(n):
            best: tuple[Fraction, int] | None = None
            for j in range(n):
                if j == i:
                    continue
                cand = best_in[i][j]
                if cand is not None and (best is None or cand[0] > best[0]):
                    best = cand
            best_out.append(best)
        return cls(
            inst=inst,
            bundle_values=tuple(tuple(row) for row in values),
            best_in=tuple(tuple(row) for row in best_in),
            best_out=tuple(best_out),
            counts=tuple(counts),
        )

    @classmethod
    def from_allocation(cls, inst: Instance, alloc: Allocation) -> "AllocationProfile":
        if alloc.m != inst.m or alloc.n != inst.n:
            raise ParameterError("allocation does not match the instance dimensions")
        return cls.from_owners(inst, alloc.owners)


def _check_unit_interval(name: str, value: Fraction) -> Fraction:
    value = rat(value)
    if value < 0 or value > 1:
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")
    return value


def weighted_envy(inst: Instance, alloc: Allocation, i: int, j: int) -> Fraction:
    """max{0, u_i(A_j)/w_j - u_i(A_i)/w_i}."""
    if i == j:
        raise ParameterError("weighted envy is defined for distinct agents")
    prof = AllocationProfile.from_allocation(inst, alloc)
    envy = prof.bundle_values[i][j] / inst.weights[j] - prof.bundle_values[i][i] / inst.weights[i]
    return max(ZERO, envy)


def wef_pair_margin(
    prof: AllocationProfile, i: int, j: int, x: Fraction, y: Fraction
) -> tuple[Fraction, tuple[int, ...]]:
    """Slack of the WEF(x,y) inequality for the ordered pair (i, j).

    The removable/copyable set B is the singleton of i's favourite item in
    A_j; the inequality is monotone in u_i(B), so that choice is optimal.
    """
    inst = prof.inst
    wi, wj = inst.weights[i], inst.weights[j]
    best = prof.best_in[i][j]
    b, items = (best[0], (best[1],)) if best is not None else (ZERO, ())
    lhs = (prof.bundle_values[i][i] + y * b) / wi
    rhs = (prof.bundle_values[i][j] - x * b) / wj
    return lhs - rhs, items


def wprop_agent_margin(
    prof: AllocationProfile, i: int, x: Fraction, y: Fraction
) -> tuple[Fraction, tuple[int, ...]]:
    """Slack of the WPROP(x,y) inequality for agent i (B = best outside item)."""
    inst = prof.inst
    share = inst.weights[i] / inst.total_weight
    best = prof.best_out[i]
    b, items = (best[0], (best[1],)) if best is not None else (ZERO, ())
    threshold = share * inst.utility_totals[i] - (share * inst.n * x + y) * b
    return prof.bundle_values[i][i] - threshold, items


def wprop_star_agent_margin(
    prof: AllocationProfile, i: int, x: Fraction, y: Fraction
) -> tuple[Fraction, tuple[int, ...]]:
    """Slack of the WPROP*(x,y) inequality for agent i.

    B is the best item outside A_i; each B_j is i's favourite item inside A_j.
    """
    inst = prof.inst
    wi = inst.weights[i]
    best = prof.best_out[i]
    b, items = (best[0], (best[1],)) if best is not None else (ZERO, ())
    removable = ZERO
    for j in range(inst.n):
        if j == i:
            continue
        cand = prof.best_in[i][j]
        if cand is not None:
            removable += cand[0]
    lhs = (prof.bundle_values[i][i] + y * b) / wi
    rhs = (inst.utility_totals[i] - x * removable) / inst.total_weight
    return lhs - rhs, items


def _pair_verdict(
    inst: Instance,
    alloc: Allocation,
    margin_fn,
    include_satisfied: bool,
) -> Verdict:
    prof = AllocationProfile.from_allocation(inst, alloc)
    witnesses: list[Witness] = []
    satisfied = True
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j:
                continue
            margin, items = margin_fn(prof, i, j)
            if margin < 0:
                satisfied = False
            if margin < 0 or include_satisfied:
                witnesses.append(Witness(agents=(i, j), margin=margin, items=items))
    return Verdict(satisfied=satisfied, witnesses=tuple(witnesses))


def _agent_verdict(
    inst: Instance,
    alloc: Allocation,
    margin_fn,
    include_satisfied: bool,
) -> Verdict:
    prof = AllocationProfile.from_allocation(inst, alloc)
    witnesses: list[Witness] = []
    satisfied = True
    for i in range(inst.n):
        margin, items = margin_fn(prof, i)
        if margin < 0:
            satisfied = False
        if margin < 0 or include_satisfied:
            witnesses.append(Witness(agents=(i,), margin=margin, items=items))
    return Verdict(satisfied=satisfied, witnesses=tuple(witnesses))


def check_wef(
    inst: Instance,
    alloc: Allocation,
    x: Fraction,
    y: Fraction,
    include_satisfied: bool = False,
) -> Verdict:
    """Weighted envy-freeness up to one item, with removal fraction x and
    copy fraction y."""
    x = _check_unit_interval("x", x)
    y = _check_unit_interval("y", y)
    return _pair_verdict(
        inst, alloc, lambda p, i, j: wef_pair_margin(p, i, j, x, y), include_satisfied
    )


def check_wprop(
    inst: Instance,
    alloc: Allocation,
    x: Fraction,
    y: Fraction,
    include_satisfied: bool = False,
) -> Verdict:
    """Weighted proportionality up to one item."""
    x = _check_unit_interval("x", x)
    y = _check_unit_interval("y", y)
    return _agent_verdict(
        inst, alloc, lambda p, i: wprop_agent_margin(p, i, x, y), include_satisfied
    )


def check_wprop_star(
    inst: Instance,
    alloc: Allocation,
    x: Fraction,
    y: Fraction,
    include_satisfied: bool = False,
) -> Verdict:
    """Strengthened weighted proportionality: one removable item per other
    agent's bundle instead of the factor n."""
    x = _check_unit_interval("x", x)
    y = _check_unit_interval("y", y)
    return _agent_verdict(
        inst, alloc, lambda p, i: wprop_star_agent_margin(p, i, x, y), include_satisfied
    )


ONE = Fraction(1)


def wwef1_pair_margin(
    prof: AllocationProfile, i: int, j: int
) -> tuple[Fraction, tuple[int, ...]]:
    """Best slack over the removal (x=1,y=0) and copy (x=0,y=1) variants."""
    m_remove, items = wef_pair_margin(prof, i, j, ONE, ZERO)
    m_copy, _ = wef_pair_margin(prof, i, j, ZERO, ONE)
    return max(m_remove, m_copy), items


def check_wwef1(
    inst: Instance, alloc: Allocation, include_satisfied: bool = False
) -> Verdict:
    """Weak weighted envy-freeness up to one item: each pair may individually
    use either the removal or the copy variant."""
    return _pair_verdict(inst, alloc, wwef1_pair_margin, include_satisfied)


def check_oef1(inst: Instance, alloc: Allocation) -> Verdict:
    """Ordered EF1: unweighted EF1, plus a renumbering with non-increasing
    weights in which nobody envies a later agent.

    Feasibility of the ordering is decided constructively: agents are split
    into descending weight tiers; envy from a heavier agent toward a lighter
    one is an immediate violation, and inside a tier the envy relation must
    be acyclic so a topological order exists.
    """
    prof = AllocationProfile.from_allocation(inst, alloc)
    n = inst.n
    witnesses: list[Witness] = []
    satisfied = True

    # (i) unweighted EF1
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            best = prof.best_in[i][j]
            b = best[0] if best is not None else ZERO
            margin = prof.bundle_values[i][i] - (prof.bundle_values[i][j] - b)
            if margin < 0:
                satisfied = False
                witnesses.append(
                    Witness(agents=(i, j), margin=margin, items=(best[1],) if best else ())
                )

    # (ii) ordering feasibility
    envies = [
        [prof.bundle_values[i][j] > prof.bundle_values[i][i] for j in range(n)]
        for i in range(n)
    ]
    for i in range(n):
        for j in range(n):
            if i != j and envies[i][j] and inst.weights[i] > inst.weights[j]:
                satisfied = False
                witnesses.append(
                    Witness(
                        agents=(i, j),
                        margin=prof.bundle_values[i][i] - prof.bundle_values[i][j],
                    )
                )
    tiers: dict[Fraction, list[int]] = {}
    for i in range(n):
        tiers.setdefault(inst.weights[i], []).append(i)
    for members in tiers.values():
        cycle = _find_envy_cycle(members, envies)
        if cycle is not None:
            satisfied = False
            witnesses.append(Witness(agents=tuple(cycle), margin=Fraction(-1)))
    return Verdict(satisfied=satisfied, witnesses=tuple(witnesses))


def _find_envy_cycle(members: list[int], envies: list[list[bool]]) -> list[int] | None:
    """Return some directed envy cycle among `members`, or None."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {i: WHITE for i in members}
    stack: list[int] = []

    def dfs(u: int) -> list[int] | None:
        color[u] = GRAY
        stack.append(u)
        for v in members:
            if v == u or not envies[u][v]:
                continue
            if color[v] == GRAY:
                return stack[stack.index(v):]
            if color[v] == WHITE:
                res = dfs(v)
                if res is not None:
                    return res
        stack.pop()
        color[u] = BLACK
        return None

    for i in members:
        if color[i] == WHITE:
            res = dfs(i)
            if res is not None:
                return res
    return None


def check_quota(inst: Instance, alloc: Allocation) -> QuotaReport:
    """Lower/upper quota satisfaction for identical items.

    Quotas are item counts, so the instance must carry the identical_items
    flag; for anything else the notion is undefined and we refuse.
    """
    if not inst.identical_items:
        raise NotIdenticalItemsError("quota checks require an identical-items instance")
    if alloc.m != inst.m or alloc.n != inst.n:
        raise ParameterError("allocation does not match the instance dimensions")
    counts = alloc.counts
    quotas = tuple(inst.weight_share(i) * inst.m for i in range(inst.n))
    lower = tuple(counts[i] >= floor(quotas[i]) for i in range(inst.n))
    upper = tuple(counts[i] <= ceil(quotas[i]) for i in range(inst.n))
    return QuotaReport(quotas=quotas, counts=counts, lower_ok=lower, upper_ok=upper)
