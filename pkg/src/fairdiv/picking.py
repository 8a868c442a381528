"""Picking sequences: execution, adaptive and divisor constructions, and the
prefix conditions characterizing which sequences guarantee WEF / WPROP.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .core import Allocation, Instance, allocation_from_owners, rat
from .errors import DimensionMismatchError, DivisorRangeError
from .fairness import Verdict, Witness, _check_unit_interval


@dataclass(frozen=True)
class PickingSequence:
    picks: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.picks)

    def __iter__(self):
        return iter(self.picks)


def _picks_of(seq: PickingSequence | Sequence[int]) -> tuple[int, ...]:
    if isinstance(seq, PickingSequence):
        return seq.picks
    return tuple(seq)


def run_sequence(inst: Instance, seq: PickingSequence | Sequence[int]) -> Allocation:
    """Execute a picking sequence: at each turn the named agent takes her
    highest-utility remaining item, ties broken toward the lowest item index.
    """
    picks = _picks_of(seq)
    if len(picks) != inst.m:
        raise DimensionMismatchError(f"sequence length {len(picks)} != item count {inst.m}")
    remaining = list(range(inst.m))
    owners = [0] * inst.m
    for agent in picks:
        if not 0 <= agent < inst.n:
            raise DimensionMismatchError(f"agent {agent} out of range")
        row = inst.utilities[agent]
        best = max(remaining, key=lambda g: (row[g], -g))
        owners[best] = agent
        remaining.remove(best)
    return allocation_from_owners(inst.n, owners)


def _min_ratio_agent(ratios: Sequence[Fraction], weights: Sequence[Fraction]) -> int:
    """Agent with the smallest ratio; ties go to larger weight, then lower index."""
    best = 0
    for i in range(1, len(ratios)):
        if ratios[i] < ratios[best] or (
            ratios[i] == ratios[best] and weights[i] > weights[best]
        ):
            best = i
    return best


def adaptive_wef_sequence(inst: Instance, x: Fraction | int | str) -> PickingSequence:
    """Turn-by-turn sequence giving each pick to an agent minimizing
    (t_i + (1-x)) / w_i, where t_i counts the agent's prior picks."""
    x = _check_unit_interval("x", x)
    y = 1 - x
    picks: list[int] = []
    t = [0] * inst.n
    for _ in range(inst.m):
        ratios = [(t[i] + y) / inst.weights[i] for i in range(inst.n)]
        chosen = _min_ratio_agent(ratios, inst.weights)
        picks.append(chosen)
        t[chosen] += 1
    return PickingSequence(tuple(picks))


DivisorFunction = Callable[[int], Fraction | int]


def adams(t: int) -> Fraction:
    return Fraction(t)


def webster(t: int) -> Fraction:
    return t + Fraction(1, 2)


def jefferson(t: int) -> Fraction:
    return Fraction(t + 1)


DIVISOR_METHODS: dict[str, DivisorFunction] = {
    "adams": adams,
    "webster": webster,
    "jefferson": jefferson,
}


def divisor_function_for(x: Fraction | int | str) -> DivisorFunction:
    """The divisor function f(t) = t + (1-x) matching the adaptive sequence."""
    x = _check_unit_interval("x", x)
    y = 1 - x

    def f(t: int) -> Fraction:
        return t + y

    return f


def divisor_sequence(inst: Instance, f: DivisorFunction) -> PickingSequence:
    """Sequence giving each pick to an agent minimizing f(t_i) / w_i.

    Every queried value must satisfy t <= f(t) <= t + 1. Ties are broken as
    in adaptive_wef_sequence, so f(t) = t + (1-x) reproduces it exactly.
    """
    picks: list[int] = []
    t = [0] * inst.n
    cache: dict[int, Fraction] = {}
    for _ in range(inst.m):
        ratios = []
        for i in range(inst.n):
            if t[i] not in cache:
                value = rat(f(t[i]))
                if value < t[i] or value > t[i] + 1:
                    raise DivisorRangeError(
                        f"f({t[i]}) = {value} outside [{t[i]}, {t[i] + 1}]"
                    )
                cache[t[i]] = value
            ratios.append(cache[t[i]] / inst.weights[i])
        chosen = _min_ratio_agent(ratios, inst.weights)
        picks.append(chosen)
        t[chosen] += 1
    return PickingSequence(tuple(picks))


def _prefix_verdict(
    picks: tuple[int, ...],
    weights: tuple[Fraction, ...],
    violation_at,
    all_violations: bool,
) -> Verdict:
    """Scan prefixes in increasing length. By default only the first
    violation (shortest prefix, lowest agent pair) is reported; with
    all_violations every failing prefix contributes its witnesses."""
    n = len(weights)
    t = [0] * n
    witnesses: list[Witness] = []
    for k, agent in enumerate(picks, start=1):
        if not 0 <= agent < n:
            raise DimensionMismatchError(f"agent {agent} out of range")
        t[agent] += 1
        found = violation_at(t, k)
        if found:
            if not all_violations:
                return Verdict(satisfied=False, witnesses=(found[0],))
            witnesses.extend(found)
    return Verdict(satisfied=not witnesses, witnesses=tuple(witnesses))


def check_wef_prefix_condition(
    seq: PickingSequence | Sequence[int],
    weights: Sequence[Fraction | int | str],
    x: Fraction | int | str,
    all_violations: bool = False,
) -> Verdict:
    """A sequence guarantees WEF(x,1-x) iff every prefix and ordered pair
    (i,j) satisfies t_i + (1-x) >= (w_i/w_j) * (t_j - x)."""
    x = _check_unit_interval("x", x)
    y = 1 - x
    w = tuple(rat(v) for v in weights)
    picks = _picks_of(seq)

    def violation_at(t: list[int], k: int) -> list[Witness]:
        found = []
        for i in range(len(w)):
            for j in range(len(w)):
                if i == j:
                    continue
                margin = (t[i] + y) - (w[i] / w[j]) * (t[j] - x)
                if margin < 0:
                    found.append(Witness(agents=(i, j), margin=margin, prefix=k))
        return found

    return _prefix_verdict(picks, w, violation_at, all_violations)


def check_wprop_prefix_condition(
    seq: PickingSequence | Sequence[int],
    weights: Sequence[Fraction | int | str],
    x: Fraction | int | str,
    all_violations: bool = False,
) -> Verdict:
    """A sequence guarantees WPROP(x,1-x) iff every prefix of length k and
    agent i satisfy t_i + (1-x) >= (w_i/w_N) * (k - n*x)."""
    x = _check_unit_interval("x", x)
    y = 1 - x
    w = tuple(rat(v) for v in weights)
    total = sum(w, Fraction(0))
    n = len(w)
    picks = _picks_of(seq)

    def violation_at(t: list[int], k: int) -> list[Witness]:
        found = []
        for i in range(n):
            margin = (t[i] + y) - (w[i] / total) * (k - n * x)
            if margin < 0:
                found.append(Witness(agents=(i,), margin=margin, prefix=k))
        return found

    return _prefix_verdict(picks, w, violation_at, all_violations)
