"""Exact phase-1 simplex for bundle-collection feasibility problems.

Solves: find lambda >= 0 over a list of bundles (bitmasks over m items) with
    sum(lambda) == total, and
    sum(lambda[T] for T containing item g) <= cap   for every item g.
All arithmetic is over Fractions; Bland's rule guarantees termination.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


def solve_bundle_feasibility(
    masks: Sequence[int], m: int, total: Fraction, cap: Fraction
) -> list[Fraction] | None:
    """Return a feasible lambda vector aligned with `masks`, or None."""
    ncols_b = len(masks)
    art = ncols_b + m
    ncols = art + 1
    rhs = ncols

    tableau: list[list[Fraction]] = []
    eq = [ZERO] * (ncols + 1)
    for c in range(ncols_b):
        eq[c] = ONE
    eq[art] = ONE
    eq[rhs] = total
    tableau.append(eq)
    for g in range(m):
        row = [ZERO] * (ncols + 1)
        bit = 1 << g
        for c, mask in enumerate(masks):
            if mask & bit:
                row[c] = ONE
        row[ncols_b + g] = ONE
        row[rhs] = cap
        tableau.append(row)

    basis = [art] + [ncols_b + g for g in range(m)]

    # phase-1 objective: minimize the artificial variable. Reduced costs
    # start as c_j minus the artificial row (its basic cost is 1).
    z = [(ONE if j == art else ZERO) - tableau[0][j] for j in range(ncols)]
    z.append(-tableau[0][rhs])

    nrows = m + 1
    while True:
        enter = -1
        for j in range(ncols):
            if z[j] < 0:
                enter = j
                break
        if enter == -1:
            break
        leave = -1
        best_ratio: Fraction | None = None
        for r in range(nrows):
            a = tableau[r][enter]
            if a > 0:
                ratio = tableau[r][rhs] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = r
        if leave == -1:
            return None
        _pivot(tableau, z, leave, enter)
        basis[leave] = enter

    if z[rhs] != 0:
        return None
    solution = [ZERO] * ncols_b
    for r, var in enumerate(basis):
        if var < ncols_b:
            solution[var] = tableau[r][rhs]
    return solution


def _pivot(tableau: list[list[Fraction]], z: list[Fraction], leave: int, enter: int) -> None:
    pivot_row = tableau[leave]
    pivot = pivot_row[enter]
    if pivot != 1:
        inv = ONE / pivot
        tableau[leave] = pivot_row = [v * inv for v in pivot_row]
    for row in tableau:
        if row is pivot_row:
            continue
        factor = row[enter]
        if factor != 0:
            for j, pv in enumerate(pivot_row):
                if pv != 0:
                    row[j] -= factor * pv
    factor = z[enter]
    if factor != 0:
        for j, pv in enumerate(pivot_row):
            if pv != 0:
                z[j] -= factor * pv
