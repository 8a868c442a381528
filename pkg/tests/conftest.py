"""Shared generators for randomized tests.

All randomness is drawn from explicitly seeded random.Random objects so every
run is reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

import fairdiv as fd


def rand_fraction(rng: random.Random, lo: int = 0, hi: int = 8,
                  dens: tuple[int, ...] = (1, 2, 3)) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.choice(dens))


def rand_weights(rng: random.Random, n: int,
                 dens: tuple[int, ...] = (1, 2, 3, 4)) -> list[Fraction]:
    return [Fraction(rng.randint(1, 6), rng.choice(dens)) for _ in range(n)]


def random_instance(rng: random.Random, n: int | None = None, m: int | None = None,
                    max_n: int = 4, max_m: int = 8, zero_p: float = 0.15) -> fd.Instance:
    n = n if n is not None else rng.randint(2, max_n)
    m = m if m is not None else rng.randint(1, max_m)
    utilities = [
        [Fraction(0) if rng.random() < zero_p else rand_fraction(rng, 0, 8)
         for _ in range(m)]
        for _ in range(n)
    ]
    return fd.Instance(tuple(rand_weights(rng, n)), tuple(tuple(r) for r in utilities))


def random_binary_instance(rng: random.Random, n: int | None = None,
                           m: int | None = None, max_n: int = 4,
                           max_m: int = 8) -> fd.Instance:
    n = n if n is not None else rng.randint(2, max_n)
    m = m if m is not None else rng.randint(2, max_m)
    columns = []
    for _ in range(m):
        col = [rng.random() < 0.55 for _ in range(n)]
        if not any(col):
            col[rng.randrange(n)] = True  # every item valued by someone
        columns.append(col)
    rows = tuple(
        tuple(Fraction(1) if columns[g][i] else Fraction(0) for g in range(m))
        for i in range(n)
    )
    return fd.Instance(tuple(rand_weights(rng, n)), rows)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xFA17D1F)
