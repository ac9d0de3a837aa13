"""Seeded random instance families.

Every instance is derived from (root seed, index) through numpy's
SeedSequence spawn keys, so a manifest recording the root seed and an index
pins the instance bit for bit regardless of generation order or batch size.

Families:
  uniform      profits and weights drawn independently from 1..weight_max;
  correlated   profit = weight + noise within +-weight_max/10 (at least 1),
               so greedy profit ordering nearly matches weight ordering;
  subset-sum   profit = weight exactly, the classic degenerate family where
               every profit argument collapses onto the weight argument.

The budget is alpha times the total weight of the cardinality-many lightest
items, with alpha drawn from [0.8, 2.5]: below 1 the weight row binds even
for the lightest choices, above it the cardinality row takes over.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .instance_model import Instance, Item, Mode

DISTRIBUTIONS = ("uniform", "correlated", "subset-sum")


def make_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Child generator #index of the given root seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def generate_instance(
    distribution: str,
    n: int,
    cardinality: int,
    seed: int,
    index: int = 0,
    *,
    mode: Mode = Mode.AT_MOST,
    weight_max: int = 1000,
    integral: bool = True,
) -> Instance:
    if distribution not in DISTRIBUTIONS:
        raise ValueError(
            f"unknown distribution {distribution!r}; pick one of {DISTRIBUTIONS}"
        )
    if n < 1 or cardinality < 1 or weight_max < 1:
        raise ValueError("n, cardinality and weight_max must be >= 1")
    rng = make_rng(seed, index)

    weights = rng.integers(1, weight_max + 1, size=n)
    if distribution == "uniform":
        profits = rng.integers(1, weight_max + 1, size=n)
    elif distribution == "correlated":
        spread = max(1, weight_max // 10)
        noise = rng.integers(-spread, spread + 1, size=n)
        profits = np.maximum(weights + noise, 1)
    else:  # subset-sum
        profits = weights.copy()

    k = min(cardinality, n)
    lightest = np.sort(weights)[:k].sum()
    alpha = rng.uniform(0.8, 2.5)
    budget = max(1, int(alpha * int(lightest)))

    denom_p = denom_w = np.ones(n, dtype=np.int64)
    budget_frac = Fraction(budget)
    if not integral:
        denom_p = rng.integers(1, 8, size=n)
        denom_w = rng.integers(1, 8, size=n)
        budget_frac = Fraction(budget, int(rng.integers(1, 4)))

    items = tuple(
        Item(
            id=i + 1,
            profit=Fraction(int(profits[i]), int(denom_p[i])),
            weight=Fraction(int(weights[i]), int(denom_w[i])),
        )
        for i in range(n)
    )
    return Instance(
        items=items, budget=budget_frac, cardinality=cardinality, mode=mode
    )
