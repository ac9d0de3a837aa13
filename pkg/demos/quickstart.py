#!/usr/bin/env python3
"""Quickstart: solve a small cardinality-constrained knapsack instance.

This script is deterministic and self-auditing: it builds a fixed 10-item
instance, asks for a selection of at most 3 items within a weight budget,
compares the approximate answer against the exact optimum, and prints a
PASS/FAIL verdict for the advertised guarantee.

Usage:
  python3 demos/quickstart.py
"""

from fractions import Fraction

from kknapsack import Instance, Item, Mode, evaluate_solution, solve
from kknapsack.oracles import brute_force


def main() -> int:
    # Ten items: (profit, weight). Item 1 is valuable but heavy; the best
    # 3-item set must trade profit density against the budget.
    data = [
        (90, 14),
        (72, 9),
        (55, 5),
        (48, 6),
        (41, 4),
        (33, 3),
        (27, 7),
        (18, 2),
        (11, 1),
        (6, 1),
    ]
    inst = Instance(
        items=tuple(
            Item(id=i, profit=Fraction(p), weight=Fraction(w))
            for i, (p, w) in enumerate(data, start=1)
        ),
        budget=Fraction(16),
        cardinality=3,
        mode=Mode.AT_MOST,
    )
    eps = Fraction(1, 4)

    print("=" * 64)
    print("instance: 10 items, budget 16, at most 3 items, eps = 1/4")
    print("=" * 64)

    sol = solve(inst, eps)
    report = evaluate_solution(inst, sol)
    print(f"selected ids : {sorted(sol.selected)}")
    print(f"total profit : {sol.total_profit}")
    print(f"total weight : {sol.total_weight} (budget {inst.budget})")
    print(f"item count   : {sol.count} (cap {inst.cardinality})")
    print(f"feasible     : {report.feasible}")

    exact = brute_force(inst)
    floor = (1 - eps) * exact.value
    print(f"exact optimum: {exact.value} (items {sorted(exact.solution)})")
    print(f"guarantee    : value {sol.total_profit} >= (1-eps)*OPT = {floor}")

    ok = report.feasible and sol.total_profit >= floor
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
