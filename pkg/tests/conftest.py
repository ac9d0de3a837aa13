"""Shared test fixtures and the acceptance-criteria reporting hook.

best_subset below is a deliberately naive full enumeration used to
cross-check both the solver and the oracles module; it must stay
independent of any package internals beyond the instance types.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from kknapsack.instance_model import Instance, Item, Mode

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

ZERO = Fraction(0)


def F(num, den=None) -> Fraction:
    return Fraction(num) if den is None else Fraction(num, den)


def items_of(triples) -> tuple[Item, ...]:
    """(id, profit, weight) triples -> Item tuple."""
    return tuple(
        Item(id=int(i), profit=Fraction(p), weight=Fraction(w)) for i, p, w in triples
    )


def inst_of(triples, budget, cardinality, mode=Mode.AT_MOST) -> Instance:
    return Instance(
        items=items_of(triples),
        budget=Fraction(budget),
        cardinality=int(cardinality),
        mode=mode,
    )


def best_subset(inst: Instance, exact_count: int | None = None):
    """Full-enumeration optimum: (value, frozenset of ids), or None when no
    feasible selection exists (only possible with exact_count). At-most mode
    always admits the empty set. Exponential; keep n small."""
    items = inst.items
    if exact_count is None:
        sizes = range(0, min(inst.cardinality, len(items)) + 1)
    else:
        if exact_count > len(items):
            return None
        sizes = [exact_count]
    best = None
    for r in sizes:
        for combo in itertools.combinations(items, r):
            weight = sum((it.weight for it in combo), ZERO)
            if weight > inst.budget:
                continue
            value = sum((it.profit for it in combo), ZERO)
            if best is None or value > best[0]:
                best = (value, frozenset(it.id for it in combo))
    return best


@pytest.fixture
def mk_inst():
    return inst_of


# ---------------------------------------------------------------------------
# Acceptance-criteria reporting: tests in test_acceptance.py record one line
# per criterion through the `criterion` fixture; the terminal-summary hook
# prints them after the run so the pass/fail ledger survives output capture.
# ---------------------------------------------------------------------------

_ACCEPTANCE_LINES: dict[str, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    def record(num: str, description: str, passed: bool, detail: str = ""):
        _ACCEPTANCE_LINES[num] = (description, bool(passed), detail)
        assert passed, f"criterion {num} FAILED: {description} -- {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_ACCEPTANCE_LINES):
        description, passed, detail = _ACCEPTANCE_LINES[num]
        status = "PASS" if passed else "FAIL"
        line = f"[PRIMARY {num}] {status} -- {description}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
