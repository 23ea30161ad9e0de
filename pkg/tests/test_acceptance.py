"""Acceptance suite: every criterion at its stated tolerance (n=128, seed=42)."""

import pytest

from conftest import ACCEPTANCE_LINES
from madelung.verification import CRITERIA, run_criterion


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(criterion):
    rep = run_criterion(criterion, n=128, seed=42, samples=100)
    ok = rep.criterion_passed(criterion)
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {criterion:>2} {CRITERIA[criterion]} ({len(rep.checks)} checks)"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    for row in rep.checks:
        print("    " + row.line())
    failed = [row.line() for row in rep.checks if not row.passed]
    assert ok, "\n".join(failed)
