import json

import numpy as np
import pytest

from madelung import verification
from madelung.verification import (
    ANCHORS,
    CRITERIA,
    VerificationReport,
    fitted_order,
    run_criterion,
    run_verification,
)


def test_tables_cover_twelve_criteria():
    assert sorted(CRITERIA) == list(range(1, 13))
    assert sorted(ANCHORS) == sorted(CRITERIA) == sorted(verification.CHECKS)


def test_relations():
    rep = VerificationReport()
    assert rep.add(1, "a", 0.5, 1.0).passed
    assert not rep.add(1, "b", 1.0, 1.0).passed
    assert rep.add(1, "c", 1.0, 1.0, "<=").passed
    assert rep.add(2, "d", 2.0, 1.0, ">").passed
    assert not rep.add(2, "e", np.nan, 1.0).passed
    with pytest.raises(ValueError):
        rep.add(1, "f", 0.0, 1.0, "~")
    assert not rep.criterion_passed(1) and not rep.criterion_passed(3)


def test_missing_criteria_fail_the_report():
    rep = VerificationReport()
    rep.add(1, "only", 0.0, 1.0)
    assert rep.missing == list(range(2, 13))
    assert not rep.all_passed
    assert "missing criteria" in rep.table()


def test_crashing_check_is_a_failed_row(monkeypatch):
    def boom(rep, ctx):
        raise RuntimeError("no")

    monkeypatch.setitem(verification.CHECKS, 3, boom)
    rep = run_criterion(3, n=32, samples=1)
    assert len(rep.checks) == 1 and not rep.checks[0].passed
    assert "RuntimeError" in rep.checks[0].name


def test_fitted_order():
    dts = np.array([4e-4, 2e-4, 1e-4])
    assert fitted_order(dts, 3 * dts**2) == pytest.approx(2.0)
    assert fitted_order(dts, dts**4) == pytest.approx(4.0)


def test_report_completeness_and_json(tmp_path):
    seen = []
    rep = run_verification(samples=3, progress=lambda c, t: seen.append(c))
    assert seen == list(range(1, 13))
    assert rep.missing == []
    assert rep.criteria_covered == list(range(1, 13))
    rep.dump(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["environment"]["seed"] == 42 and data["environment"]["n"] == 128
    assert data["summary"]["checks"] == len(rep.checks)
    assert {c["criterion"] for c in data["checks"]} == set(CRITERIA)


def test_deterministic():
    a = run_criterion(12, samples=5)
    b = run_criterion(12, samples=5)
    assert [c.defect for c in a.checks] == [c.defect for c in b.checks]
