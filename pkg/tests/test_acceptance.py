"""Acceptance suite: one test per criterion, each running its group of checks."""

import pytest

from flowlab import verify as vf


@pytest.mark.parametrize("criterion", sorted(vf.CRITERIA))
def test_criterion(criterion, suite_reports, acceptance_log):
    reps = [r for r in suite_reports if r.criterion == criterion]
    failed = [r for r in reps if not r.passed]
    detail = f" ({len(reps) - len(failed)}/{len(reps)} checks)"
    if failed:
        detail += " failing: " + ", ".join(r.check_id for r in failed)
    acceptance_log[criterion] = (not failed and bool(reps), detail)
    print(f"criterion {criterion}: {'PASS' if not failed else 'FAIL'}{detail}")
    assert reps, "no checks registered"
    assert not failed, {r.check_id: r.residual_norms for r in failed}
