"""Verification harness: settings, selection, individual checks and reports."""

import json

import numpy as np
import pytest

from flowlab import ConfigError
from flowlab import verify as vf


def test_default_suite_covers_every_criterion():
    suite = vf.default_suite()
    assert {c.criterion for c in suite} == set(range(1, 11))
    ids = [c.check_id for c in suite]
    assert len(ids) == len(set(ids))


def test_every_tolerance_records_its_calibration():
    for key, tol in vf.TOLERANCES.items():
        assert tol.value > 0 and tol.calibrated, key


def test_select_by_id_prefix_and_criterion():
    assert [c.check_id for c in vf.select_checks(["huisken-shrinker"])] == ["huisken-shrinker"]
    assert {c.check_id for c in vf.select_checks(["huisken"])} == \
        {"huisken-shrinker", "huisken-perturbed", "huisken-bowl"}
    assert all(c.criterion == 7 for c in vf.select_checks(["7"]))
    assert len(vf.select_checks(None)) == len(vf.default_suite())


def test_select_unknown_id_is_config_error():
    with pytest.raises(ConfigError, match="nope"):
        vf.select_checks(["nope"])


def test_overrides_are_validated():
    assert vf.parse_overrides(["huisken.drift=1e-2"]) == {"huisken.drift": "1e-2"}
    with pytest.raises(ConfigError, match="bogus.key"):
        vf.parse_overrides(["bogus.key=1"])
    with pytest.raises(ConfigError):
        vf.parse_overrides(["huisken.drift"])
    with pytest.raises(ConfigError):
        vf.parse_overrides(["huisken.drift=abc"])
    with pytest.raises(ConfigError):
        vf.parse_overrides(["huisken.drift=nan"])


def test_settings_apply_overrides():
    s = vf.Settings({"huisken.quad": "16", "evolution.rel_residual": "5e-4"})
    assert s.res["huisken.quad"] == 16 and isinstance(s.res["huisken.quad"], int)
    assert s.tol["evolution.rel_residual"] == 5e-4
    assert s.fd("identity").order == 6


def test_ladder_order():
    assert vf.ladder_order([1e-2, 2.5e-3, 6.25e-4]) == pytest.approx(2.0)
    assert vf.ladder_order([1e-3, 0.0]) is None


def test_report_verdict_logic():
    rep = vf.CheckReport("x", "s", 1)
    rep.add("a", [1e-5, -2e-5], 1e-4)
    rep.set_order(1.9, 1.8)
    assert rep.finalize().verdict == "pass"
    rep.set_order(1.2, 1.8)
    assert rep.finalize().verdict == "fail"
    rep.set_order(None, 1.8, "exact")
    assert rep.finalize().verdict == "pass"
    rep.add("margin", [-0.5, 0.2], 0.0, signed=True)
    assert rep.finalize().verdict == "fail"


def test_nan_residual_fails_and_serializes():
    rep = vf.CheckReport("x", "s", 1)
    rep.add("a", [np.nan], 1.0)
    rec = rep.finalize().to_record()
    assert rep.verdict == "fail"
    assert rec["residual_norms"]["a"]["sup"] is None
    json.dumps(rec)


@pytest.mark.parametrize("check_id", ["huisken-shrinker", "harnack-bowl", "harnack-control",
                                      "identities-flat-sphere", "reduction-f-zero"])
def test_fast_checks_pass(check_id):
    (spec,) = vf.select_checks([check_id])
    rep = vf.run_check(spec, vf.Settings())
    assert rep.passed, rep.residual_norms


def test_tight_tolerance_fails():
    (spec,) = vf.select_checks(["huisken-shrinker"])
    rep = vf.run_check(spec, vf.Settings({"huisken.drift": 1e-30}))
    assert rep.verdict == "fail"


def test_evolution_regime_mismatch_is_config_error():
    with pytest.raises(ConfigError):
        vf.check_evolution("H", "modified-flow-boundary", "shrinking-sphere")


def test_results_round_trip_and_reports(tmp_path):
    reports = vf.run_suite(["harnack-control", "huisken-shrinker"])
    path = tmp_path / "results.json"
    vf.write_results(path, reports, {"huisken.quad": "32"})
    recs = vf.read_results(path)
    # suite order, not request order
    assert [r["check_id"] for r in recs] == ["huisken-shrinker", "harnack-control"]
    md = vf.markdown_report(recs)
    assert "## 5. Huisken monotonicity" in md and "2 of 2 checks pass." in md
    lines = vf.csv_report(recs).splitlines()
    assert lines[0] == "criterion,check_id,scenario_id,worst_residual,sup,tolerance,order,verdict"
    assert len(lines) == 3
    assert vf.csv_report(recs) == vf.csv_report(vf.read_results(path))


def test_read_results_rejects_bad_files(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    with pytest.raises(ConfigError):
        vf.read_results(empty)
    none = tmp_path / "none.json"
    none.write_text('{"version": 1, "checks": []}')
    with pytest.raises(ConfigError):
        vf.read_results(none)
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "checks": [{"check_id": "x"}]}')
    with pytest.raises(ConfigError):
        vf.read_results(bad)
