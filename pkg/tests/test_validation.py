import pytest

from intprob import validation as val


def test_report_pass_logic():
    r = val.ValidationReport("x", [val.Check("a", True, 1.0, 1.0, 0.1)])
    assert r.passed
    r.skipped.append("later")
    assert not r.passed
    r = val.ValidationReport("x", [val.Check("a", False, 2.0, 1.0, 0.1)])
    assert not r.passed and r.to_dict()["checks"][0]["status"] == "fail"


def test_check_helpers():
    assert val._close("c", 1.0 + 1e-12, 1.0, 1e-10).passed
    assert not val._close("c", 1.1, 1.0, 1e-3, rel=True).passed
    assert val._within_se("m", 1.0, 0.1, 1.3).passed
    assert not val._within_se("m", 1.0, 0.1, 1.5).passed
    assert not val._within_se("m", 1.0, 0.0, 1.5).passed


def test_plans_cover_all_suites():
    for s in val.SUITES:
        assert val.suite_plan(s)
    assert len(val.suite_plan("all")) == sum(len(val.suite_plan(s)) for s in val.SUITES)
    with pytest.raises(KeyError):
        val.suite_plan("nope")


def test_budget_skips_remaining_checks():
    r = val.run_suite("asymptotics", budget=-1.0)
    assert not r.checks and len(r.skipped) == 4 and not r.passed


def test_algebra_suite_passes_and_reports_progress():
    seen = []
    r = val.run_suite("algebra", seed=42, progress=seen.append)
    assert r.passed and len(seen) == len(r.checks) == 3
    assert all(c.line().startswith("[PASS]") for c in seen)


def test_seeded_runs_are_reproducible():
    a = val.run_suite("tilings", seed=5).checks
    b = val.run_suite("tilings", seed=5).checks
    assert [c.measured for c in a] == [c.measured for c in b]
