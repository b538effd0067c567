import pytest

from flowlab import verify as vf

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def suite_reports():
    """Every check of the default suite, run once per session."""
    return vf.run_suite()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        ok, detail = results[k]
        terminalreporter.write_line(f"criterion {k:2d} {vf.CRITERIA[k]}: "
                                    f"{'PASS' if ok else 'FAIL'}{detail}")
