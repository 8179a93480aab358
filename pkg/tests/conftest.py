import functools

import pytest

from fogplace import Mode, make_instance
from fogplace.placement import formulate, solve

PAT_MAX = (50, 100, 150, 200)

# (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE = []


def record(criterion, passed, detail, label=None):
    """Log one criterion line; ``label`` replaces PASS when a fallback clause applied."""
    ACCEPTANCE.append((criterion, bool(passed), detail, label))
    assert passed, f"criterion {criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail, label in ACCEPTANCE:
        status = (label or "PASS") if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion}: {detail}")


@functools.lru_cache(maxsize=None)
def default_instance(pat_max):
    return make_instance(pat_max)


@functools.lru_cache(maxsize=None)
def default_solution(pat_max, mode):
    inst = default_instance(pat_max)
    return solve(formulate(inst.topology, inst.scenario, mode, inst.catalog, inst.options))


@pytest.fixture(scope="session")
def solved_defaults():
    return {(pm, m): default_solution(pm, m) for pm in PAT_MAX for m in (Mode.SFA, Mode.MFA)}
