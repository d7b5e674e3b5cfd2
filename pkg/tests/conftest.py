import re

import pytest


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, in criterion order."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", nodeid)
            if m and (rep.when == "call" or outcome == "error"):
                rows.append((int(m.group(1)), m.group(2).replace("_", " "), "PASS" if outcome == "passed" else "FAIL"))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, verdict in sorted(rows):
        terminalreporter.write_line(f"criterion {num:2d}  {verdict}  {name}")


@pytest.fixture(scope="session")
def rng_seeds():
    return range(200)
