import os
from collections import defaultdict

import pytest

# criterion number -> list of (part, passed, detail), filled by the acceptance suite
ACCEPTANCE = defaultdict(list)


@pytest.fixture(scope="session")
def cache_dir():
    """Reference cache shared by all tests; honours $CSFMELT_CACHE."""
    from csfmelt.benchmarks import default_cache_dir

    path = default_cache_dir()
    path.mkdir(parents=True, exist_ok=True)
    return path


@pytest.fixture
def record():
    def _record(criterion, part, passed, detail):
        ACCEPTANCE[criterion].append((part, bool(passed), detail))
        print(f"criterion {criterion}{part}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[crit]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{part or 'main'}: {'pass' if passed else 'FAIL'} ({d})" for part, passed, d in parts)
        tr.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
