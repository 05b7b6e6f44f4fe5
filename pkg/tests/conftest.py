import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

settings.register_profile("default", max_examples=60, deadline=None, derandomize=os.environ.get("HYPOTHESIS_RANDOM") is None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record a one-line PASS/FAIL verdict, echoed in the terminal summary."""
    lines = request.config.stash.setdefault(VERDICTS, [])

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
