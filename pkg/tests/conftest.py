import os
import re

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    def report(tag: str, ok: bool, detail: str):
        line = f"{tag}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int(re.search(r"\d+", s).group()), s)):
            terminalreporter.write_line(line)
