import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("ci", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

#: filled by tests/test_acceptance.py, printed at the end of the session;
#: maps a criterion number to its title and the outcome of each part
ACCEPTANCE: dict[int, tuple[str, dict[str, bool]]] = {}


def record(number: int, title: str, part: str, ok: bool) -> None:
    ACCEPTANCE.setdefault(number, (title, {}))[1][part] = bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, parts = ACCEPTANCE[k]
        ok = all(parts.values())
        detail = ""
        if len(parts) > 1:
            detail = " [" + "; ".join(f"{p}: {'pass' if v else 'fail'}"
                                      for p, v in parts.items()) + "]"
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {k:2d}: {title}{detail}")
