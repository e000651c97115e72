import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    log = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
        log[label] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE_KEY, None)
    if log:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in log.values():
            terminalreporter.write_line(line)
