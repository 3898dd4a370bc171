import os
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

GOLDEN = Path(__file__).parent / "golden"
ACCEPTANCE = pytest.StashKey[dict]()
N_CRITERIA = 10


@pytest.fixture
def golden():
    """Compare text against tests/golden/<name>; VICSEK_REGEN_GOLDEN=1 rewrites it."""

    def check(name, text):
        path = GOLDEN / name
        if os.environ.get("VICSEK_REGEN_GOLDEN") or not path.exists():
            path.write_text(text)
        assert text == path.read_text(), f"{name} differs from golden copy"

    return check


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion, then assert it."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number, ok, detail):
        results[number] = (bool(ok), detail)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        if n not in results:
            terminalreporter.write_line(f"criterion {n:2d}: NOT RUN")
            continue
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
