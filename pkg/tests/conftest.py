import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("lab", max_examples=25, deadline=None)
settings.load_profile("lab")

_CRITERIA: dict[int, tuple[bool, str, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, title, ok, detail)``."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        _CRITERIA[number] = (bool(ok), title, detail)
        print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, title, detail = _CRITERIA[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
    passed = sum(ok for ok, _, _ in _CRITERIA.values())
    terminalreporter.write_line(f"{passed}/{len(_CRITERIA)} acceptance criteria passed")
