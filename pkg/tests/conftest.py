import random

import pytest
from hypothesis import settings

from ellshuffle.theta import EllipticParams

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

ACCEPTANCE: list[tuple[str, bool, float, str]] = []


def record_acceptance(name: str, ok: bool, seconds: float, detail: str = "") -> None:
    ACCEPTANCE.append((name, ok, seconds, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, seconds, detail in ACCEPTANCE:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  [{seconds:.2f}s]  {detail}")


@pytest.fixture
def params():
    return EllipticParams(0.1, 60)


@pytest.fixture
def rng():
    return random.Random(12345)
