import pytest
from hypothesis import settings

from graphgic.filters import build_filter
from graphgic.graph import generate_named, laplacian

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def c6():
    return generate_named("cycle", {"n": 6})


@pytest.fixture
def c6_filter(c6):
    """``I + L`` on the 6-cycle."""
    return build_filter(laplacian(c6), [1.0, 1.0], c6.dist)


_OUTCOMES: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture(scope="session")
def verdict():
    """Record the outcome of one acceptance criterion for the summary block."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        _OUTCOMES[number] = (title, bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, passed, detail = _OUTCOMES[number]
        tag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{tag}] criterion {number:2d} {title}: {detail}")
