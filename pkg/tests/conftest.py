import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "pdmlab",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("pdmlab")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record a one-line PASS/FAIL verdict shown in the terminal summary."""

    def record(number: int, passed: bool, text: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {text}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
