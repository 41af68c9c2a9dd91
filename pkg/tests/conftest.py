import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hybridcharge.scenario import GeneratorConfig, generate_scenario  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def small_scenario():
    return generate_scenario(GeneratorConfig(n_nodes=20, n_slots=30, planning_start=24, extent_km=1.5), seed=3)


@pytest.fixture(scope="session")
def default_scenario():
    return generate_scenario(GeneratorConfig(), seed=1)


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
