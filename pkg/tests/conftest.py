from pathlib import Path

import pytest

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "synthetic"


@pytest.fixture(scope="session")
def synthetic_dir() -> Path:
    assert FIXTURE_DIR.is_dir(), f"missing fixture directory {FIXTURE_DIR}"
    return FIXTURE_DIR


def pytest_terminal_summary(terminalreporter):
    """One verdict line per acceptance criterion, after the test summary."""
    import sys

    results = []
    for name, module in sys.modules.items():
        if name.rpartition(".")[2] == "test_acceptance" and module is not None:
            results = getattr(module, "CRITERION_RESULTS", [])
            if results:
                break
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
