from pathlib import Path

import pytest

EXPORTER_FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
PRIMARY_FIXTURES = Path(__file__).resolve().parents[2] / "fixtures" / "synthetic"


@pytest.fixture(scope="session")
def labeled_path() -> str:
    path = EXPORTER_FIXTURES / "labeled_40.jsonl"
    assert path.is_file(), f"missing fixture {path}"
    return str(path)


@pytest.fixture(scope="session")
def docs5_path() -> str:
    path = EXPORTER_FIXTURES / "docs_5.jsonl"
    assert path.is_file(), f"missing fixture {path}"
    return str(path)


@pytest.fixture(scope="session")
def primary_fixture_dir() -> Path:
    assert PRIMARY_FIXTURES.is_dir(), f"missing fixture directory {PRIMARY_FIXTURES}"
    return PRIMARY_FIXTURES


def pytest_terminal_summary(terminalreporter):
    """One verdict line per exporter acceptance criterion."""
    import sys

    results = []
    for name, module in sys.modules.items():
        if name.rpartition(".")[2] == "test_exporter_acceptance" and module is not None:
            results = getattr(module, "CRITERION_RESULTS", [])
            if results:
                break
    if results:
        terminalreporter.section("exporter acceptance")
        for line in results:
            terminalreporter.write_line(line)
