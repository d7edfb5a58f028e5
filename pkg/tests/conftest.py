from pathlib import Path

import pytest

from leff.parser import default_prelude_dir

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def prelude() -> Path:
    return default_prelude_dir()


@pytest.fixture(scope="session")
def fixtures() -> Path:
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
