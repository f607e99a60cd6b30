import pytest

from submhc import codes

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def code2():
    return codes.build_code(2, "subsystem")


@pytest.fixture(scope="session")
def code3():
    return codes.build_code(3, "subsystem")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
