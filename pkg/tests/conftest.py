from pathlib import Path

import pytest

from veechkit.origami import ExtendedOrigami

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def origami(x, y, moduli=None, n=None):
    return ExtendedOrigami.from_cycles(x, y, moduli, n)


O1 = origami([[1, 2, 3, 4], [5], [6]], [[1, 5, -6, -4], [2, -3]])
O2 = origami([[1, 2]], [[1, -2]])
TORUS = origami([[1]], [[1]])
L23 = origami([[1, 2, 3], [4]], [[1, 4], [2], [3]])


@pytest.fixture
def fixtures_dir():
    return FIXTURES


# acceptance criteria report ------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, text: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {text}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
