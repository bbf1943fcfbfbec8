import os
from pathlib import Path

import numpy as np
import pytest

from hfsr.dictionary import build_dictionary

ROOT = Path(__file__).resolve().parents[1]
STANDINS = ROOT / "data" / "standins"


def set14_dir() -> Path | None:
    """``$HFSR_SET14_DIR`` or ``data/Set14``, if it holds images."""
    for cand in (os.environ.get("HFSR_SET14_DIR"), ROOT / "data" / "Set14"):
        if cand and Path(cand).is_dir() and any(Path(cand).iterdir()):
            return Path(cand)
    return None


@pytest.fixture(scope="session")
def dictionary():
    return build_dictionary()


@pytest.fixture(scope="session")
def phi1(dictionary):
    return dictionary.matrix(1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def standins() -> Path:
    return STANDINS


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
