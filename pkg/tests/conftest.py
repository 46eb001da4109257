from __future__ import annotations

import re
from pathlib import Path

import pytest

from svl.frontend import parse

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
PROGRAMS = [CORPUS / f"{n}.svl" for n in ("semaphore", "countdownlatch", "spinlock")]
MUTATIONS = sorted((CORPUS / "mutations").glob("*.svl"))

_EXPECT = re.compile(r"^// expect: (?P<kind>[a-z-]+) at line (?P<line>\d+)$", re.M)
_RACE = re.compile(r"^// race: (?P<harness>[\w-]+)$", re.M)


def load(path) -> object:
    return parse(Path(path).read_text())


def expectation(path) -> tuple[str, int, str | None]:
    """(kind, line, race harness or None) from a mutation header."""
    text = Path(path).read_text()
    m = _EXPECT.search(text)
    r = _RACE.search(text)
    race = r.group("harness") if r else None
    return m.group("kind"), int(m.group("line")), (None if race == "none" else race)


@pytest.fixture(scope="session")
def corpus_programs():
    return {p.stem: load(p) for p in PROGRAMS}


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
