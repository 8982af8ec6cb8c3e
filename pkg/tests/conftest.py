import contextlib

import pytest

_LINES = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""


@pytest.fixture
def criterion():
    """Context manager recording one acceptance line: PASS unless the block raises."""

    @contextlib.contextmanager
    def record(number, title):
        c = _Criterion(number, title)
        try:
            yield c
        except BaseException as exc:
            _LINES[number] = f"criterion {number:>2} FAIL  {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
            print(_LINES[number])
            raise
        _LINES[number] = f"criterion {number:>2} PASS  {title}" + (f"  [{c.detail}]" if c.detail else "")
        print(_LINES[number])

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_LINES):
            terminalreporter.write_line(_LINES[number])
