import functools

import pytest

from seatopt.compiler import compile_cfn
from seatopt.problem_io import BUILTIN_NAMES, builtin_problem

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def compiled(name):
    return compile_cfn(builtin_problem(name))


@pytest.fixture(params=BUILTIN_NAMES)
def builtin_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
