"""Acceptance criteria 1-17, one test each, at full scale.

Every test prints a ``[PASS]`` or ``[FAIL]`` line; the lines are also
collected into the ``acceptance criteria`` section of the terminal summary.
"""
import pytest

from burgerslab.acceptance import ALL

BY_NUMBER = {fn.number: fn for fn in ALL}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(BY_NUMBER), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number, acceptance_log):
    res = BY_NUMBER[number]("full")
    line = res.line()
    print(line)
    print(res.details())
    acceptance_log.append((number, line))
    assert res.passed, f"{line}\n{res.details()}"
