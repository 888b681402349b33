from __future__ import annotations

import pytest

from lagmin import acceptance

NUMBERS = list(range(1, len(acceptance.CRITERIA) + 1))
LINES: dict = {}


@pytest.mark.slow
@pytest.mark.parametrize("number", NUMBERS, ids=[f"criterion-{k}" for k in NUMBERS])
def test_criterion(number):
    result = acceptance.run_criterion(number, seed=0)
    LINES[number] = result.line()
    print(result.line())
    assert result.passed, result.line()
