"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line with the measured values, so a
plain ``pytest tests/test_acceptance.py`` run doubles as a report.
"""

from __future__ import annotations

import pytest

from ringcavity.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = CRITERIA[number]()
    with capsys.disabled():
        print("\n" + result.line())
    failed = [f"{c.label}={c.value!r} ({c.requirement})" for c in result.checks if not c.passed]
    assert not failed, "; ".join(failed)
