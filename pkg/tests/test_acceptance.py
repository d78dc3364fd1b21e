"""Acceptance suite: one PASS/FAIL line per criterion, printed as it runs."""

import pytest

from heckebench.acceptance import CHECKS, NON_REPRODUCIBLE, run_all


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in run_all()}


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_acceptance_criterion(results, number, capsys):
    r = results[number]
    with capsys.disabled():
        print("\n" + r.line())
        if number == max(CHECKS):
            print("note: " + NON_REPRODUCIBLE)
    assert r.passed, r.detail
