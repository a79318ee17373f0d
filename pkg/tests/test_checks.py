from __future__ import annotations

import pytest

from pfcross.checks import SUITES, run_suite
from pfcross.errors import PreconditionError


@pytest.mark.parametrize("suite", SUITES)
def test_suite_passes(suite):
    results, times = run_suite(suite, seed=3)
    failed = [r.name for r in results if not r.passed]
    assert results and not failed, failed
    assert set(times) == {suite}


def test_unknown_suite():
    with pytest.raises(PreconditionError):
        run_suite("nope")
