"""Acceptance gate: every criterion at its pinned tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v -s` (or `hotspots selftest`).
The full suite solves several hundred eigenproblems and takes tens of
minutes on a small machine; the moduli sweep and the random-triangle suite
run on all available cores.
"""

import pytest

from hotspots import acceptance


@pytest.fixture(scope="module")
def ctx():
    return acceptance.AcceptanceContext()


@pytest.mark.parametrize("cid", range(1, 13))
def test_criterion(ctx, cid):
    result = acceptance.CRITERIA[cid - 1](ctx)
    print(result.line())
    assert result.passed, result.detail
