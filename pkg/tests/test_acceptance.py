"""End-to-end acceptance criteria; each prints one PASS/FAIL line."""

import pytest

from lognormlab.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"c{c[0]:02d}" for c in CRITERIA])
def test_criterion(number, capsys):
    r = run_criterion(number)
    with capsys.disabled():
        print("\n" + r.line())
    assert r.passed, r.detail
    if r.limit is not None:
        assert r.elapsed < r.limit
