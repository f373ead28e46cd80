import pytest

from intsemi.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid, capsys):
    res = run_criterion(cid)
    with capsys.disabled():
        print("\n" + res.line() + (f" ({', '.join(res.notes)})" if res.notes else ""))
    assert res.passed, res.line()
