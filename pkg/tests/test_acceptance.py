"""One line per acceptance criterion, at the tolerances of the acceptance suite."""

import pytest

from ladder_cooling import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA, ids=lambda c: c.__name__)
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + result.line())
        for check in result.checks:
            print(f"      {'ok  ' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    assert result.passed, result.line()
