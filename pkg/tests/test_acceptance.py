"""One test per acceptance criterion; each check prints a PASS/FAIL line.

Lines are echoed live with ``-s`` and collected into an ``acceptance criteria``
section of the terminal summary otherwise.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from photoclone.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", sorted(CRITERIA), ids=lambda n: f"C{n}")
def test_criterion(criterion):
    checks = CRITERIA[criterion]()
    for c in checks:
        print(c.line())
        ACCEPTANCE_LINES.append(c.line())
    failed = [c.line() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)
