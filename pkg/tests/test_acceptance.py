"""One test per acceptance criterion; each prints a [PASS]/[FAIL] line."""

import subprocess
import sys

import pytest

from endoatlas import acceptance

from conftest import ACCEPTANCE_LINES


def _record(num, name, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {num} {name}"
    if detail and not passed:
        line += f" :: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _failing(rep):
    return "; ".join(f"{c.check_id} {c.witness}" for c in rep.checks if c.status == "fail")[:400]


@pytest.mark.parametrize("num,name", [(n, name) for n, name, _ in acceptance.CHECKS],
                         ids=[name for _, name, _ in acceptance.CHECKS])
def test_criterion(num, name):
    rep = acceptance.run_check(num)
    _record(num, name, rep.passed, _failing(rep))
    assert rep.passed, rep.text()


@pytest.mark.slow
def test_criterion_9_determinism():
    def selftest(workers):
        return subprocess.run([sys.executable, "-m", "endoatlas.cli", "selftest", "--workers",
                               str(workers)], capture_output=True, check=False).stdout
    one, eight = selftest(1), selftest(8)
    same = one == eight and len(one) > 0
    _record(9, "determinism", same, f"{len(one)} vs {len(eight)} bytes")
    assert same
