"""Acceptance criteria 1-13; each test writes one PASS/FAIL line straight to the terminal."""

import subprocess
import sys
import time

import pytest

from symsq import verify


@pytest.mark.parametrize("criterion", [number for number, _, _ in verify.CHECKS])
def test_criterion(criterion, capsys):
    result = verify.run_check(criterion)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


def test_criterion_13_verify_command(capsys):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "symsq.cli", "verify"], capture_output=True, text=True,
                          timeout=120)
    elapsed = time.perf_counter() - start
    ok = proc.returncode == 0 and elapsed < 120
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion 13  verify command exit {proc.returncode} in {elapsed:.1f}s")
    assert ok, proc.stderr
