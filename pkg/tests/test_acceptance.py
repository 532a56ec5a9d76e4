"""Acceptance gate: every stated criterion at its stated tolerance.

Runs the shared acceptance suite once and asserts each criterion with
its pass/fail line, then checks full command-line determinism by
invoking ``verify-all`` twice and comparing bytes.
"""

import subprocess
import sys

import pytest

from dilutefermi.acceptance import ALL_CRITERIA, run_all


@pytest.fixture(scope="module")
def results():
    return run_all()


@pytest.mark.parametrize("index", range(len(ALL_CRITERIA)))
def test_criterion(results, index):
    res = results[index]
    print(res.line())
    assert res.passed, f"{res.line()}\ndetails: {res.details}"


def test_all_criteria_present(results):
    assert [r.cid for r in results] == list(range(1, 18))


def test_verify_all_cli_round_trip(tmp_path):
    """Criterion 17 at the process level: two runs, byte-identical outputs."""
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "dilutefermi.cli", "verify-all", "--out", str(out)],
            capture_output=True,
            text=True,
            timeout=900,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert proc.stdout.count("[PASS]") == 17
        outputs.append((out / "acceptance_summary.csv").read_bytes())
    assert outputs[0] == outputs[1]
