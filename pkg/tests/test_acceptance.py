"""Acceptance suite at full scale; prints one PASS/FAIL line per criterion.

Runs in roughly three to four minutes.  Set ``FASEP_QUICK=1`` for the
reduced scale.
"""

import os

import pytest

from fasep.verify import CRITERIA, Scale, criterion_9

SCALE = Scale.quick() if os.environ.get("FASEP_QUICK") else Scale.full()
SEED = 0
_collected = []


def _worst(verdicts):
    def margin(v):
        t = float(v.threshold)
        return float(v.statistic) - t if t == 0 else float(v.statistic) / t
    return max(verdicts, key=margin)


def _report(k, verdicts):
    ok = all(v.passed for v in verdicts)
    w = _worst(verdicts)
    op = "<" if w.strict else "<="
    return (f"{'PASS' if ok else 'FAIL'} criterion {k}: "
            f"{sum(v.passed for v in verdicts)}/{len(verdicts)} checks; "
            f"worst {w.name}: {w.statistic:.4g} {op} {w.threshold:.4g}")


@pytest.mark.slow
@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    verdicts = CRITERIA[k](SCALE, SEED)
    _collected.extend(verdicts)
    with capsys.disabled():
        print("\n" + _report(k, verdicts))
    failed = [v.line() for v in verdicts if not v.passed]
    assert not failed, "\n".join(failed)


@pytest.mark.slow
def test_criterion_9_structural(capsys):
    if not _collected:
        pytest.skip("needs the simulated criteria to have run in this session")
    v = criterion_9(_collected)
    with capsys.disabled():
        print("\n" + _report(9, [v]))
    assert v.passed, v.line()
