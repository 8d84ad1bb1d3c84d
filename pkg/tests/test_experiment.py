import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from disloc.experiment import ExperimentTable, loglog_slope


@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_slope_recovers_power(p, c):
    ns = [1, 2, 4, 8, 16]
    assert loglog_slope(ns, [c * n**p for n in ns]) == pytest.approx(p, abs=1e-9)


def test_slope_degenerate():
    assert math.isnan(loglog_slope([1, 2], [0.0, 0.0]))


def test_csv_format():
    t = ExperimentTable(("n", "x", "ok"))
    t.add(n=1, x=0.1, ok=True)
    t.add(n=2, x=float("nan"), ok=False)
    assert t.to_csv() == "n,x,ok\n1,0.1,1\n2,,0\n"
    with pytest.raises(KeyError):
        t.add(n=3)
