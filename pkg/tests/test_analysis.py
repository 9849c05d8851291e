import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncma.analysis import (ThroughputRecord, db_to_linear, rate_gain, sic_sinr, tally_throughput,
                           theory_table)
from ncma.macode import MacCodeSpec


def test_rate_gain_reference_points():
    assert rate_gain(1e4) == pytest.approx(0.0753, abs=5e-4)
    assert rate_gain(10 ** 0.85) == pytest.approx(0.30, abs=0.01)


def test_rate_gain_limits_and_monotonicity():
    assert rate_gain(1e-9) == pytest.approx(1.0, abs=1e-6)
    grid = np.logspace(-3, 6, 400)
    assert np.all(np.diff(rate_gain(grid)) < 0)
    with pytest.raises(ValueError):
        rate_gain(0.0)
    with pytest.raises(ValueError):
        rate_gain([1.0, -1.0])


def test_sic_sinr():
    assert sic_sinr(1.0, 1.0) == 0.5
    assert sic_sinr(1.0, 1e-12) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sic_sinr(0.0, 1.0)
    with pytest.raises(ValueError):
        sic_sinr(1.0, 0.0)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_sic_sinr_below_zero_db(p, s2):
    assert sic_sinr(p, s2) < 1.0


def test_throughput_arithmetic():
    specs = {"A": MacCodeSpec(8), "B": MacCodeSpec(16), "C": MacCodeSpec(32)}
    rec = tally_throughput({"A": 10, "B": 10, "C": 10}, 100, specs)
    assert rec.per_user == {"A": 0.8, "B": 1.6, "C": 3.2}
    assert rec.system == pytest.approx(5.6)
    assert tally_throughput({}, 100, specs).system == 0.0
    with pytest.raises(ValueError):
        tally_throughput({"A": 1}, 0, specs)
    with pytest.raises(KeyError):
        tally_throughput({"D": 1}, 10, specs)


def test_record_fields():
    rec = ThroughputRecord(50, {"A": 5}, {"A": 4})
    assert rec.per_user["A"] == pytest.approx(0.4)


def test_theory_table_rows():
    rows = theory_table([0.0, 40.0])
    assert rows[0][2] == pytest.approx(10 * np.log10(0.5))
    assert rows[1][1] == pytest.approx(rate_gain(1e4))
    assert db_to_linear(10.0) == pytest.approx(10.0)
