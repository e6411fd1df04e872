from datetime import datetime, timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from resmilp.model import BadFrequency, NonPositiveSpan, TimeIndex, build_time_index
from resmilp.model.timeindex import parse_freq


def test_two_hourly_intervals():
    ti = build_time_index("2021-07-10 06:00", "2021-07-10 08:00", "60T")
    assert len(ti) == 2
    assert ti.durations == (1.0, 1.0)
    assert ti.intervals[0] == (datetime(2021, 7, 10, 6), timedelta(hours=1))


def test_single_step():
    assert len(build_time_index("2021-07-10 06:00", "2021-07-10 07:00", "60T")) == 1


def test_quarter_hours():
    ti = build_time_index("2021-07-10 06:00", "2021-07-10 07:00", "15T")
    assert len(ti) == 4
    assert ti.durations == (0.25,) * 4


def test_short_last_interval():
    ti = build_time_index("2021-07-10 06:00", "2021-07-10 07:30", "60T")
    assert ti.durations == (1.0, 0.5)
    assert ti.boundaries[-1] == datetime(2021, 7, 10, 7, 30)


def test_end_before_start():
    with pytest.raises(NonPositiveSpan):
        build_time_index("2021-07-10 08:00", "2021-07-10 06:00", "60T")
    with pytest.raises(NonPositiveSpan):
        build_time_index("2021-07-10 08:00", "2021-07-10 08:00", "60T")


@pytest.mark.parametrize("freq", ["banana", "0T", "-5T", ""])
def test_bad_frequency(freq):
    with pytest.raises(BadFrequency):
        build_time_index("2021-07-10 06:00", "2021-07-10 08:00", freq)


@pytest.mark.parametrize("text, minutes", [("60T", 60), ("15min", 15), ("H", 60), ("2H", 120), ("1D", 1440)])
def test_parse_freq(text, minutes):
    assert parse_freq(text) == timedelta(minutes=minutes)


def test_string_and_datetime_inputs_compare_equal():
    a = TimeIndex("2021-07-10 06:00:00", "2021-07-10 08:00:00", "60T")
    b = TimeIndex(datetime(2021, 7, 10, 6), datetime(2021, 7, 10, 8), "60T")
    assert a == b


@given(st.integers(1, 500), st.integers(1, 240))
def test_boundaries_cover_span(span_minutes, step_minutes):
    start = datetime(2024, 1, 1)
    ti = TimeIndex(start, start + timedelta(minutes=span_minutes), f"{step_minutes}T")
    assert len(ti.boundaries) == len(ti) + 1
    assert ti.boundaries[0] == start and ti.boundaries[-1] == ti.end
    assert abs(sum(ti.durations) * 60 - span_minutes) < 1e-9
    assert all(0 < d <= step_minutes / 60 + 1e-12 for d in ti.durations)
