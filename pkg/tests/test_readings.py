import numpy as np
import pytest

from sheaffuse.readings import (
    ReadingsError,
    export_readings,
    format_readings,
    hourly_means,
    ingest_readings,
    parse_readings,
    records_from_timeline,
)
from sheaffuse.simulation import SignalSpec, sample_streams

SCHEMA = {"C1": 2, "S1": 1}


def test_simulation_export_round_trips(tmp_path):
    tl = sample_streams(seed=2, signal=SignalSpec(duration_s=1800))
    path = tmp_path / "r.csv"
    export_readings(path, records_from_timeline(tl))
    back = ingest_readings(path)
    for sid in tl.sensors:
        t0, v0 = tl.stream(sid)
        t1, v1 = back.stream(sid)
        assert np.array_equal(t0, t1) and np.array_equal(v0, v1)


def test_canonical_file_is_byte_stable(tmp_path):
    tl = sample_streams(seed=2, signal=SignalSpec(duration_s=900))
    text = format_readings(records_from_timeline(tl))
    assert format_readings(parse_readings(text).records) == text


def test_arity_error_reports_line():
    text = "timestamp_s,sensor_id,v1,v2\n0,C1,1,2\n15,S1,3,4\n"
    with pytest.raises(ReadingsError) as exc:
        parse_readings(text, SCHEMA)
    assert exc.value.line == 3
    assert "line 3" in str(exc.value)


def test_unknown_sensor_with_schema():
    with pytest.raises(ReadingsError, match="unknown sensor"):
        parse_readings("timestamp_s,sensor_id,v1\n0,X9,1\n", SCHEMA)


def test_non_monotone_timestamps():
    text = "timestamp_s,sensor_id,v1\n10,S1,1\n5,S1,2\n"
    with pytest.raises(ReadingsError, match="back in time") as exc:
        parse_readings(text)
    assert exc.value.line == 3


def test_interleaved_sensors_may_share_times():
    r = parse_readings("timestamp_s,sensor_id,v1\n10,S1,1\n5,S2,2\n10,S2,3\n")
    assert r.sensors == ["S1", "S2"]
    assert r.stream("S2")[0].tolist() == [5, 10]


@pytest.mark.parametrize("text,match", [
    ("", "empty"),
    ("time,sensor,v1\n", "bad header"),
    ("timestamp_s,sensor_id,v1\n1.5,S1,2\n", "integer"),
    ("timestamp_s,sensor_id,v1\n1,S1,abc\n", "not a number"),
    ("timestamp_s,sensor_id,v1\n1,S1\n", "at least 3"),
])
def test_malformed_inputs(text, match):
    with pytest.raises(ReadingsError, match=match):
        parse_readings(text)


def test_learned_arity_from_first_record():
    with pytest.raises(ReadingsError, match="takes 1"):
        parse_readings("timestamp_s,sensor_id,v1,v2\n0,S1,1\n1,S1,1,2\n")


def test_hourly_means_give_daily_series():
    t = np.arange(24) * 3600 + 60
    v = np.arange(24, dtype=float)
    day = hourly_means(t, v)
    assert len(day) == 24 and np.array_equal(np.asarray(day), v)


def test_hourly_means_average_within_hour_and_select_day():
    t = np.r_[np.arange(0, 86400, 900), np.arange(86400, 2 * 86400, 900)]
    v = np.r_[np.ones(96), np.full(96, 3.0)]
    assert np.allclose(np.asarray(hourly_means(t, v, day=1)), 3.0)


def test_hourly_means_missing_hour():
    with pytest.raises(ValueError, match="hour 5"):
        hourly_means(np.r_[np.arange(5), np.arange(6, 24)] * 3600, np.ones(23))


def test_to_timeline_orders_events():
    r = parse_readings("timestamp_s,sensor_id,v1\n0,S2,1\n0,S1,2\n15,S1,3\n")
    tl = r.to_timeline(["S1", "S2"])
    assert [(t, s) for t, s, _ in tl.events] == [(0, "S1"), (0, "S2"), (15, "S1")]
