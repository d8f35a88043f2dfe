"""Readings CSV ingest/export and hourly resampling.

Format: UTF-8, header ``timestamp_s,sensor_id,v1[,v2...]``, one record per
line.  Scalar (dust) records carry one value, count records carry one value
per vehicle type.  Timestamps are integer seconds, non-decreasing per sensor.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .emissions import HOURS, DailySeries
from .simulation import EventTimeline


class ReadingsError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ReadingRecord:
    timestamp_s: int
    sensor_id: str
    payload: tuple[float, ...]


@dataclass
class Readings:
    records: list[ReadingRecord]
    dims: dict[str, int]
    sensors: list[str] = field(default_factory=list)

    def stream(self, sensor: str) -> tuple[np.ndarray, np.ndarray]:
        recs = [r for r in self.records if r.sensor_id == sensor]
        if not recs:
            return np.zeros(0, dtype=np.int64), np.zeros((0, self.dims.get(sensor, 1)))
        return (np.array([r.timestamp_s for r in recs], dtype=np.int64),
                np.array([r.payload for r in recs], dtype=float))

    def streams(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        return {s: self.stream(s) for s in self.sensors}

    def to_timeline(self, sensors: Iterable[str] | None = None) -> EventTimeline:
        """Events for ``sensors`` (default: all), ordered by time then sensor order."""
        order = list(sensors) if sensors is not None else list(self.sensors)
        rank = {s: i for i, s in enumerate(order)}
        events = [(r.timestamp_s, r.sensor_id, np.array(r.payload, dtype=float))
                  for r in self.records if r.sensor_id in rank]
        events.sort(key=lambda e: (e[0], rank[e[1]]))
        return EventTimeline(events, order)


def _parse_number(text: str, line: int, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ReadingsError(f"{what} {text!r} is not a number", line) from None


def parse_readings(text: str, schema: Mapping[str, int] | None = None) -> Readings:
    """Parse CSV text.  ``schema`` maps sensor id -> payload arity; without it
    arities are learned from each sensor's first record."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ReadingsError("empty readings file", 1) from None
    if header[:3] != ["timestamp_s", "sensor_id", "v1"] or any(h != f"v{i + 1}" for i, h in enumerate(header[2:])):
        raise ReadingsError(f"bad header {','.join(header)!r}; expected timestamp_s,sensor_id,v1[,v2...]", 1)

    dims = dict(schema or {})
    last_t: dict[str, int] = {}
    records = []
    sensors: list[str] = list(dims)
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < 3:
            raise ReadingsError(f"expected at least 3 fields, got {len(row)}", lineno)
        t_raw, sid, *vals = row
        try:
            t = int(t_raw)
        except ValueError:
            raise ReadingsError(f"timestamp {t_raw!r} is not an integer", lineno) from None
        if schema is not None and sid not in dims:
            raise ReadingsError(f"unknown sensor id {sid!r}", lineno)
        if sid not in dims:
            dims[sid] = len(vals)
        if sid not in sensors:
            sensors.append(sid)
        if len(vals) != dims[sid]:
            raise ReadingsError(f"sensor {sid!r} takes {dims[sid]} value(s), got {len(vals)}", lineno)
        if sid in last_t and t < last_t[sid]:
            raise ReadingsError(f"timestamp {t} for {sid!r} goes back in time (previous {last_t[sid]})", lineno)
        last_t[sid] = t
        payload = tuple(_parse_number(v, lineno, "value") for v in vals)
        records.append(ReadingRecord(t, sid, payload))
    return Readings(records, dims, sensors)


def ingest_readings(path, schema: Mapping[str, int] | None = None) -> Readings:
    return parse_readings(Path(path).read_text(encoding="utf-8"), schema)


def _fmt(x: float) -> str:
    return repr(float(x))


def format_readings(records: Iterable[ReadingRecord]) -> str:
    records = list(records)
    width = max((len(r.payload) for r in records), default=1)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["timestamp_s", "sensor_id"] + [f"v{i + 1}" for i in range(width)])
    for r in records:
        w.writerow([str(r.timestamp_s), r.sensor_id] + [_fmt(v) for v in r.payload])
    return buf.getvalue()


def export_readings(path, records: Iterable[ReadingRecord]) -> None:
    Path(path).write_text(format_readings(records), encoding="utf-8")


def records_from_timeline(timeline: EventTimeline) -> list[ReadingRecord]:
    return [ReadingRecord(int(t), s, tuple(float(x) for x in np.atleast_1d(v))) for t, s, v in timeline.events]


def hourly_means(times, values, day: int = 0) -> DailySeries:
    """Arithmetic mean per clock hour of day ``day`` (seconds since the start of day 0)."""
    times = np.asarray(times, dtype=np.int64)
    values = np.asarray(values, dtype=float).reshape(len(times), -1)
    if values.shape[1] != 1:
        raise ValueError("hourly means need scalar values; convert counts to PM first")
    start = day * HOURS * 3600
    hour = (times - start) // 3600
    out = np.empty(HOURS)
    for h in range(HOURS):
        sel = hour == h
        if not sel.any():
            raise ValueError(f"no readings in hour {h} of day {day}")
        out[h] = values[sel, 0].mean()
    return DailySeries(out)
