"""Seeded simulation of asynchronous, noisy cameras and dust sensors."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from .emissions import EmissionFactorTable, VehicleCounts

DEFAULT_RATIO = (200.0, 30.0)


@dataclass(frozen=True)
class SignalSpec:
    amplitude: float = 50.0
    offset: float = 150.0
    duration_s: int = 172_800

    def __post_init__(self):
        if self.offset - abs(self.amplitude) < 0:
            raise ValueError("offset - amplitude must be non-negative so PM stays >= 0")
        if self.duration_s <= 0:
            raise ValueError("duration must be positive")


@dataclass(frozen=True)
class SensorSpec:
    """One simulated sensor.

    ``noise_pct`` is the expected mean absolute relative error in percent;
    the multiplicative Gaussian noise uses ``sigma = noise_pct/100 * sqrt(pi/2)``.
    """

    id: str
    noise_pct: float
    period_s: int
    kind: str = "dust"
    start_s: int = 0

    def __post_init__(self):
        if self.noise_pct < 0:
            raise ValueError(f"{self.id}: noise must be non-negative")
        if self.period_s <= 0:
            raise ValueError(f"{self.id}: sampling period must be positive")
        if self.kind not in ("camera", "dust"):
            raise ValueError(f"{self.id}: kind must be 'camera' or 'dust'")

    @property
    def sigma(self) -> float:
        return self.noise_pct / 100.0 * math.sqrt(math.pi / 2.0)


# cameras carry the two larger noise levels (see README, "Simulation defaults")
DEFAULT_SENSORS = (
    SensorSpec("C1", 11.7, 600, "camera"),
    SensorSpec("C2", 16.9, 600, "camera"),
    SensorSpec("S1", 2.8, 15, "dust"),
    SensorSpec("S2", 8.3, 15, "dust"),
)


@dataclass
class EventTimeline:
    """Raw events plus, after :func:`align_hold_last`, one full assignment per event time.

    ``assignments`` rows follow ``sensors`` order with each sensor's value
    flattened in place; rows seen before every sensor has reported are
    NaN-padded and flagged in ``warmup``.
    """

    events: list[tuple[int, str, np.ndarray]]
    sensors: list[str]
    times: np.ndarray | None = None
    assignments: np.ndarray | None = None
    warmup: np.ndarray | None = None
    columns: dict[str, slice] | None = None

    def stream(self, sensor: str) -> tuple[np.ndarray, np.ndarray]:
        ts = [t for t, s, _ in self.events if s == sensor]
        vals = [v for _, s, v in self.events if s == sensor]
        return np.array(ts, dtype=np.int64), np.array(vals, dtype=float)

    def scored(self) -> tuple[np.ndarray, np.ndarray]:
        """Times and assignments after warm-up."""
        ok = ~self.warmup
        return self.times[ok], self.assignments[ok]


def ground_truth(t_s, spec: SignalSpec = SignalSpec()):
    """``amplitude * sin(t) + offset`` with ``t`` in seconds (radians)."""
    return spec.amplitude * np.sin(t_s) + spec.offset


def inverse_guidebook(pm_value: float, ratio: Sequence[float] = DEFAULT_RATIO,
                      ef: EmissionFactorTable | None = None, vkt_km: float = 1.0,
                      integer: bool = False) -> VehicleCounts:
    """Counts in a fixed type ratio whose guidebook mass equals ``pm_value``."""
    if pm_value < 0:
        raise ValueError(f"PM value must be non-negative, got {pm_value}")
    ef = ef or EmissionFactorTable()
    r = np.asarray(ratio, dtype=float)
    if r.shape != (len(ef.entries),) or np.any(r < 0) or not r.sum() > 0:
        raise ValueError("ratio needs one non-negative entry per vehicle type, not all zero")
    unit = float(r @ ef.as_array()) * vkt_km
    counts = r * (pm_value / unit)
    if integer:
        counts = np.rint(counts)
    return VehicleCounts(dict(zip(ef.types, counts.tolist())), vkt_km)


def sample_streams(specs: Sequence[SensorSpec] = DEFAULT_SENSORS, signal: SignalSpec = SignalSpec(),
                   seed: int = 0, ef: EmissionFactorTable | None = None,
                   ratio: Sequence[float] = DEFAULT_RATIO, integer_counts: bool = False) -> EventTimeline:
    """Generate every sensor's readings over the signal duration.

    Dust readings are PM values; camera readings are count vectors obtained
    by inverting the guidebook map on the noisy PM value.
    """
    rng = np.random.default_rng(seed)
    ef = ef or EmissionFactorTable()
    events = []
    for spec in specs:
        t = np.arange(spec.start_s, signal.duration_s, spec.period_s, dtype=np.int64)
        truth = ground_truth(t, signal)
        pm = np.maximum(truth * (1.0 + rng.normal(0.0, spec.sigma, size=t.shape)), 0.0)
        if spec.kind == "camera":
            r = np.asarray(ratio, dtype=float)
            scale = pm / float(r @ ef.as_array())
            vals = scale[:, None] * r[None, :]
            if integer_counts:
                vals = np.rint(vals)
        else:
            vals = pm[:, None]
        events.extend(zip(t.tolist(), [spec.id] * len(t), vals))
    order = {s.id: i for i, s in enumerate(specs)}
    events.sort(key=lambda e: (e[0], order[e[1]]))
    return EventTimeline(events, [s.id for s in specs])


def align_hold_last(timeline: EventTimeline) -> EventTimeline:
    """Fill one assignment per distinct event time with each sensor's latest value.

    Events sharing a timestamp are applied together before the row is taken.
    """
    dims = {}
    for _, s, v in timeline.events:
        dims.setdefault(s, len(v))
        if len(dims) == len(timeline.sensors):
            break
    dims = {s: dims.get(s, 1) for s in timeline.sensors}
    offsets = np.cumsum([0] + [dims[s] for s in timeline.sensors])
    cols = {s: slice(int(offsets[i]), int(offsets[i + 1])) for i, s in enumerate(timeline.sensors)}

    current = np.full(int(offsets[-1]), np.nan)
    reported: set[str] = set()
    times, rows, warm = [], [], []
    events = timeline.events
    i = 0
    while i < len(events):
        t = events[i][0]
        while i < len(events) and events[i][0] == t:
            _, s, v = events[i]
            if s not in cols:
                raise KeyError(f"event from unknown sensor {s!r}")
            current[cols[s]] = v
            reported.add(s)
            i += 1
        times.append(t)
        rows.append(current.copy())
        warm.append(len(reported) < len(timeline.sensors))
    return replace(
        timeline,
        times=np.array(times, dtype=np.int64),
        assignments=np.array(rows).reshape(len(rows), int(offsets[-1])),
        warmup=np.array(warm, dtype=bool),
        columns=cols,
    )

