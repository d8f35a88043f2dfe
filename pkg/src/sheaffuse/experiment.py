"""Naive versus sheaf fusion over an event timeline, scored by MAPE."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .consistency import DEFAULT_CUTOFF_STD, filtration_landmarks, select_consistent
from .estimators import SheafFusionRegressor
from .sheaf import Sheaf, consistency_filtration, propagate
from .simulation import (
    DEFAULT_SENSORS,
    EventTimeline,
    SensorSpec,
    SignalSpec,
    align_hold_last,
    ground_truth,
    sample_streams,
)
from .topology import Topology, load_topology


class WarmupError(ValueError):
    """Requested time precedes the first full assignment."""


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


def mape(estimates, truth) -> float:
    """Mean absolute percentage error, in percent."""
    est = np.asarray(estimates, dtype=float)
    y = np.asarray(truth, dtype=float)
    if est.shape != y.shape:
        raise ValueError(f"length mismatch: {est.shape} vs {y.shape}")
    if est.size == 0:
        raise ValueError("no values to score")
    if np.any(y == 0):
        raise ValueError("truth contains zeros; percentage error is undefined")
    return float(np.mean(np.abs(y - est) / np.abs(y)) * 100.0)


def naive_average(sheaf: Sheaf, assignment) -> float:
    """Mean of all vertex readings after converting each to the common unit."""
    a = sheaf.check_vertex_assignment(assignment)
    return float(np.mean([sheaf.to_common(v, a[v]).mean() for v in sheaf.vertices]))


def moving_average(times, values, window_s: float) -> np.ndarray:
    """Trailing time-window mean: ``out[i]`` averages values with ``t > t_i - window``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    csum = np.concatenate([[0.0], np.cumsum(v)])
    start = np.searchsorted(t, t - window_s, side="right")
    idx = np.arange(len(v))
    return (csum[idx + 1] - csum[start]) / (idx + 1 - start)


@dataclass
class Snapshot:
    time_s: int
    entries: list[tuple[str, float]]
    radius: float
    cutoff: float
    selected: list[str]
    eliminated: list[str]
    value_c: float
    epsilon_c: float
    naive: float
    landmarks: list[dict]
    truth: float | None = None
    window_mape: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "time_s": self.time_s,
            "filtration": [[f, e] for f, e in self.entries],
            "radius": self.radius,
            "cutoff": self.cutoff,
            "selected": self.selected,
            "eliminated": self.eliminated,
            "value_c": self.value_c,
            "epsilon_c": self.epsilon_c,
            "naive": self.naive,
            "truth": self.truth,
            "window_mape": self.window_mape,
            "landmarks": self.landmarks,
        }


def snapshot_from_row(sheaf: Sheaf, row: np.ndarray, time_s: int, convention: str = "reference",
                      cutoff_std: float | None = DEFAULT_CUTOFF_STD, truth: float | None = None) -> Snapshot:
    assignment = {v: row[sheaf.feature_slice(v)] for v in sheaf.vertices}
    result = propagate(sheaf, assignment, convention)
    filt = consistency_filtration(result)
    sel = select_consistent(filt, result, cutoff_std)
    landmarks = [
        {"epsilon": lm.epsilon, "cover": lm.cover.as_lists(), "rank": lm.rank}
        for lm in filtration_landmarks(sheaf, assignment, convention, result=result)
    ]
    return Snapshot(int(time_s), filt.entries, filt.radius, sel.cutoff, sel.faces_c, sel.eliminated,
                    sel.value_c, sel.epsilon_c, naive_average(sheaf, assignment), landmarks, truth)


@dataclass
class ExperimentReport:
    per_sensor_mape: dict[str, float]
    naive_mape: float
    sheaf_mape: float
    sheaf_nocut_mape: float
    improvement_pct: float | None
    times: np.ndarray
    truth: np.ndarray
    naive: np.ndarray
    sheaf: np.ndarray
    sheaf_nocut: np.ndarray
    radius: np.ndarray
    naive_ape_ma: np.ndarray
    sheaf_ape_ma: np.ndarray
    snapshots: list[Snapshot] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "per_sensor_mape": self.per_sensor_mape,
            "naive_mape": self.naive_mape,
            "sheaf_mape": self.sheaf_mape,
            "sheaf_nocut_mape": self.sheaf_nocut_mape,
            "improvement_pct": self.improvement_pct,
            "n_events": int(len(self.times)),
            "snapshots": [s.to_dict() for s in self.snapshots],
        }

    def series_table(self) -> tuple[list[str], np.ndarray]:
        cols = ["timestamp_s", "truth", "naive", "sheaf", "sheaf_nocut", "radius", "naive_ape_ma", "sheaf_ape_ma"]
        data = np.column_stack([self.times, self.truth, self.naive, self.sheaf, self.sheaf_nocut,
                                self.radius, self.naive_ape_ma, self.sheaf_ape_ma])
        return cols, data


def _resolve(topology) -> Sheaf:
    if isinstance(topology, Sheaf):
        return topology
    if isinstance(topology, Topology):
        return topology.sheaf
    return load_topology(topology).sheaf


def _vertex_rows(sheaf: Sheaf, timeline: EventTimeline) -> np.ndarray:
    missing = [v for v in sheaf.vertices if v not in timeline.sensors]
    if missing:
        raise ValueError(f"streams do not cover topology vertices {missing}")
    return np.concatenate([timeline.assignments[:, timeline.columns[v]] for v in sheaf.vertices], axis=1)


def held_lookup(times, values) -> Callable[[np.ndarray], np.ndarray]:
    """Step function returning the latest value at or before each query time (NaN before the first)."""
    times = np.asarray(times)
    values = np.asarray(values, dtype=float)

    def lookup(t):
        i = np.searchsorted(times, np.asarray(t), side="right") - 1
        return np.where(i >= 0, values[np.maximum(i, 0)], np.nan)

    return lookup


def _percent_errors(est, truth):
    return np.abs(truth - est) / np.abs(truth) * 100.0


def run_experiment(timeline: EventTimeline, topology=None, truth: Callable[[np.ndarray], np.ndarray] | None = None,
                   reference: str | None = None, snapshot_times: Sequence[int] = (),
                   ma_window_s: float = 3600.0, snapshot_window_s: float = 600.0,
                   spread: str = "reference", cutoff_std: float = DEFAULT_CUTOFF_STD) -> ExperimentReport:
    """Score naive and sheaf fusion at every event time after warm-up.

    Supply either ``truth`` (a function of time, e.g. the simulated signal)
    or ``reference``, the id of a scalar stream in the timeline used as
    ground truth through hold-last lookup.
    """
    if (truth is None) == (reference is None):
        raise ValueError("give exactly one of truth= or reference=")
    sheaf = _resolve(topology)
    if reference is not None:
        if reference in sheaf.vertices:
            raise ValueError(f"reference stream {reference!r} is also a topology vertex")
        ref_t, ref_v = timeline.stream(reference)
        if reference not in timeline.sensors or not len(ref_t):
            raise ValueError(f"reference stream {reference!r} not found in the readings")
        if ref_v.shape[1] != 1:
            raise ValueError("reference stream must be scalar PM")
        truth = held_lookup(ref_t, ref_v[:, 0])

    if timeline.assignments is None:
        timeline = align_hold_last(timeline)
    ok = ~timeline.warmup
    if not ok.any():
        raise WarmupError("no event time has readings from every sensor")
    times = timeline.times[ok]
    X = _vertex_rows(sheaf, timeline)[ok]
    y = np.asarray(truth(times), dtype=float)

    cut = SheafFusionRegressor(sheaf, spread=spread, cutoff_std=cutoff_std).fit(X[:1])
    nocut = SheafFusionRegressor(sheaf, spread=spread, cutoff_std=None).fit(X[:1])
    parts = cut.decompose(X)
    sheaf_est = parts["values"]
    nocut_est = nocut.predict(X)
    naive_est = cut.predict_naive(X)
    radius = parts["thresholds"].max(axis=1)
    if not (np.all(parts["mask"].any(axis=1)) and np.all(np.isfinite(sheaf_est))):
        raise InvariantError("cutoff selection produced an empty or non-finite estimate")

    per_sensor = {}
    for v in sheaf.vertices:
        t_v, vals = timeline.stream(v)
        pm = sheaf.to_common(v, vals).mean(axis=-1)
        y_v = np.asarray(truth(t_v), dtype=float)
        keep = np.isfinite(y_v)
        per_sensor[v] = mape(pm[keep], y_v[keep])

    naive_m = mape(naive_est, y)
    sheaf_m = mape(sheaf_est, y)
    improvement = None if naive_m < 1e-12 else (naive_m - sheaf_m) / naive_m * 100.0

    snaps = []
    wanted = list(snapshot_times) + [int(times[int(np.argmax(radius))])]
    for t_s in dict.fromkeys(wanted):
        i = int(np.searchsorted(times, t_s, side="right")) - 1
        if i < 0:
            raise WarmupError(f"snapshot time {t_s} precedes the first full assignment at {times[0]}")
        snap = snapshot_from_row(sheaf, X[i], int(times[i]), spread, cutoff_std, float(y[i]))
        win = np.abs(times - times[i]) <= snapshot_window_s / 2
        snap.window_mape = {
            "naive": mape(naive_est[win], y[win]),
            "sheaf": mape(sheaf_est[win], y[win]),
            "sheaf_nocut": mape(nocut_est[win], y[win]),
            "instant_naive": float(_percent_errors(naive_est[i], y[i])),
            "instant_sheaf": float(_percent_errors(sheaf_est[i], y[i])),
            "instant_sheaf_nocut": float(_percent_errors(nocut_est[i], y[i])),
        }
        snaps.append(snap)

    return ExperimentReport(
        per_sensor_mape=per_sensor,
        naive_mape=naive_m,
        sheaf_mape=sheaf_m,
        sheaf_nocut_mape=mape(nocut_est, y),
        improvement_pct=improvement,
        times=times,
        truth=y,
        naive=naive_est,
        sheaf=sheaf_est,
        sheaf_nocut=nocut_est,
        radius=radius,
        naive_ape_ma=moving_average(times, _percent_errors(naive_est, y), ma_window_s),
        sheaf_ape_ma=moving_average(times, _percent_errors(sheaf_est, y), ma_window_s),
        snapshots=snaps,
    )


def simulate_experiment(seed: int = 0, specs: Sequence[SensorSpec] = DEFAULT_SENSORS,
                        signal: SignalSpec = SignalSpec(), topology=None, **kwargs) -> ExperimentReport:
    """Generate a seeded timeline and score it against the noiseless signal."""
    tl = align_hold_last(sample_streams(specs, signal, seed))
    return run_experiment(tl, topology, truth=lambda t: ground_truth(t, signal), **kwargs)


def snapshot_filtration(timeline: EventTimeline, topology, t_s: int, spread: str = "reference",
                        cutoff_std: float = DEFAULT_CUTOFF_STD) -> Snapshot:
    """Filtration, cutoff and selection for the hold-last assignment in force at ``t_s``."""
    sheaf = _resolve(topology)
    if timeline.assignments is None:
        timeline = align_hold_last(timeline)
    i = int(np.searchsorted(timeline.times, t_s, side="right")) - 1
    if i < 0 or timeline.warmup[i]:
        raise WarmupError(f"at t={t_s} not every sensor has reported yet")
    X = _vertex_rows(sheaf, timeline)
    return snapshot_from_row(sheaf, X[i], int(t_s), spread, cutoff_std)


def _seed_summary(seed: int, specs, signal, topology, kwargs) -> dict:
    rep = simulate_experiment(seed, specs, signal, topology, **kwargs)
    return {"seed": seed, "per_sensor_mape": rep.per_sensor_mape, "naive_mape": rep.naive_mape,
            "sheaf_mape": rep.sheaf_mape, "sheaf_nocut_mape": rep.sheaf_nocut_mape,
            "improvement_pct": rep.improvement_pct}


def run_seeds(seeds: Sequence[int], specs: Sequence[SensorSpec] = DEFAULT_SENSORS,
              signal: SignalSpec = SignalSpec(), topology=None, jobs: int = 1, **kwargs) -> list[dict]:
    """Summaries of independent seeded runs, optionally across worker processes."""
    if jobs <= 1:
        return [_seed_summary(s, specs, signal, topology, kwargs) for s in seeds]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_seed_summary, s, specs, signal, topology, kwargs) for s in seeds]
        return [f.result() for f in futures]


def check_report(summary: dict, atol: float = 1e-9) -> None:
    """Raise :class:`InvariantError` if the improvement field disagrees with its MAPE fields."""
    naive, sheaf, imp = summary["naive_mape"], summary["sheaf_mape"], summary["improvement_pct"]
    if imp is None:
        if naive >= 1e-12:
            raise InvariantError("improvement missing although naive MAPE is non-zero")
        return
    if abs(imp - (naive - sheaf) / naive * 100.0) > atol:
        raise InvariantError(f"improvement {imp} disagrees with naive {naive} and sheaf {sheaf}")
