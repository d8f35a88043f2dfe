"""Vehicle counts to PM2.5, and daily lag / base-pattern estimation."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

HOURS = 24

DEFAULT_EMISSION_FACTORS = {"two_wheeled": 0.047, "four_wheeled": 0.117}

GB_MODES = ("mass", "concentration")
BOUNDARY_MODES = ("circular", "truncated")


class DegenerateSeriesWarning(UserWarning):
    """Raised as a warning when a constant series makes the lag meaningless."""


@dataclass(frozen=True)
class EmissionFactorTable:
    """PM2.5 emission factor per vehicle type, in g/km.

    Iteration order of ``entries`` fixes the column order of count vectors.
    """

    entries: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_EMISSION_FACTORS))

    def __post_init__(self):
        if not self.entries:
            raise ValueError("emission factor table is empty")
        for k, v in self.entries.items():
            if not v > 0:
                raise ValueError(f"emission factor for {k!r} must be positive, got {v}")

    @property
    def types(self) -> list[str]:
        return list(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array([self.entries[t] for t in self.entries], dtype=float)

    @classmethod
    def load(cls, path) -> EmissionFactorTable:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = data.get("emission_factors_g_per_km", data)
        return cls({str(k): float(v) for k, v in entries.items()})

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps({"emission_factors_g_per_km": self.entries}, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class VehicleCounts:
    counts: dict[str, float]
    vkt_km: float = 1.0

    def __post_init__(self):
        if not self.vkt_km > 0:
            raise ValueError(f"street segment length must be positive, got {self.vkt_km}")
        for k, n in self.counts.items():
            if n < 0:
                raise ValueError(f"negative count for {k!r}: {n}")

    @classmethod
    def from_pair(cls, pair, ef: EmissionFactorTable | None = None, vkt_km: float = 1.0) -> VehicleCounts:
        types = (ef or EmissionFactorTable()).types
        if len(pair) != len(types):
            raise ValueError(f"expected {len(types)} counts, got {len(pair)}")
        return cls(dict(zip(types, (float(x) for x in pair))), vkt_km)

    def as_array(self, ef: EmissionFactorTable) -> np.ndarray:
        unknown = set(self.counts) - set(ef.entries)
        if unknown:
            raise KeyError(f"no emission factor for vehicle types {sorted(unknown)}")
        return np.array([self.counts.get(t, 0.0) for t in ef.types], dtype=float)


@dataclass(frozen=True)
class DailySeries:
    """Hourly values for one day, hour 0 first."""

    hours: np.ndarray
    kind: str = "sensor"

    def __post_init__(self):
        arr = np.asarray(self.hours, dtype=float)
        if arr.shape != (HOURS,):
            raise ValueError(f"a daily series has exactly {HOURS} hourly values, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("daily series contains non-finite values")
        object.__setattr__(self, "hours", arr)

    def __array__(self, dtype=None, copy=None):
        return self.hours if dtype is None else self.hours.astype(dtype)

    def __len__(self) -> int:
        return HOURS


def emitted_mass(counts: VehicleCounts, ef: EmissionFactorTable | None = None) -> dict[str, float]:
    """Emitted PM2.5 mass in grams per vehicle type: count x factor x segment length."""
    ef = ef or EmissionFactorTable()
    unknown = set(counts.counts) - set(ef.entries)
    if unknown:
        raise KeyError(f"no emission factor for vehicle types {sorted(unknown)}")
    return {t: n * ef.entries[t] * counts.vkt_km for t, n in counts.counts.items()}


def concentration(total_mass_g: float, vkt_km: float) -> float:
    """µg/m³ for a mass spread evenly over a cube with the segment length as side."""
    if not vkt_km > 0:
        raise ValueError(f"street segment length must be positive, got {vkt_km}")
    return total_mass_g * 1e6 / (vkt_km * 1000.0) ** 3


def guidebook_map(counts: VehicleCounts, ef: EmissionFactorTable | None = None, mode: str = "mass") -> float:
    """Convert vehicle counts to a PM2.5 scalar.

    ``mode="mass"`` returns total emitted grams, the convention under which
    200 motorbikes and 30 cars read as 12.91.  ``mode="concentration"``
    additionally applies the cube-volume normalisation.
    """
    if mode not in GB_MODES:
        raise ValueError(f"unknown guidebook mode {mode!r}; expected one of {GB_MODES}")
    total = sum(emitted_mass(counts, ef).values())
    if mode == "concentration":
        return concentration(total, counts.vkt_km)
    return total


def guidebook_array(counts, ef: EmissionFactorTable | None = None, mode: str = "mass", vkt_km: float = 1.0) -> np.ndarray:
    """Vectorised guidebook map over rows of count vectors, shape (..., n_types) -> (...,)."""
    if mode not in GB_MODES:
        raise ValueError(f"unknown guidebook mode {mode!r}; expected one of {GB_MODES}")
    if not vkt_km > 0:
        raise ValueError(f"street segment length must be positive, got {vkt_km}")
    ef = ef or EmissionFactorTable()
    mass = np.asarray(counts, dtype=float) @ ef.as_array() * vkt_km
    if mode == "concentration":
        mass = mass * 1e6 / (vkt_km * 1000.0) ** 3
    return mass


def shift(series, lag: int, boundary: str = "circular") -> np.ndarray:
    """Series delayed by ``lag`` hours: ``out[h] = series[h - lag]``.

    In truncated mode the hours before ``lag`` have no source and are NaN.
    """
    x = np.asarray(series, dtype=float)
    if boundary == "circular":
        return np.roll(x, lag)
    if boundary == "truncated":
        out = np.full_like(x, np.nan)
        out[lag:] = x[: len(x) - lag]
        return out
    raise ValueError(f"unknown boundary mode {boundary!r}; expected one of {BOUNDARY_MODES}")


def lag_correlations(p_v, p_s, max_lag_hours: int = 12, boundary: str = "circular") -> np.ndarray:
    """Mean-removed, normalised correlation of delayed ``p_v`` against ``p_s`` for each lag."""
    v = np.asarray(p_v, dtype=float)
    s = np.asarray(p_s, dtype=float)
    if v.shape != s.shape:
        raise ValueError("series must have equal length")
    if not 1 <= max_lag_hours <= len(v) - 1:
        raise ValueError(f"max_lag_hours must lie in [1, {len(v) - 1}], got {max_lag_hours}")
    out = np.full(max_lag_hours + 1, np.nan)
    for lag in range(max_lag_hours + 1):
        shifted = shift(v, lag, boundary)
        ok = ~np.isnan(shifted)
        a = shifted[ok] - shifted[ok].mean()
        b = s[ok] - s[ok].mean()
        denom = np.sqrt(np.dot(a, a) * np.dot(b, b))
        if denom > 0:
            out[lag] = np.dot(a, b) / denom
    return out


def estimate_lag(p_v, p_s, max_lag_hours: int = 12, boundary: str = "circular") -> int:
    """Lag (hours) at which the vehicle-derived series best explains the sensor series.

    Ties go to the smaller lag.  A constant input yields 0 and a
    :class:`DegenerateSeriesWarning`.
    """
    lag = best_lag(lag_correlations(p_v, p_s, max_lag_hours, boundary))
    if lag is None:
        warnings.warn("constant series; lag is undefined, returning 0", DegenerateSeriesWarning, stacklevel=2)
        return 0
    return lag


def best_lag(correlations) -> int | None:
    """Index of the largest correlation (first on ties); ``None`` if all are undefined."""
    corr = np.asarray(correlations, dtype=float)
    if np.all(np.isnan(corr)):
        return None
    return int(np.flatnonzero(corr >= np.nanmax(corr) - 1e-12)[0])


def base_pattern(p_s, p_v, lag: int, boundary: str = "circular") -> DailySeries:
    """Hourly contribution of non-vehicle sources: sensor minus delayed vehicle PM."""
    diff = np.asarray(p_s, dtype=float) - shift(p_v, lag, boundary)
    if boundary == "truncated":
        # hours without a delayed vehicle value keep the raw sensor reading
        diff = np.where(np.isnan(diff), np.asarray(p_s, dtype=float), diff)
    return DailySeries(diff, kind="base")


def total_pm25(base_prev, p_v_today, lag: int, hour: int) -> float:
    """Yesterday's base at ``hour`` plus today's vehicle PM delayed by ``lag``."""
    if not 0 <= hour < HOURS:
        raise ValueError(f"hour must lie in [0, {HOURS - 1}], got {hour}")
    base = np.asarray(base_prev, dtype=float)
    pv = np.asarray(p_v_today, dtype=float)
    return float(base[hour] + pv[(hour - lag) % HOURS])


def load_emission_factors(path=None) -> EmissionFactorTable:
    if path is None:
        return EmissionFactorTable()
    return EmissionFactorTable.load(path)

