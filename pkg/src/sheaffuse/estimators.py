"""scikit-learn compatible wrappers.

Rows of ``X`` are flattened vertex assignments in the sheaf's vertex order
(see ``vertex_features_`` after fitting); count vertices occupy one column
per vehicle type.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, column_or_1d

from .consistency import DEFAULT_CUTOFF_STD, select_consistent_batch
from .emissions import (
    HOURS,
    BOUNDARY_MODES,
    DegenerateSeriesWarning,
    EmissionFactorTable,
    GB_MODES,
    base_pattern,
    best_lag,
    guidebook_array,
    lag_correlations,
    shift,
)
from .sheaf import (
    SPREAD_CONVENTIONS,
    ConsistencyFiltration,
    PropagationResult,
    Sheaf,
    consistency_filtration,
    spread_batch,
)
from .topology import Topology, load_topology


def _resolve_sheaf(topology) -> Sheaf:
    if isinstance(topology, Sheaf):
        return topology
    if isinstance(topology, Topology):
        return topology.sheaf
    return load_topology(topology).sheaf


class SheafFusionRegressor(RegressorMixin, BaseEstimator):
    """Fuse heterogeneous vertex readings through a sheaf's consistency filtration.

    Nothing is learned from data: ``fit`` builds the sheaf and checks the
    feature layout.  ``transform`` returns per-face consistency thresholds;
    ``predict`` averages the mean lifted values of faces whose threshold is
    at most ``mean + cutoff_std * std`` of that row's thresholds.

    Parameters
    ----------
    topology : path, Topology, Sheaf or None
        ``None`` uses the bundled two-camera/two-sensor network.
    spread : {"reference", "paper-eq6"}
    ddof : int
        Covariance divisor offset; 1 is the sample covariance.
    cutoff_std : float or None
        ``None`` averages every face (no cutoff).
    """

    def __init__(self, topology=None, spread="reference", ddof=1, cutoff_std=DEFAULT_CUTOFF_STD):
        self.topology = topology
        self.spread = spread
        self.ddof = ddof
        self.cutoff_std = cutoff_std

    def fit(self, X, y=None):
        if self.spread not in SPREAD_CONVENTIONS:
            raise ValueError(f"spread must be one of {SPREAD_CONVENTIONS}, got {self.spread!r}")
        self.sheaf_ = _resolve_sheaf(self.topology)
        X = check_array(X)
        if X.shape[1] != self.sheaf_.n_features:
            raise ValueError(f"X has {X.shape[1]} features, the sheaf expects {self.sheaf_.n_features}")
        self.n_features_in_ = X.shape[1]
        self.vertex_features_ = np.array(self.sheaf_.feature_names, dtype=object)
        self.face_names_ = list(self.sheaf_.faces)
        return self

    def _check(self, X):
        check_is_fitted(self, "sheaf_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X

    def _lift(self, X):
        lifted = self.sheaf_.lift_batch(X)
        thresholds = np.column_stack(
            [spread_batch(lifted[f], self.spread, self.ddof) for f in self.face_names_]
        )
        means = np.column_stack([lifted[f].mean(axis=(0, 2)) for f in self.face_names_])
        return lifted, thresholds, means

    def transform(self, X):
        """Consistency threshold of each face, columns in ``face_names_`` order."""
        X = self._check(X)
        return self._lift(X)[1]

    def decompose(self, X):
        """Thresholds, face means, selected-face mask and ``epsilon_c`` per row."""
        X = self._check(X)
        _, thr, means = self._lift(X)
        values, eps_c, mask = select_consistent_batch(thr, means, self.cutoff_std)
        return {"thresholds": thr, "face_means": means, "mask": mask, "epsilon_c": eps_c, "values": values}

    def predict(self, X):
        return self.decompose(X)["values"]

    def predict_naive(self, X):
        """Plain mean of the vertex readings expressed in the common PM unit."""
        X = self._check(X)
        blocks = self.sheaf_.unflatten(X)
        cols = [self.sheaf_.to_common(v, blocks[v]).mean(axis=-1) for v in self.sheaf_.vertices]
        return np.mean(cols, axis=0)

    def propagation(self, x) -> PropagationResult:
        """Lifted values and thresholds for a single row."""
        x = self._check(np.atleast_2d(x))
        if x.shape[0] != 1:
            raise ValueError("propagation takes a single row")
        lifted, thr, _ = self._lift(x)
        return PropagationResult(
            {f: lifted[f][:, 0, :] for f in self.face_names_},
            {f: float(thr[0, i]) for i, f in enumerate(self.face_names_)},
        )

    def filtration(self, x) -> ConsistencyFiltration:
        return consistency_filtration(self.propagation(x))


class GuidebookTransformer(TransformerMixin, BaseEstimator):
    """Vehicle count rows -> PM2.5 column via emission factors."""

    def __init__(self, emission_factors=None, mode="mass", vkt_km=1.0):
        self.emission_factors = emission_factors
        self.mode = mode
        self.vkt_km = vkt_km

    def fit(self, X, y=None):
        if self.mode not in GB_MODES:
            raise ValueError(f"mode must be one of {GB_MODES}, got {self.mode!r}")
        if not self.vkt_km > 0:
            raise ValueError("vkt_km must be positive")
        ef = self.emission_factors
        if isinstance(ef, EmissionFactorTable):
            self.ef_ = ef
        elif ef:
            self.ef_ = EmissionFactorTable(dict(ef))
        else:
            self.ef_ = EmissionFactorTable()
        X = check_array(X)
        if X.shape[1] != len(self.ef_.entries):
            raise ValueError(f"X has {X.shape[1]} columns, expected one per vehicle type {self.ef_.types}")
        if np.any(X < 0):
            raise ValueError("vehicle counts must be non-negative")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "ef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return guidebook_array(X, self.ef_, self.mode, self.vkt_km)[:, None]

    def get_feature_names_out(self, input_features=None):
        return np.array(["pm25"], dtype=object)


class LagEstimator(BaseEstimator):
    """Daily delay between vehicle-derived and sensed PM2.5, plus the base pattern.

    ``fit(p_v, p_s)`` takes one day of hourly vehicle-derived PM and sensor PM.
    ``predict(p_v_next)`` returns the next day's hourly total:
    this day's base pattern plus the delayed vehicle PM.
    """

    def __init__(self, max_lag_hours=12, boundary="circular"):
        self.max_lag_hours = max_lag_hours
        self.boundary = boundary

    def _series(self, x, name):
        x = column_or_1d(np.asarray(x, dtype=float))
        if x.shape != (HOURS,):
            raise ValueError(f"{name} must hold {HOURS} hourly values, got {x.shape[0]}")
        return x

    def fit(self, X, y):
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")
        p_v = self._series(X, "p_v")
        p_s = self._series(y, "p_s")
        self.correlations_ = lag_correlations(p_v, p_s, self.max_lag_hours, self.boundary)
        lag = best_lag(self.correlations_)
        self.degenerate_ = lag is None
        if self.degenerate_:
            warnings.warn("constant series; lag is undefined, using 0", DegenerateSeriesWarning, stacklevel=2)
        self.lag_ = lag or 0
        self.base_ = base_pattern(p_s, p_v, self.lag_, self.boundary)
        return self

    def predict(self, X):
        check_is_fitted(self, "lag_")
        p_v = self._series(X, "p_v")
        delayed = shift(p_v, self.lag_, self.boundary)
        if self.boundary == "truncated":
            delayed = np.nan_to_num(delayed)
        return self.base_.hours + delayed
