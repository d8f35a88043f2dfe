"""Sheaf-based consistency filtering and fusion for heterogeneous sensor networks."""

from .consistency import (
    ConsistentSelection,
    VertexCover,
    cover_rank,
    filtration_landmarks,
    maximal_consistent_vertex_sets,
    select_consistent,
)
from .emissions import (
    DailySeries,
    EmissionFactorTable,
    VehicleCounts,
    base_pattern,
    concentration,
    emitted_mass,
    estimate_lag,
    guidebook_map,
    total_pm25,
)
from .estimators import GuidebookTransformer, LagEstimator, SheafFusionRegressor
from .experiment import ExperimentReport, mape, naive_average, run_experiment, simulate_experiment, snapshot_filtration
from .sheaf import (
    ConsistencyFiltration,
    PropagationResult,
    Sheaf,
    StalkSpec,
    build_sheaf,
    consistency_filtration,
    consistency_radius,
    is_global_section,
    is_pseudosection,
    propagate,
    spread,
    validate_functoriality,
)
from .simplicial import AttachmentDag, Face, SimplicialComplex, attachment_dag, complex_from_generators, induced_subcomplex, star
from .simulation import SensorSpec, SignalSpec, align_hold_last, ground_truth, inverse_guidebook, sample_streams
from .topology import default_sheaf, default_topology, load_topology

__version__ = "0.1.0"

__all__ = [
    "AttachmentDag",
    "ConsistencyFiltration",
    "ConsistentSelection",
    "DailySeries",
    "EmissionFactorTable",
    "ExperimentReport",
    "Face",
    "GuidebookTransformer",
    "LagEstimator",
    "PropagationResult",
    "SensorSpec",
    "Sheaf",
    "SheafFusionRegressor",
    "SignalSpec",
    "SimplicialComplex",
    "StalkSpec",
    "VehicleCounts",
    "VertexCover",
    "align_hold_last",
    "attachment_dag",
    "base_pattern",
    "build_sheaf",
    "complex_from_generators",
    "concentration",
    "consistency_filtration",
    "consistency_radius",
    "cover_rank",
    "default_sheaf",
    "default_topology",
    "emitted_mass",
    "estimate_lag",
    "filtration_landmarks",
    "ground_truth",
    "guidebook_map",
    "induced_subcomplex",
    "inverse_guidebook",
    "is_global_section",
    "is_pseudosection",
    "load_topology",
    "mape",
    "maximal_consistent_vertex_sets",
    "naive_average",
    "propagate",
    "run_experiment",
    "sample_streams",
    "select_consistent",
    "simulate_experiment",
    "snapshot_filtration",
    "spread",
    "star",
    "total_pm25",
    "validate_functoriality",
]
