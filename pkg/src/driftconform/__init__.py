"""Drift-aware online conformal prediction."""

from .baselines import ACI, decaying_aci, fixed_aci, pathological_union, vacuous_step
from .core import PredictionSet, SetKind, quantile_of_point_masses, threshold_set
from .detect import CoverageWindow, DetectionOutcome, DriftScanner, SigmaSchedule, drift_scan
from .fullconf import ConformalBatch, DriftOCPFull, full_conformal_set, run_driftocp_full
from .learners import ConstantModel, LinearModel, OnlineSGD, RefitRidge, StepsizeSchedule, stability_gap
from .ocp import DriftOCP, quantile_update, run_driftocp
from .streams import StreamConfig, generate_stream, oracle_batch

__version__ = "0.1.0"

__all__ = [
    "ACI",
    "ConformalBatch",
    "ConstantModel",
    "CoverageWindow",
    "DetectionOutcome",
    "DriftOCP",
    "DriftOCPFull",
    "DriftScanner",
    "LinearModel",
    "OnlineSGD",
    "PredictionSet",
    "RefitRidge",
    "SetKind",
    "SigmaSchedule",
    "StepsizeSchedule",
    "StreamConfig",
    "decaying_aci",
    "drift_scan",
    "fixed_aci",
    "full_conformal_set",
    "generate_stream",
    "oracle_batch",
    "pathological_union",
    "quantile_of_point_masses",
    "quantile_update",
    "run_driftocp",
    "run_driftocp_full",
    "stability_gap",
    "threshold_set",
    "vacuous_step",
]
