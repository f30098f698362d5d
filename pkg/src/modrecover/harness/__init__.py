"""Experiment orchestration: single trials, sweeps, trace files."""

from .config import (
    ConfigError,
    ExactResidual,
    RecoveryTemplate,
    SnrThreshold,
    SweepSpec,
    load_experiment,
    parse_experiment,
)
from .sweep import frontier, rows_to_csv, run_sweep, summary_json
from .traces import TraceError, emit_trace, ingest_trace
from .trial import TrialReport, run_trial

__all__ = [
    "ConfigError",
    "ExactResidual",
    "RecoveryTemplate",
    "SnrThreshold",
    "SweepSpec",
    "TraceError",
    "TrialReport",
    "emit_trace",
    "frontier",
    "ingest_trace",
    "load_experiment",
    "parse_experiment",
    "rows_to_csv",
    "run_sweep",
    "run_trial",
    "summary_json",
]
