"""Pruned executable failure reports for MiniBuild projects."""

from pexrep.model import FailureOutcome, FailureTrace, ItemKind, ItemRef, LibCoord, TaskKind
from pexrep.pipeline import CreateResult, create_report
from pexrep.reconstruct import Options, ReproPackage, assemble_report
from pexrep.report import Metrics, ValidationResult, compute_metrics, validate_report
from pexrep.tracer import TraceResult, hybrid_backward_trace

__all__ = [
    "CreateResult",
    "FailureOutcome",
    "FailureTrace",
    "ItemKind",
    "ItemRef",
    "LibCoord",
    "Metrics",
    "Options",
    "ReproPackage",
    "TaskKind",
    "TraceResult",
    "ValidationResult",
    "assemble_report",
    "compute_metrics",
    "create_report",
    "hybrid_backward_trace",
    "validate_report",
]
