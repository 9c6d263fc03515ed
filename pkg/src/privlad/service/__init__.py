"""HTTP service wrapping the estimator; the CLI is a thin client of it."""

from .app import create_app
from .schemas import (
    AuditSpec,
    DesignSpec,
    EstimatorSpec,
    ExperimentSpec,
    ModelSpec,
    NoiseSpec,
    RunConfig,
    SetSpec,
)

__all__ = [
    "AuditSpec",
    "DesignSpec",
    "EstimatorSpec",
    "ExperimentSpec",
    "ModelSpec",
    "NoiseSpec",
    "RunConfig",
    "SetSpec",
    "create_app",
]
