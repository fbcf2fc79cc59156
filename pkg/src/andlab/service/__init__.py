"""HTTP service exposing the experiment runner."""

from .app import create_app
from .schemas import ErrorBody, ExperimentResponse, HealthResponse, VersionResponse

__all__ = [
    "create_app",
    "ErrorBody",
    "ExperimentResponse",
    "HealthResponse",
    "VersionResponse",
]
