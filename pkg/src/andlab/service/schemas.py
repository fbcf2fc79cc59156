"""Request/response models for the experiment service.

The request body of every experiment endpoint is the full resolved
ExperimentConfig (defined in ``andlab.config``); responses carry the
plot-ready rows plus the summary mapping, exactly what the CLI writes
into its CSV/JSON artifacts.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel


class ExperimentResponse(BaseModel):
    name: str
    columns: list[str]
    rows: list[list[Any]]
    summary: dict[str, Any]
    extras: dict[str, str] = {}


class HealthResponse(BaseModel):
    status: str = "ok"


class VersionResponse(BaseModel):
    tool: str = "andlab"
    version: str


class ErrorBody(BaseModel):
    error: str
    message: str
