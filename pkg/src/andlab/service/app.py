"""FastAPI application wrapping the experiment runner.

Error contract: configuration and domain errors map to 422, resource
limits to 413, numeric failures to 500; every error body is
``{"error": <kind>, "message": <text>}`` so clients can translate kinds
back into process exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import ExperimentConfig
from ..errors import (
    ConfigurationError,
    DomainError,
    NumericError,
    ResourceError,
)
from ..runner import run_experiment
from .schemas import ExperimentResponse, HealthResponse, VersionResponse

#: error kind -> (HTTP status, CLI exit code)
ERROR_STATUS = {
    "configuration": (422, 2),
    "domain": (422, 2),
    "resource": (413, 4),
    "numeric": (500, 3),
}


def error_kind(exc: Exception) -> str:
    if isinstance(exc, ConfigurationError):
        return "configuration"
    if isinstance(exc, ResourceError):
        return "resource"
    if isinstance(exc, DomainError):
        return "domain"
    if isinstance(exc, NumericError):
        return "numeric"
    raise TypeError(f"not a mapped error type: {type(exc)!r}")


def create_app() -> FastAPI:
    app = FastAPI(title="andlab", version=__version__)

    def _handler(request: Request, exc: Exception) -> JSONResponse:
        kind = error_kind(exc)
        status, _ = ERROR_STATUS[kind]
        return JSONResponse(status_code=status, content={"error": kind, "message": str(exc)})

    for exc_type in (ConfigurationError, DomainError, ResourceError, NumericError):
        app.add_exception_handler(exc_type, _handler)

    def _validation_handler(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422, content={"error": "configuration", "message": str(exc)}
        )

    app.add_exception_handler(RequestValidationError, _validation_handler)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse()

    @app.get("/version", response_model=VersionResponse)
    def version() -> VersionResponse:
        return VersionResponse(version=__version__)

    @app.post("/experiments/{name}", response_model=ExperimentResponse)
    def run(name: str, config: ExperimentConfig) -> ExperimentResponse:
        # unknown names raise ConfigurationError -> 422 with the error body
        result = run_experiment(name, config)
        return ExperimentResponse(
            name=result.name,
            columns=result.columns,
            rows=result.rows,
            summary=result.summary,
            extras=result.extras,
        )

    return app
