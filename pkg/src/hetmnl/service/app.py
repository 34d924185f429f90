"""FastAPI application exposing the estimation operations over HTTP.

Run it with ``hetmnl serve`` or ``uvicorn hetmnl.service.app:app``.  Domain
errors (bad data, bad config, failed evaluation) map to 422 responses; a
non-converged fit is still a 200 with ``converged: false`` in the body.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import HetmnlError
from . import api, schemas

__all__ = ["create_app", "app"]


def create_app() -> FastAPI:
    app = FastAPI(
        title="hetmnl",
        description=(
            "Estimation service for multinomial logit models with "
            "chooser-specific scale heterogeneity: fit, predict, simulate, "
            "and probability-curve export."
        ),
        version=__version__,
    )

    @app.exception_handler(HetmnlError)
    async def _domain_error(_: Request, exc: HetmnlError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return api.health()

    @app.post("/fit", response_model=schemas.FitReportModel, response_model_by_alias=True)
    def fit(request: schemas.FitRequest) -> schemas.FitReportModel:
        return api.run_fit(request)

    @app.post("/predict", response_model=schemas.PredictResponse)
    def predict(request: schemas.PredictRequest) -> schemas.PredictResponse:
        return api.run_predict(request)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return api.run_simulate(request)

    @app.post("/curves", response_model=schemas.CurvesResponse)
    def curves(request: schemas.CurvesRequest) -> schemas.CurvesResponse:
        return api.run_curves(request)

    return app


app = create_app()
