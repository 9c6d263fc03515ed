"""FastAPI application exposing the estimator pipeline.

Error contract: domain validation problems map to 422 with
``detail.kind == "validation"``, unreadable input files to 422 with
``detail.kind == "parse"``, and nets that blow the capacity budget to 409
with ``detail.kind == "capacity"`` plus the data needed to retry coarser.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..datasets import dataset_csv_text, parse_dataset_csv
from ..errors import CapacityError, ParameterError, ParseError
from ..evaluation import sweep_rows_csv
from ..geometry import net_csv_text
from . import assemble
from .schemas import (
    AuditRequest,
    FitRequest,
    NetRequest,
    NetResponse,
    SweepRequest,
    SweepResponse,
    SynthRequest,
    SynthResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="privlad", version=__version__)

    @app.exception_handler(ParseError)
    async def _on_parse(request: Request, exc: ParseError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"detail": {"kind": "parse", "message": str(exc)}},
        )

    @app.exception_handler(ParameterError)
    async def _on_parameter(request: Request, exc: ParameterError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"detail": {"kind": "validation", "message": str(exc)}},
        )

    @app.exception_handler(CapacityError)
    async def _on_capacity(request: Request, exc: CapacityError) -> JSONResponse:
        return JSONResponse(
            status_code=409,
            content={
                "detail": {
                    "kind": "capacity",
                    "message": str(exc),
                    "required_cap": exc.required_cap,
                    "suggested_zeta": exc.suggested_zeta,
                }
            },
        )

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/synth", response_model=SynthResponse)
    async def synth_endpoint(req: SynthRequest) -> SynthResponse:
        dataset = assemble.run_synth(req.config, req.n)
        return SynthResponse(csv=dataset_csv_text(dataset), n=dataset.n, d=dataset.d)

    @app.post("/v1/fit")
    async def fit_endpoint(req: FitRequest) -> dict:
        dataset = parse_dataset_csv(req.dataset_csv, path="dataset_csv")
        return assemble.run_fit(req.config, dataset).to_dict()

    @app.post("/v1/audit")
    async def audit_endpoint(req: AuditRequest) -> dict:
        return assemble.run_audit(req.config).to_dict()

    @app.post("/v1/sweep", response_model=SweepResponse)
    async def sweep_endpoint(req: SweepRequest) -> SweepResponse:
        result = assemble.run_sweep(req.config)
        return SweepResponse(rows_csv=sweep_rows_csv(result.rows), summary=result.summary)

    @app.post("/v1/net", response_model=NetResponse)
    async def net_endpoint(req: NetRequest) -> NetResponse:
        net, bound = assemble.run_net(req.config)
        return NetResponse(
            csv=net_csv_text(net),
            cardinality=net.cardinality,
            zeta=net.zeta,
            bound=bound,
        )

    return app
