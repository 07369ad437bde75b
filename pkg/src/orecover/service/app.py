"""HTTP surface of the recovery toolkit.

Every endpoint is a stateless wrapper over the core solvers: problems come in
as JSON documents, certificates and reports go back as JSON.  Solver failures
map to 422 responses carrying the error class name so clients can script on
them.
"""

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..certify import (
    apply_certificate,
    diagnose_forms,
    minimax_for_problem,
    oracle_check,
    problem_from_document,
    sdpa_for_problem,
    solve_problem_file,
)
from ..errors import OrecoverError
from . import schemas


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except OrecoverError as exc:
        raise HTTPException(
            status_code=422,
            detail={"error": type(exc).__name__, "message": str(exc)},
        ) from exc


def create_app():
    app = FastAPI(
        title="orecover service",
        description=(
            "Radii of information, optimal regularization weights, and linear "
            "recovery maps for two-hyperellipsoid model sets, with brute-force "
            "cross-checks"
        ),
        version=__version__,
    )

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/radius", response_model=schemas.CertificateModel)
    def radius(req: schemas.RadiusRequest):
        pf = _guard(problem_from_document, req.problem.document())
        return _guard(solve_problem_file, pf, req.full_m_table)

    @app.post("/apply", response_model=schemas.ApplyResponse)
    def apply(req: schemas.ApplyRequest):
        return _guard(apply_certificate, req.certificate.model_dump(), req.y)

    @app.post("/oracle", response_model=schemas.OracleReportModel)
    def oracle(req: schemas.OracleRequest):
        pf = _guard(problem_from_document, req.problem.document())
        return _guard(oracle_check, pf, req.certificate.model_dump(), req.budget, req.seed)

    @app.post("/minimax", response_model=schemas.MinimaxResponse)
    def minimax(req: schemas.MinimaxRequest):
        pf = _guard(problem_from_document, req.problem.document())
        return _guard(minimax_for_problem, pf, req.iters)

    @app.post("/export-sdpa", response_model=schemas.SdpaResponse)
    def export_sdpa(req: schemas.SdpaRequest):
        pf = _guard(problem_from_document, req.problem.document())
        return schemas.SdpaResponse(text=_guard(sdpa_for_problem, pf))

    @app.post("/diagnose-n", response_model=schemas.DiagnoseResponse)
    def diagnose(req: schemas.DiagnoseRequest):
        return _guard(diagnose_forms, req.model_dump())

    return app


app = create_app()
