"""HTTP facade over the verification suites.

Every endpoint accepts one of the request models, dispatches to the same
handlers the command-line client uses in-process, and returns the report
JSON unchanged; a client computes pass/fail from the report body exactly
as the CLI does.  Domain validation errors surface as 422 responses.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .. import __version__
from ..experiments import (expand_cusp_instances, expand_pair_instances,
                           expand_period_instances, run_coeffs, run_histogram,
                           run_suite)
from .models import (CoeffsRequest, CuspVerifyRequest, HistogramRequest,
                     PairVerifyRequest, PeriodsVerifyRequest)


def dispatch(command: str, req: BaseModel) -> dict:
    """Run one validated request in-process and return the report dict."""
    if command in ("thm1", "katok"):
        assert isinstance(req, PairVerifyRequest)
        payloads = expand_pair_instances(req.k, req.gamma_class(),
                                         req.sigmas())
        return run_suite(command, payloads, req.settings(command))
    if command == "thm2":
        assert isinstance(req, CuspVerifyRequest)
        payloads = expand_cusp_instances(
            req.k, req.discs, [tuple(p) for p in req.dc])
        return run_suite(command, payloads, req.settings(command))
    if command == "periods":
        assert isinstance(req, PeriodsVerifyRequest)
        payloads = expand_period_instances(req.k, req.discs)
        return run_suite(command, payloads, req.settings(command))
    if command == "coeffs":
        assert isinstance(req, CoeffsRequest)
        return run_coeffs(req.k, req.gamma_class(), n_max=req.n_max,
                          y=req.y, settings=req.settings(command))
    if command == "histogram":
        assert isinstance(req, HistogramRequest)
        return run_histogram(req.gamma_class(), req.discs, bins=req.bins)
    raise ValueError(f"unknown command {command!r}")


app = FastAPI(title="modgeo", version=__version__,
              description="verification suites for closed-geodesic "
                          "identities of binary quadratic forms")


def _guarded(command: str, req: BaseModel) -> dict:
    try:
        return dispatch(command, req)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/verify/thm1")
def verify_thm1(req: PairVerifyRequest) -> dict:
    return _guarded("thm1", req)


@app.post("/verify/katok")
def verify_katok(req: PairVerifyRequest) -> dict:
    return _guarded("katok", req)


@app.post("/verify/thm2")
def verify_thm2(req: CuspVerifyRequest) -> dict:
    return _guarded("thm2", req)


@app.post("/verify/periods")
def verify_periods(req: PeriodsVerifyRequest) -> dict:
    return _guarded("periods", req)


@app.post("/coeffs")
def coeffs(req: CoeffsRequest) -> dict:
    return _guarded("coeffs", req)


@app.post("/histogram")
def histogram(req: HistogramRequest) -> dict:
    return _guarded("histogram", req)
