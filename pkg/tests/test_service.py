"""HTTP service checks: endpoint wiring, validation, report parity."""
from __future__ import annotations

import math

import pytest
from fastapi.testclient import TestClient

from modgeo import __version__
from modgeo.service.app import app, dispatch
from modgeo.service.models import REQUEST_MODELS, PairVerifyRequest


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def _normalize(report: dict) -> dict:
    """Strip wall-clock fields so two runs can be compared exactly."""
    out = dict(report)
    out.pop("generated_at", None)
    if "instances" in out:
        cleaned = []
        for inst in out["instances"]:
            inst = dict(inst)
            inst["resources"] = {k: v for k, v in inst["resources"].items()
                                 if k != "seconds"}
            cleaned.append(inst)
        out["instances"] = cleaned
    if "resources" in out:
        out["resources"] = {k: v for k, v in out["resources"].items()
                            if k != "seconds"}
    return out


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_openapi_lists_all_endpoints(client):
    paths = client.get("/openapi.json").json()["paths"]
    for route in ("/health", "/verify/thm1", "/verify/katok",
                  "/verify/thm2", "/verify/periods", "/coeffs",
                  "/histogram"):
        assert route in paths


def test_thm1_roundtrip(client):
    resp = client.post("/verify/thm1",
                       json={"k": [2], "gamma_disc": 5, "sigma_traces": [6]})
    assert resp.status_code == 200
    report = resp.json()
    assert report["counts"] == {"pass": 1, "fail": 0, "error": 0}
    assert report["all_pass"] is True
    assert report["instances"][0]["residual"] < 1e-6


def test_thm1_matches_in_process_dispatch(client):
    payload = {"k": [2], "gamma_disc": 5, "sigma_traces": [6]}
    via_http = client.post("/verify/thm1", json=payload).json()
    direct = dispatch("thm1", PairVerifyRequest(**payload))
    assert _normalize(via_http) == _normalize(direct)


def test_katok_roundtrip(client):
    resp = client.post("/verify/katok",
                       json={"k": [2], "gamma_disc": 5, "sigma_traces": [6]})
    assert resp.status_code == 200
    assert resp.json()["all_pass"] is True


def test_thm2_roundtrip(client):
    resp = client.post("/verify/thm2",
                       json={"k": [3], "discs": [5], "dc": [[0, 1]]})
    assert resp.status_code == 200
    assert resp.json()["counts"]["pass"] == 1


def test_periods_roundtrip(client):
    resp = client.post("/verify/periods", json={"k": [3], "discs": [5]})
    assert resp.status_code == 200
    report = resp.json()
    assert report["all_pass"] is True
    assert report["instances"][0]["report"]["ratios"]


def test_coeffs_roundtrip(client):
    resp = client.post("/coeffs",
                       json={"k": 3, "gamma_disc": 5, "n_max": 4})
    assert resp.status_code == 200
    table = resp.json()
    assert [c["n"] for c in table["coeffs"]] == [1, 2, 3, 4]
    assert all(math.isfinite(c["re"]) and math.isfinite(c["im"])
               for c in table["coeffs"])


def test_histogram_roundtrip(client):
    resp = client.post("/histogram", json={"discs": [8, 12]})
    assert resp.status_code == 200
    report = resp.json()
    assert len(report["summaries"]) == 2
    assert len(report["rows"]) == sum(s["count"]
                                      for s in report["summaries"])
    assert all(-1.0 <= row["cos_angle"] <= 1.0 for row in report["rows"])
    assert "discs" in report["trend"]


@pytest.mark.parametrize("payload", [
    {"k": [3], "discs": [5], "dc": [[2, 4]]},       # gcd(d, c) != 1
    {"k": [3], "discs": [5], "dc": [[1, 0]]},       # c = 0
    {"k": [3], "discs": [5], "dc": [[0, 1, 2]]},    # not a pair
    {"k": [4], "discs": [5], "dc": [[0, 1]]},       # even weight
    {"k": [], "discs": [5], "dc": [[0, 1]]},        # no weights
    {"k": [3], "discs": [7], "dc": [[0, 1]]},       # not a discriminant
    {"k": [3], "discs": [5], "dc": [[0, 1]], "tol": 0.0},
    {"k": [3], "discs": [5], "dc": [[0, 1]], "bogus": 1},
])
def test_thm2_validation_rejected(client, payload):
    assert client.post("/verify/thm2", json=payload).status_code == 422


@pytest.mark.parametrize("payload", [
    {"k": [2], "sigma_traces": [6]},                          # no gamma
    {"k": [2], "gamma_disc": 5},                              # no sigma
    {"k": [1], "gamma_disc": 5, "sigma_traces": [6]},         # k < 2
    {"k": [2], "gamma_disc": 5, "sigma_traces": [2]},         # not hyperbolic
    {"k": [2], "gamma_matrix": [1, 1, 1, 1], "sigma_traces": [6]},
    {"k": [2], "gamma_matrix": [1, 1, 0, 1], "sigma_traces": [6]},
    {"k": [2], "gamma_disc": 5, "sigma_matrices": [[1, 2, 2]]},
])
def test_thm1_validation_rejected(client, payload):
    assert client.post("/verify/thm1", json=payload).status_code == 422


def test_request_models_cover_every_command():
    assert set(REQUEST_MODELS) == {"thm1", "katok", "thm2", "periods",
                                   "coeffs", "histogram"}
