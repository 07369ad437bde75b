import numpy as np
import pytest
from fastapi.testclient import TestClient

from orecover.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def e1_problem():
    return {
        "dim": 2,
        "scenario": "exact",
        "Lambda": [[1.0, 0.0]],
        "Q": [[1.0, 0.0], [0.0, 1.0]],
        "R": [[1.0, 0.0], [0.0, 1.0]],
        "S": [[1.0, 0.0], [0.0, 2.0]],
    }


def l1_problem():
    return {
        "dim": 2,
        "scenario": "l1",
        "Lambda": [[1.0, 0.0]],
        "Q": [[1.0, 0.0], [0.0, 1.0]],
        "R": [[1.0, 0.0], [0.0, 1.0]],
        "epsilon": 1.0,
        "eta": 0.5,
    }


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_radius_endpoint(client):
    resp = client.post("/radius", json={"problem": e1_problem()})
    assert resp.status_code == 200
    cert = resp.json()
    assert abs(cert["radius_sq"] - 0.25) < 1e-9
    assert cert["a_sharp"] == 0.0
    assert abs(cert["b_sharp"] - 0.25) < 1e-9
    assert cert["radius_sq"] == cert["a_sharp"] + cert["b_sharp"]
    assert len(cert["input_hash"]) == 64
    assert cert["l1"] is None


def test_radius_rank_deficient_lambda(client):
    prob = e1_problem()
    prob["Lambda"] = [[1.0, 0.0], [2.0, 0.0]]
    resp = client.post("/radius", json={"problem": prob})
    assert resp.status_code == 422
    assert resp.json()["detail"]["error"] == "RankDeficient"


def test_apply_endpoint(client):
    cert = client.post("/radius", json={"problem": e1_problem()}).json()
    resp = client.post("/apply", json={"certificate": cert, "y": [3.0]})
    assert resp.status_code == 200
    body = resp.json()
    assert np.allclose(body["f_hat"], [3.0, 0.0])
    assert np.allclose(body["q_hat"], [3.0, 0.0])
    # zero maps to zero by linearity
    body = client.post("/apply", json={"certificate": cert, "y": [0.0]}).json()
    assert body["f_hat"] == [0.0, 0.0]
    # wrong length is a client error
    resp = client.post("/apply", json={"certificate": cert, "y": [1.0, 2.0]})
    assert resp.status_code == 422


def test_oracle_endpoint_sound_and_tampered(client):
    cert = client.post("/radius", json={"problem": e1_problem()}).json()
    resp = client.post(
        "/oracle",
        json={"problem": e1_problem(), "certificate": cert, "budget": 10000},
    )
    assert resp.status_code == 200
    rep = resp.json()
    assert rep["sound"] is True
    assert rep["gap"] <= 1e-3
    tampered = dict(cert)
    tampered["radius_sq"] = cert["radius_sq"] / 2
    resp = client.post(
        "/oracle", json={"problem": e1_problem(), "certificate": tampered}
    )
    assert resp.json()["sound"] is False


def test_oracle_hash_mismatch(client):
    cert = client.post("/radius", json={"problem": e1_problem()}).json()
    other = e1_problem()
    other["S"] = [[1.0, 0.0], [0.0, 3.0]]
    resp = client.post("/oracle", json={"problem": other, "certificate": cert})
    assert resp.status_code == 422
    assert "hash" in resp.json()["detail"]["message"]


def test_l1_radius_and_minimax(client):
    resp = client.post("/radius", json={"problem": l1_problem()})
    assert resp.status_code == 200
    cert = resp.json()
    assert cert["l1"]["verdict"] == "Holds"  # single observation axis
    assert cert["l1"]["k"] == 0
    resp = client.post("/minimax", json={"problem": l1_problem(), "iters": 3})
    assert resp.status_code == 200
    body = resp.json()
    assert body["value"] <= body["upper_start"] + 1e-12


def test_export_sdpa_endpoint(client):
    resp = client.post("/export-sdpa", json={"problem": l1_problem()})
    assert resp.status_code == 200
    text = resp.json()["text"]
    assert text.splitlines()[0] == "5 = mDIM"
    # non-l1 scenarios are a usage error
    resp = client.post("/export-sdpa", json={"problem": e1_problem()})
    assert resp.status_code == 422


def test_diagnose_endpoint(client):
    resp = client.post(
        "/diagnose-n",
        json={
            "dim": 2,
            "Lambda": [[1.0, 0.0]],
            "Q": [[1.0, 0.0], [0.0, 1.0]],
            "Rs": [
                [[1.0, 0.0], [0.0, 1.0]],
                [[1.0, 0.0], [0.0, 2.0]],
            ],
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["verdict"] in ("Exact", "NotExact")


def test_unknown_problem_field_rejected(client):
    prob = e1_problem()
    prob["extra"] = 1.0
    resp = client.post("/radius", json={"problem": prob})
    assert resp.status_code == 422
