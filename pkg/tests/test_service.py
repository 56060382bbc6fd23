import math

import pytest
from fastapi.testclient import TestClient

from convchain.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_count_exact_endpoint(client):
    resp = client.post("/count/exact", json={"n1": 2, "n2": 2})
    assert resp.status_code == 200
    body = resp.json()
    assert body["counts"] == {"1": "1", "2": "3", "3": "1"}
    assert body["total"] == "5"
    assert body["max_vertices"] == 3


def test_count_exact_budget_maps_to_413(client):
    resp = client.post("/count/exact", json={"n1": 50, "n2": 50})
    assert resp.status_code == 413
    assert resp.json()["error"]["kind"] == "budget"


def test_constants_single_and_sweep(client):
    resp = client.post("/constants", json={"lam": 1.0})
    row = resp.json()["rows"][0]
    assert row["c"] == pytest.approx(0.74931969975106014, rel=1e-12)
    assert row["e"] == pytest.approx(2.7021747532777091, rel=1e-12)
    resp = client.post(
        "/constants",
        json={"sweep": {"start": 0.1, "stop": 10.0, "points": 5}},
    )
    rows = resp.json()["rows"]
    assert len(rows) == 5
    assert rows[0]["lam"] == pytest.approx(0.1)
    # domain error when both or neither given
    assert client.post("/constants", json={}).status_code == 422


def test_moments_and_calibrate(client):
    resp = client.post(
        "/calibrate", json={"kind": "endpoint", "n": 50, "lam": 1.0}
    )
    body = resp.json()
    assert body["moments"]["expected_endpoint"][0] == pytest.approx(50.0, rel=1e-8)
    params = body["params"]
    resp = client.post("/moments", json={"params": params})
    assert resp.json()["expected_endpoint"][0] == pytest.approx(50.0, rel=1e-8)
    assert resp.json()["support_size"] > 0


def test_invalid_params_rejected(client):
    resp = client.post(
        "/moments",
        json={"params": {"kind": "endpoint", "z1": 1.5}},
    )
    assert resp.status_code in (400, 422)


def test_sample_unconditioned_and_conditioned(client):
    payload = {
        "params": {"kind": "endpoint", "z1": 0.3, "lam": 1.0},
        "seed": 1,
        "count": 3,
    }
    body = client.post("/sample", json=payload).json()
    assert len(body["samples"]) == 3
    for item in body["samples"]:
        assert item["chain"][0] == [0, 0]
    payload["constraint"] = {"endpoint": [2, 2]}
    body = client.post("/sample", json=payload).json()
    for item in body["samples"]:
        assert item["endpoint"] == [2, 2]
        assert item["offsets"]["endpoint"] == [0, 0]


def test_count_estimate_endpoint(client):
    payload = {
        "n1": 2, "n2": 2, "vertices": 2,
        "params": {"kind": "endpoint", "z1": 0.3, "lam": 1.0},
        "replicas": 20_000, "seed": 4,
    }
    body = client.post("/count/estimate", json=payload).json()
    assert abs(body["estimate"] - 3.0) <= 4 * body["standard_error"]


def test_shape_endpoints(client):
    body = client.post("/shape", json={"kind": "parabola", "points": 101}).json()
    assert body["nominal_length"] == pytest.approx(1.6232252401402305, rel=1e-12)
    assert body["points"][0] == [0.0, 0.0]
    assert body["points"][-1] == pytest.approx([1.0, 1.0], abs=1e-12)
    body = client.post("/shape", json={"kind": "family", "L": 1.7, "points": 501}).json()
    assert body["kind"] == "family_alpha"
    assert body["arc_length"] == pytest.approx(1.7, abs=1e-4)
    assert client.post("/shape", json={"kind": "family"}).status_code == 422


def test_jarnik_endpoint(client):
    body = client.post("/jarnik", json={"lam": 1.0}).json()
    assert body["c_j"] == pytest.approx(0.5487237767227195, rel=1e-10)
    assert body["e_j"] == pytest.approx(1.9787916112120467, rel=1e-10)
    assert body["max_vertices_constant_j"] == pytest.approx(1.0241760948829435, rel=1e-10)


def test_random_model_endpoint(client):
    body = client.post(
        "/random-model", json={"k": 1, "trials": 20_000, "seed": 0}
    ).json()
    assert body["exact"] == pytest.approx(0.5)
    assert abs(body["estimate"] - 0.5) <= 4 * body["standard_error"]


def test_dbound_endpoint(client):
    body = client.post("/dbound", json={}).json()
    assert 2.60 <= body["d"] <= 2.70


def test_angular_endpoint(client):
    body = client.post(
        "/angular-masses",
        json={
            "params": {"kind": "endpoint", "z1": 0.6, "lam": 1.0},
            "sector_edges": [0.0, math.pi / 4, math.pi / 2],
        },
    ).json()
    assert body["masses"][0] == pytest.approx(body["masses"][1], abs=1e-9)
