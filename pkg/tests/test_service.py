import pytest
from fastapi.testclient import TestClient

from wavebc.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


GRID = {"nx": 128, "t_final": 5.0, "dt_ratio": 0.1}


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert "version" in body


def test_control_check_endpoint(client):
    r = client.post("/checks/control", json={**GRID, "n_modes": 2})
    assert r.status_code == 200
    body = r.json()
    assert body["name"] == "control"
    assert len(body["items"]) == 4
    assert body["passed"] is True
    item = body["items"][0]
    assert set(item) == {"name", "value", "lower", "upper", "passed"}


def test_frechet_check_endpoint(client):
    r = client.post("/checks/frechet", json=GRID)
    assert r.status_code == 200
    body = r.json()
    assert body["items"][0]["name"] == "remainder-ratio"
    assert body["items"][0]["value"] > 0.0
    assert {"name", "passed", "items"} <= set(body)


def test_experiment_endpoint(client):
    payload = {**GRID, "experiment_id": 1, "n_modes": 1,
               "noise_levels": [0.0], "seed": 0, "n_seeds": 1}
    r = client.post("/experiments/run", json=payload)
    assert r.status_code == 200
    body = r.json()
    assert body["experiment_id"] == 1
    assert len(body["x"]) == GRID["nx"] + 1
    assert len(body["levels"]) == 1
    level = body["levels"][0]
    assert len(level["recon"]) == GRID["nx"] + 1
    assert level["coefficients"]["n_modes"] == 1
    assert body["provenance"]["nx"] == GRID["nx"]


def test_reconstruct_endpoint(client):
    payload = {**GRID, "truth_id": 1, "n_modes": 1, "noise_level": 0.0, "seed": 0}
    r = client.post("/reconstruct", json=payload)
    assert r.status_code == 200
    body = r.json()
    assert len(body["levels"]) == 1
    assert body["levels"][0]["level"] == 0.0


def test_bad_experiment_id_rejected(client):
    r = client.post("/experiments/run", json={**GRID, "experiment_id": 9})
    assert r.status_code == 422
