import gzip

import pytest
from fastapi.testclient import TestClient

from conftest import small_experiment
from sdcabench.api.deps import get_output_root
from sdcabench.main import app
from sdcabench.services.experiment import TUNING_GRID


@pytest.fixture
def client(tmp_path):
    app.dependency_overrides[get_output_root] = lambda: tmp_path
    with TestClient(app) as c:
        yield c
    app.dependency_overrides.clear()


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json() == {"message": "Welcome to the SDCA Benchmark API"}


def test_presets(client):
    response = client.get("/api/v1/experiments/presets")
    assert response.status_code == 200
    listing = {p["name"]: p["needs_dataset"] for p in response.json()}
    assert listing["lasso-desk"] is False
    assert listing["rcv1-logistic"] is True
    assert client.get("/api/v1/experiments/presets/lasso-desk").json()["name"] == "lasso-desk"
    assert client.get("/api/v1/experiments/presets/missing").status_code == 404


def test_run_then_read_manifest_and_plot(client, tmp_path):
    response = client.post("/api/v1/experiments/run", json=small_experiment())
    assert response.status_code == 200
    body = response.json()
    run_id = body["run_id"]
    assert run_id.startswith("small-")
    assert len(body["manifest"]["runs"]) == 4
    assert (tmp_path / run_id / "manifest.json").exists()

    manifest = client.get(f"/api/v1/experiments/{run_id}/manifest")
    assert manifest.status_code == 200
    assert manifest.json()["config"]["name"] == "small"

    plot = client.get(f"/api/v1/experiments/{run_id}/plot")
    assert plot.status_code == 200
    assert plot.headers["content-type"].startswith("image/svg+xml")
    assert b"trace-sdca" in plot.content


def test_unknown_run_is_404(client):
    assert client.get("/api/v1/experiments/nothing-here/manifest").status_code == 404
    assert client.get("/api/v1/experiments/nothing-here/plot").status_code == 404


def test_invalid_config_is_422(client):
    raw = small_experiment()
    raw["solvers"] = []
    assert client.post("/api/v1/experiments/run", json=raw).status_code == 422


def test_tune(client):
    response = client.post("/api/v1/experiments/tune", json={"config": small_experiment(), "solver": "prox_gd"})
    assert response.status_code == 200
    assert response.json()["step"] in TUNING_GRID
    rejected = client.post("/api/v1/experiments/tune", json={"config": small_experiment(), "solver": "rda"})
    assert rejected.status_code == 400


def test_upload_dataset(client):
    files = {"file": ("tiny.libsvm", b"1 1:2 3:1\n-1 2:1\n", "text/plain")}
    response = client.post("/api/v1/datasets/upload", files=files, data={"n_features": "5"})
    assert response.status_code == 200
    summary = response.json()
    assert (summary["n"], summary["p"], summary["nnz"]) == (2, 5, 3)
    assert summary["sparse"] is True


def test_upload_gzip_dataset(client):
    files = {"file": ("tiny.libsvm.gz", gzip.compress(b"0.5 2:1\n"), "application/gzip")}
    response = client.post("/api/v1/datasets/upload", files=files)
    assert response.status_code == 200
    assert response.json()["p"] == 2


def test_upload_malformed_dataset(client):
    files = {"file": ("bad.libsvm", b"1 1:2\n1 3:1 2:1\n", "text/plain")}
    response = client.post("/api/v1/datasets/upload", files=files)
    assert response.status_code == 400
    assert "line 2" in response.json()["detail"]


def test_generate_dataset(client):
    spec = {"family": "lasso", "n": 12, "p": 4, "s": 2, "seed": 1}
    summary = client.post("/api/v1/datasets/generate", json=spec)
    assert summary.status_code == 200
    assert summary.json()["n"] == 12 and summary.json()["sparse"] is False

    download = client.post("/api/v1/datasets/generate?download=true", json=spec)
    assert download.status_code == 200
    assert "attachment" in download.headers["content-disposition"]
    assert len(download.text.splitlines()) == 12

    bad = client.post("/api/v1/datasets/generate", json={**spec, "s": 9})
    assert bad.status_code == 422
