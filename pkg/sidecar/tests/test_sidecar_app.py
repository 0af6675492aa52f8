"""Wire behavior of the FastAPI app (in-process TestClient)."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from embedsim_sidecar.app import create_app
from embedsim_sidecar.config import ModelEntry, SidecarConfig
from embedsim_sidecar.hashing import mock_vectors


def make_client(models=None, max_batch=8):
    if models is None:
        models = [ModelEntry(name="mock", backend="mock", dim=16, seed=3)]
    cfg = SidecarConfig(max_batch=max_batch, models=models)
    return TestClient(create_app(cfg))


class TestEmbeddings:
    def test_two_inputs_two_indexed_embeddings(self):
        client = make_client()
        resp = client.post(
            "/v1/embeddings", json={"model": "mock", "input": ["a", "b"]}
        )
        assert resp.status_code == 200
        data = resp.json()["data"]
        assert [item["index"] for item in data] == [0, 1]
        want = mock_vectors(["a", "b"], dim=16, seed=3)
        got = np.array([item["embedding"] for item in data])
        assert np.array_equal(got, want)

    def test_same_input_twice_identical_vectors(self):
        client = make_client()
        resp = client.post(
            "/v1/embeddings", json={"model": "mock", "input": ["dup", "dup"]}
        )
        d = resp.json()["data"]
        assert d[0]["embedding"] == d[1]["embedding"]

    def test_unknown_model_is_structured_404(self):
        client = make_client()
        resp = client.post(
            "/v1/embeddings", json={"model": "nope", "input": ["a"]}
        )
        assert resp.status_code == 404
        err = resp.json()["error"]
        assert err["type"] == "model_not_found"
        assert "nope" in err["message"]

    def test_oversized_batch_is_413(self):
        client = make_client(max_batch=2)
        resp = client.post(
            "/v1/embeddings", json={"model": "mock", "input": ["a", "b", "c"]}
        )
        assert resp.status_code == 413
        assert resp.json()["error"]["type"] == "batch_too_large"

    def test_inference_failure_is_500(self):
        client = make_client()
        broken = client.app.state.registry["mock"]
        broken.encode = lambda texts: (_ for _ in ()).throw(RuntimeError("gpu on fire"))
        resp = client.post("/v1/embeddings", json={"model": "mock", "input": ["a"]})
        assert resp.status_code == 500
        assert "gpu on fire" in resp.json()["error"]["message"]

    def test_empty_input_rejected(self):
        client = make_client()
        resp = client.post("/v1/embeddings", json={"model": "mock", "input": []})
        assert resp.status_code == 422  # schema validation


class TestHealth:
    def test_lists_models_with_dims(self):
        client = make_client(
            models=[
                ModelEntry(name="mock", backend="mock", dim=16),
                ModelEntry(name="other-mock", backend="mock", dim=24, seed=1),
            ]
        )
        resp = client.get("/health")
        body = resp.json()
        assert body["status"] == "ok"
        assert [(m["name"], m["dim"]) for m in body["models"]] == [
            ("mock", 16), ("other-mock", 24),
        ]

    def test_empty_registry(self):
        client = make_client(models=[])
        body = client.get("/health").json()
        assert body == {"status": "ok", "models": []}

    def test_dim_mismatch_marks_unhealthy(self):
        client = make_client(
            models=[ModelEntry(name="bge-large-en-v1.5", backend="mock", dim=999)]
        )
        body = client.get("/health").json()
        assert body["status"] == "unhealthy"
        (entry,) = body["models"]
        assert entry["dim_mismatch"] is True
        assert entry["published_dim"] == 1024
