"""HTTP surface: routes, response shapes, and the error contract."""

import asyncio

import httpx
import pytest

import andlab
from andlab.service import create_app


def call(method: str, url: str, json_body=None) -> httpx.Response:
    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://testserver", timeout=None
        ) as client:
            if method == "GET":
                return await client.get(url)
            return await client.post(url, json=json_body)

    return asyncio.run(go())


class TestMetaRoutes:
    def test_health(self):
        response = call("GET", "/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_version(self):
        response = call("GET", "/version")
        assert response.status_code == 200
        body = response.json()
        assert body["tool"] == "andlab"
        assert body["version"] == andlab.__version__


class TestExperimentRoutes:
    def test_sample_field_defaults(self):
        response = call("POST", "/experiments/sample-field", {})
        assert response.status_code == 200
        body = response.json()
        assert body["name"] == "sample-field"
        assert body["columns"][-1] == "value"
        assert len(body["rows"]) > 0
        summary = body["summary"]
        assert summary["experiment"] == "sample-field"
        assert summary["tool"] == "andlab"
        assert "workers" not in summary["config"]
        assert "directory" not in summary["config"]["output"]

    def test_spectrum_rows(self):
        response = call("POST", "/experiments/spectrum", {"experiments": {"spectrum": {"k": 3}}})
        assert response.status_code == 200
        body = response.json()
        assert body["columns"] == ["index", "eigenvalue"]
        assert [row[0] for row in body["rows"]] == [0, 1, 2]
        eigenvalues = [row[1] for row in body["rows"]]
        assert eigenvalues == sorted(eigenvalues)

    def test_config_honored(self):
        response = call("POST", "/experiments/sample-field", {"mc": {"master_seed": 5}})
        assert response.status_code == 200
        assert response.json()["summary"]["master_seed"] == 5


class TestErrorContract:
    def test_unknown_experiment_is_configuration(self):
        response = call("POST", "/experiments/does-not-exist", {})
        assert response.status_code == 422
        body = response.json()
        assert body["error"] == "configuration"
        assert "does-not-exist" in body["message"]

    def test_malformed_body_is_configuration(self):
        response = call("POST", "/experiments/sample-field", {"model": {"N": "many"}})
        assert response.status_code == 422
        body = response.json()
        assert body["error"] == "configuration"
        assert set(body) == {"error", "message"}

    def test_extra_key_is_configuration(self):
        response = call("POST", "/experiments/sample-field", {"unknown_section": 1})
        assert response.status_code == 422
        assert response.json()["error"] == "configuration"

    def test_domain_error(self):
        response = call("POST", "/experiments/mc-edge", {"mc": {"trials": 50}})
        assert response.status_code == 422
        body = response.json()
        assert body["error"] == "domain"
        assert "trials" in body["message"]

    def test_resource_error(self):
        response = call(
            "POST",
            "/experiments/dynamics",
            {"scales": {"l0": 2100}, "experiments": {"dynamics": {"include_free_control": False}}},
        )
        assert response.status_code == 413
        body = response.json()
        assert body["error"] == "resource"
