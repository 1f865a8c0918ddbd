import pytest
from fastapi.testclient import TestClient

from app.config import Settings
from app.main import create_app


@pytest.fixture
def settings(tmp_path):
    return Settings(data_dir=tmp_path / "data")


@pytest.fixture
def client(settings):
    """Service over a fresh data dir, torn down after the test"""
    with TestClient(create_app(settings)) as test_client:
        yield test_client


@pytest.fixture
def channel(client):
    response = client.post(
        "/channels",
        json={
            "name": "Fish Farm Monitoring System",
            "field_labels": ["Turbidity", "Temperature", "PH", "Depth"],
        },
    )
    assert response.status_code == 200
    return response.json()
