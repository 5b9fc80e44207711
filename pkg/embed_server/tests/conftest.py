import pytest
from fastapi.testclient import TestClient

from embed_server import StubEncoder, create_app
from embed_server.app import EncoderHolder


@pytest.fixture
def holder():
    return EncoderHolder()


@pytest.fixture
def loading_client(holder):
    """Service whose encoder has not finished loading."""
    return TestClient(create_app(holder))


@pytest.fixture
def client(holder):
    """Service with the deterministic stub encoder ready."""
    holder.set(StubEncoder())
    return TestClient(create_app(holder))
