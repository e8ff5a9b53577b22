"""
Fixtures compartidas de las pruebas
"""
import os

# Antes de importar mtkit: sin archivo de logs ni rate limiting
os.environ["MTKIT_TESTING"] = "true"

import numpy as np  # noqa: E402
import pytest  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "results"
    path.mkdir()
    return str(path)


@pytest.fixture
def client():
    from fastapi.testclient import TestClient
    from mtkit.main import app

    with TestClient(app) as test_client:
        yield test_client
