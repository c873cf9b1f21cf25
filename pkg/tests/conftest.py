import numpy as np
import pytest


@pytest.fixture(scope="session")
def blob_data():
    """Two well-separated 2-D blobs: label 1 around the origin, 0 around (8, 8)."""
    rng = np.random.default_rng(42)
    target = rng.normal(0.0, 1.0, (200, 2))
    artificial = rng.normal(8.0, 1.0, (200, 2))
    X = np.vstack([target, artificial])
    y = np.array([1] * 200 + [0] * 200)
    return X, y


@pytest.fixture(scope="session")
def target_features():
    """Gaussian feature rows standing in for projected normal windows."""
    rng = np.random.default_rng(9)
    return rng.normal(0.0, 1.0, (200, 4)) * np.array([3.0, 2.0, 1.0, 0.5]) + 1.0
