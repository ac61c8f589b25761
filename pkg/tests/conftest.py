import numpy as np
import pytest

from vgmix import _backend
from vgmix.distributions import VGComponent, VGMixtureModel

BACKENDS = ["python"] + (["cython"] if _backend.compiled_kernels is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel implementation."""
    k = _backend.python_kernels if request.param == "python" else _backend.compiled_kernels
    monkeypatch.setattr(_backend, "kernels", k)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def two_blob_model(gamma=2.0):
    # Means 10 apart, unit-norm skewness in different directions.
    return VGMixtureModel([0.5, 0.5], [
        VGComponent(gamma, [0.0, 0.0], np.eye(2), [1.0, 0.0]),
        VGComponent(gamma, [7.0710678118654755, 7.0710678118654755],
                    np.array([[1.0, 0.3], [0.3, 1.0]]), [0.0, -1.0]),
    ])


@pytest.fixture
def blobs():
    return two_blob_model()


def random_spd(rng, p, jitter=None):
    b = rng.standard_normal((p, p))
    m = b @ b.T + (p if jitter is None else jitter) * np.eye(p)
    return 0.5 * (m + m.T)
