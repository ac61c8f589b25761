"""Seeded sampling from the gamma, Gaussian, VG and VG-mixture laws.

Every sampler takes an explicit ``numpy.random.Generator``; use
:func:`make_rng` to build one from an integer seed (PCG64). Independent
streams for parallel work come from ``make_rng(seed, stream=k)``.
"""

import numpy as np

from .exceptions import DomainError


def make_rng(seed, stream=None):
    if stream is None:
        return np.random.default_rng(np.random.SeedSequence(seed))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


def sample_gamma(shape, rate, rng, size=None):
    """Gamma draws in the shape-rate parameterization (mean ``shape/rate``)."""
    if not (shape > 0 and rate > 0):
        raise DomainError(f"gamma sampler needs shape > 0 and rate > 0, got {shape}, {rate}")
    # numpy uses Marsaglia-Tsang squeeze/rejection with the U**(1/shape) boost below 1.
    return rng.standard_gamma(shape, size=size) / rate


def sample_mvn(mu, chol, rng, size=None):
    """``mu + L z`` with ``z`` standard normal; ``size`` rows when given."""
    mu = np.asarray(mu, dtype=np.float64)
    shape = (chol.dim,) if size is None else (size, chol.dim)
    z = rng.standard_normal(shape)
    return mu + z @ chol.lower.T


def sample_vg(comp, rng, size=None):
    """Draw ``(x, y)`` with ``y ~ gamma(gamma, gamma)`` and ``x = mu + y alpha + sqrt(y) u``."""
    y = sample_gamma(comp.gamma, comp.gamma, rng, size)
    u = sample_mvn(np.zeros(comp.dim), comp.chol, rng, size)
    y_col = y if size is None else y[:, None]
    return comp.mu + y_col * comp.alpha + np.sqrt(y_col) * u, y


def sample_mixture(model, n, rng):
    """``n`` rows from a VG mixture plus their generating component indices."""
    if n < 0:
        raise DomainError("n must be non-negative")
    labels = rng.choice(model.n_components, size=n, p=model.weights)
    data = np.empty((n, model.dim))
    for g, comp in enumerate(model.components):
        rows = np.flatnonzero(labels == g)
        if len(rows):
            data[rows] = sample_vg(comp, rng, size=len(rows))[0]
    return data, labels
