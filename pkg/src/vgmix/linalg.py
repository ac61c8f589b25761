"""Dense SPD helpers: Cholesky with pivot diagnostics, Mahalanobis forms."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DimensionMismatch, NotPositiveDefinite

PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class CholFactor:
    """Lower Cholesky factor of a symmetric positive-definite matrix."""

    lower: np.ndarray
    log_det: float

    @property
    def dim(self):
        return self.lower.shape[0]

    def reconstruct(self):
        return self.lower @ self.lower.T

    def inverse(self):
        eye = np.eye(self.dim)
        linv = solve_triangular(self.lower, eye, lower=True)
        return linv.T @ linv


def cholesky(m):
    """Factor ``m = L L'``.

    A pivot below ``1e-12 * max(diag(m))`` is treated as loss of positive
    definiteness and raises :class:`NotPositiveDefinite` with its index.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefinite(0, "matrix has non-finite entries")
    p = m.shape[0]
    tol = PIVOT_RTOL * max(float(np.max(np.diag(m))), 0.0)
    lower = np.zeros_like(m)
    for j in range(p):
        row = lower[j, :j]
        pivot = m[j, j] - row @ row
        if not pivot > tol:
            raise NotPositiveDefinite(j)
        ljj = np.sqrt(pivot)
        lower[j, j] = ljj
        if j + 1 < p:
            lower[j + 1:, j] = (m[j + 1:, j] - lower[j + 1:, :j] @ row) / ljj
    return CholFactor(lower, 2.0 * float(np.sum(np.log(np.diag(lower)))))


def _whiten(v, chol):
    """``L^{-1} v`` by forward substitution, one row of ``v`` at a time.

    Each row's result depends only on that row, so a point gives the same
    bits alone or inside a batch (BLAS triangular solves do not promise this).
    Returns shape ``(p,)`` or ``(p, n)``.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != chol.dim:
        raise DimensionMismatch(f"vector of length {v.shape[-1]} vs matrix of dim {chol.dim}")
    rows = np.atleast_2d(v)
    low = chol.lower
    w = np.empty_like(rows)
    for j in range(chol.dim):
        acc = (w[:, :j] * low[j, :j]).sum(axis=1) if j else 0.0
        w[:, j] = (rows[:, j] - acc) / low[j, j]
    return w[0] if v.ndim == 1 else w.T


def quad_form(v, chol):
    """``v' Sigma^{-1} v``; rows of a 2-d ``v`` are treated independently."""
    w = _whiten(v, chol)
    out = np.einsum("i...,i...->...", w, w)
    return float(out) if np.ndim(out) == 0 else out


def mahalanobis(x, mu, chol):
    """Squared Mahalanobis distance ``(x-mu)' Sigma^{-1} (x-mu)``."""
    x = np.asarray(x, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (chol.dim,):
        raise DimensionMismatch(f"mean of shape {mu.shape} vs matrix of dim {chol.dim}")
    return quad_form(x - mu, chol)


def solve(chol, v):
    """``Sigma^{-1} v`` for a vector ``v``."""
    w = _whiten(v, chol)
    return solve_triangular(chol.lower.T, w, lower=False, check_finite=False)
