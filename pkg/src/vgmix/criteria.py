"""Parameter counting, BIC and the fit result container."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def count_free_params(model):
    """Free parameters of a restricted VG mixture.

    ``(G - 1)`` weights plus, per component, ``mu`` and ``alpha`` (``p`` each),
    the ``p(p+1)/2`` entries of ``Sigma`` and one ``gamma``.
    """
    g, p = model.n_components, model.dim
    return (g - 1) + g * (2 * p + p * (p + 1) // 2 + 1)


def bic(loglik, rho, n):
    """``2 loglik - rho log n`` (larger is better)."""
    if n < 1:
        raise ValueError("bic needs n >= 1")
    return 2.0 * loglik - rho * math.log(n)


def map_labels(responsibilities):
    """Row-wise argmax; ties go to the lowest component index."""
    return np.argmax(responsibilities, axis=1) if len(responsibilities) else np.empty(0, int)


@dataclass
class FitResult:
    model: object
    loglik: float
    trace: list
    bic: float
    labels: np.ndarray
    responsibilities: np.ndarray
    n_iter: int
    converged: bool
    boundary_flags: tuple
    seed_used: int
    best_start: int = 0
    start_errors: list = field(default_factory=list)
    # Filled by fit_cluster: every G tried -> its FitResult, or None if it failed.
    candidates: dict = field(default_factory=dict)
    task: Optional[str] = None

    @property
    def n_components(self):
        return self.model.n_components
