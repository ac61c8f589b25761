"""Finite mixtures of variance-gamma distributions.

Model-based clustering, semi-supervised classification and discriminant
analysis with skewed, heavy-tailed components, fitted by EM and compared
by BIC.
"""

from ._backend import NAME as BACKEND
from .api import (bic, count_free_params, fit_classify, fit_cluster, fit_discriminant,
                  load_model, predict, save_model)
from .criteria import FitResult
from .distributions import VGComponent, VGMixtureModel
from .em import EMConfig, fit_em
from .exceptions import (AllStartsFailed, DegenerateComponent, DimensionMismatch, DomainError,
                         InvalidLabels, ModelFormatError, NotPositiveDefinite, TooFewObservations,
                         VGMixError)
from .simulate import make_rng, sample_mixture

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "EMConfig", "FitResult", "VGComponent", "VGMixtureModel",
    "fit_cluster", "fit_classify", "fit_discriminant", "fit_em", "predict",
    "count_free_params", "bic", "save_model", "load_model", "make_rng", "sample_mixture",
    "VGMixError", "DomainError", "NotPositiveDefinite", "DimensionMismatch",
    "DegenerateComponent", "TooFewObservations", "AllStartsFailed", "InvalidLabels",
    "ModelFormatError",
]
