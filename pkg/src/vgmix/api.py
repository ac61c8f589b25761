"""Fitting, prediction, model selection and model documents.

Three paradigms share one EM engine:

* clustering (:func:`fit_cluster`): no labels, ``G`` chosen by BIC;
* classification (:func:`fit_classify`): some rows labeled, the rest
  classified, with optionally more components than known classes;
* discriminant analysis (:func:`fit_discriminant`): a model fitted on
  labeled rows only, then applied to new data with :func:`predict`.

Labels use ``-1`` for "unknown" and ``0 .. G-1`` for classes.
"""

from __future__ import annotations

import json
import math

import jsonschema
import numpy as np

from .criteria import FitResult, bic, count_free_params, map_labels
from .distributions import VGComponent, VGMixtureModel
from .em import EMConfig, check_labels, e_step, fit_em
from .exceptions import (AllStartsFailed, DimensionMismatch, InvalidLabels, ModelFormatError,
                         TooFewObservations, VGMixError)

__all__ = [
    "fit_cluster", "fit_classify", "fit_discriminant", "predict",
    "count_free_params", "bic", "save_model", "load_model", "FORMAT_VERSION",
]

FORMAT_VERSION = 1


def _as_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch(f"data must be an (n, p) array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contain non-finite values")
    return x


def fit_cluster(data, g_min: int = 1, g_max: int = 4, cfg: EMConfig | None = None) -> FitResult:
    """Fit ``G = g_min .. g_max`` components and keep the largest BIC.

    Every fitted ``G`` is kept in ``result.candidates`` (``None`` where all
    starts failed). Equal BIC values go to the smaller ``G``.

    Raises
    ------
    TooFewObservations
        If ``n < g_max (p + 1)``.
    AllStartsFailed
        Only if every ``G`` in the range failed.
    """
    cfg = cfg or EMConfig()
    x = _as_data(data)
    n, p = x.shape
    if not 1 <= g_min <= g_max:
        raise ValueError(f"need 1 <= g_min <= g_max, got {g_min}, {g_max}")
    if n < g_max * (p + 1):
        raise TooFewObservations(f"n={n} rows cannot support {g_max} components in p={p}")
    candidates = {}
    errors = []
    best = None
    for g in range(g_min, g_max + 1):
        try:
            res = fit_em(x, g, cfg=cfg)
        except AllStartsFailed as exc:
            candidates[g] = None
            errors.extend(exc.errors)
            continue
        res.task = "cluster"
        candidates[g] = res
        if best is None or res.bic > best.bic:
            best = res
    if best is None:
        raise AllStartsFailed(errors)
    best.candidates = candidates
    return best


def fit_classify(data, labels, G: int, H: int | None = None,
                 cfg: EMConfig | None = None) -> FitResult:
    """Semi-supervised fit: labeled rows are held at their class.

    ``labels`` holds ``0 .. G-1`` for known rows and ``-1`` elsewhere;
    labeled rows may appear anywhere. ``H >= G`` components are fitted, the
    first ``G`` tied to the known classes and the rest free to absorb groups
    without labels. With no labeled rows and ``H == G`` this is
    :func:`fit_cluster` at fixed ``G``.
    """
    cfg = cfg or EMConfig()
    x = _as_data(data)
    H = G if H is None else H
    if G < 1 or H < G:
        raise InvalidLabels(f"need 1 <= G <= H, got G={G}, H={H}")
    lab = check_labels(labels, x.shape[0], G)
    res = fit_em(x, G, fixed_labels=lab, H=H, cfg=cfg)
    res.task = "classify"
    return res


def _discriminant(train_data, train_labels, cfg):
    x = _as_data(train_data)
    n, p = x.shape
    lab = np.asarray(train_labels)
    if lab.shape != (n,) or not np.issubdtype(lab.dtype, np.integer):
        raise InvalidLabels(f"expected {n} integer labels")
    if n == 0 or np.any(lab < 0):
        raise InvalidLabels("discriminant analysis needs every training row labeled")
    G = int(lab.max()) + 1
    counts = np.bincount(lab, minlength=G)
    for g, m in enumerate(counts):
        if m < p + 1:
            raise TooFewObservations(f"class {g} has {m} rows; need at least p + 1 = {p + 1}")
    # The product likelihood separates by class: one single-component fit per class.
    fits = [fit_em(x[lab == g], 1, fixed_labels=np.zeros(counts[g], np.intp), cfg=cfg)
            for g in range(G)]
    model = VGMixtureModel(counts / n, [f.model.components[0] for f in fits])
    lat = e_step(x, model, lab, cfg)
    ll = lat.loglik
    return FitResult(
        model=model, loglik=ll, trace=[ll], bic=bic(ll, count_free_params(model), n),
        labels=lab.astype(np.intp), responsibilities=lat.zhat,
        n_iter=max(f.n_iter for f in fits), converged=all(f.converged for f in fits),
        boundary_flags=tuple(f.boundary_flags[0] for f in fits), seed_used=cfg.seed,
        task="discriminant",
    )


def fit_discriminant(train_data, train_labels, cfg: EMConfig | None = None) -> VGMixtureModel:
    """One VG component per class, fitted on labeled rows only.

    Weights are the class fractions. Classes are ``0 .. max(label)``; each
    must have at least ``p + 1`` rows.
    """
    return _discriminant(train_data, train_labels, cfg or EMConfig()).model


def predict(model: VGMixtureModel, new_data, cfg: EMConfig | None = None):
    """Responsibilities and MAP labels for new rows.

    Uses the same density evaluation as the E-step, so on training data the
    result matches the fitted responsibilities of unlabeled rows.
    """
    x = np.asarray(new_data, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise DimensionMismatch(f"data of shape {x.shape} for a model of dimension {model.dim}")
    if x.shape[0] == 0:
        return np.empty((0, model.n_components)), np.empty(0, np.intp)
    zhat = e_step(x, model, None, cfg).zhat
    return zhat, map_labels(zhat)


_NUMBER = {"type": "number"}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 1}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["format_version", "dim", "weights", "components"],
    "additionalProperties": False,
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "dim": {"type": "integer", "minimum": 1},
        "weights": _VECTOR,
        "components": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["gamma", "mu", "sigma", "alpha"],
                "additionalProperties": False,
                "properties": {
                    "gamma": {"type": "number", "exclusiveMinimum": 0},
                    "mu": _VECTOR,
                    "sigma": {"type": "array", "items": _VECTOR, "minItems": 1},
                    "alpha": _VECTOR,
                },
            },
        },
    },
}


def _path(parts) -> str:
    out = "$"
    for part in parts:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def save_model(model: VGMixtureModel) -> str:
    """JSON document for ``model``; floats use the shortest exact decimal form."""
    doc = {
        "format_version": FORMAT_VERSION,
        "dim": model.dim,
        "weights": [float(w) for w in model.weights],
        "components": [
            {
                "gamma": float(c.gamma),
                "mu": [float(v) for v in c.mu],
                "sigma": [[float(v) for v in row] for row in c.sigma],
                "alpha": [float(v) for v in c.alpha],
            }
            for c in model.components
        ],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _reject_constant(name):
    raise ModelFormatError(f"non-finite number {name} in model document")


def load_model(document) -> VGMixtureModel:
    """Parse and validate a model document (a JSON string or an already-parsed dict).

    Raises
    ------
    ModelFormatError
        On malformed JSON, a schema violation (the message names the field
        path) or a violated model invariant such as weights not summing to 1.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"model document is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(document, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ModelFormatError(f"{_path(exc.absolute_path)}: {exc.message}") from exc
    p = document["dim"]
    comps = []
    for k, c in enumerate(document["components"]):
        where = f"$.components[{k}]"
        sigma = np.array(c["sigma"], dtype=np.float64) if c["sigma"] else None
        if len(c["mu"]) != p or len(c["alpha"]) != p or sigma is None or sigma.shape != (p, p):
            raise ModelFormatError(f"{where}: parameter dimensions do not match dim={p}")
        try:
            comps.append(VGComponent(c["gamma"], c["mu"], sigma, c["alpha"]))
        except (VGMixError, ValueError) as exc:
            raise ModelFormatError(f"{where}: {exc}") from exc
    if len(document["weights"]) != len(comps):
        raise ModelFormatError("$.weights: need one weight per component")
    if not all(math.isfinite(w) for w in document["weights"]):
        raise ModelFormatError("$.weights: non-finite weight")
    try:
        return VGMixtureModel(document["weights"], comps)
    except (VGMixError, ValueError) as exc:
        raise ModelFormatError(f"$.weights: {exc}") from exc
