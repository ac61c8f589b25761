"""EM estimation for mixtures of restricted variance-gamma distributions.

Labels follow the semi-supervised convention of ``-1`` for an unlabeled row
and ``0 .. G-1`` for a known class. Labeled rows keep one-hot
responsibilities; every row contributes latent expectations of its scale
variable ``Y`` under each component.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import digamma, logsumexp

from .criteria import FitResult, bic, count_free_params, map_labels
from .distributions import VGComponent, VGMixtureModel, vg_terms
from .exceptions import (AllStartsFailed, DegenerateComponent, InvalidLabels,
                         NotPositiveDefinite, TooFewObservations)

log = logging.getLogger(__name__)

RANDOM_PARTITION = "random-partition"
DISTANCE_PARTITION = "distance-based-partition"
RIDGE = 1e-8
# Smallest accepted eigenvalue ratio of an updated Sigma. Components collapsing
# onto a lower-dimensional set drive the likelihood up without bound; such a
# run is abandoned rather than allowed to win on a spurious spike.
COND_FLOOR = 1e-10


@dataclass(frozen=True)
class EMConfig:
    max_iter: int = 1000
    aitken_eps: float = 1e-8
    delta_floor: float = 1e-10
    gamma_bounds: tuple = (1e-4, 1e4)
    n_starts: int = 5
    seed: int = 0
    init: str = DISTANCE_PARTITION

    def __post_init__(self):
        lo, hi = self.gamma_bounds
        if not 0 < lo < hi:
            raise ValueError("gamma_bounds must satisfy 0 < lo < hi")
        if self.max_iter < 1 or self.n_starts < 1:
            raise ValueError("max_iter and n_starts must be positive")
        if not (self.aitken_eps > 0 and self.delta_floor > 0):
            raise ValueError("tolerances must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.init not in (RANDOM_PARTITION, DISTANCE_PARTITION):
            raise ValueError(f"unknown init strategy {self.init!r}")


@dataclass
class LatentExpectations:
    """E-step output; all arrays are ``(n, G)``.

    ``a``, ``b`` and ``c`` are ``E[Y]``, ``E[1/Y]`` and ``E[log Y]`` under
    each component's posterior for ``Y``; ``loglik`` is the observed-data
    log-likelihood of the model the expectations were computed under.
    """

    zhat: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    loglik: float
    log_weighted: np.ndarray


def check_labels(labels, n, n_classes):
    if labels is None:
        return None
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise InvalidLabels(f"expected {n} labels, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidLabels("labels must be integers (-1 for unlabeled)")
    bad = (labels < -1) | (labels >= n_classes)
    if np.any(bad):
        raise InvalidLabels(f"label {labels[bad][0]} out of range for {n_classes} classes")
    return labels.astype(np.intp)


def responsibilities(log_weighted, fixed_labels=None):
    """Normalize ``log pi_g + log v*`` rows; labeled rows become one-hot."""
    lse = logsumexp(log_weighted, axis=1, keepdims=True)
    zhat = np.exp(log_weighted - lse)
    if fixed_labels is not None:
        known = fixed_labels >= 0
        zhat[known] = 0.0
        zhat[known, fixed_labels[known]] = 1.0
    return zhat, lse[:, 0]


def e_step(data, model, fixed_labels=None, cfg=None):
    cfg = cfg or EMConfig()
    x = np.asarray(data, dtype=np.float64)
    n = x.shape[0]
    g = model.n_components
    log_weighted = np.empty((n, g))
    a = np.empty((n, g))
    b = np.empty((n, g))
    c = np.empty((n, g))
    for j, comp in enumerate(model.components):
        dens, a[:, j], b[:, j], c[:, j] = vg_terms(x, comp, cfg.delta_floor)
        log_weighted[:, j] = math.log(model.weights[j]) + dens
    zhat, lse = responsibilities(log_weighted, fixed_labels)
    row_ll = lse
    if fixed_labels is not None:
        known = fixed_labels >= 0
        row_ll = lse.copy()
        row_ll[known] = log_weighted[known, fixed_labels[known]]
    return LatentExpectations(zhat, a, b, c, float(np.sum(row_ll)), log_weighted)


def solve_gamma(mean_a, mean_c, prev_gamma, cfg=None):
    """Root of ``digamma(g) - log(g) = mean_c - mean_a + 1`` within ``cfg.gamma_bounds``.

    The left side increases from -inf to 0, so the root is unique and a
    bracketing solver in log ``g`` is safe. If the root lies outside the
    bounds the nearer bound is returned; :func:`gamma_at_bound` reports that
    case. ``prev_gamma`` is returned unchanged when the right-hand side is
    not finite.
    """
    cfg = cfg or EMConfig()
    rhs = mean_c - mean_a + 1.0
    if not math.isfinite(rhs):
        return float(prev_gamma)
    lo, hi = (float(v) for v in cfg.gamma_bounds)

    def f(g):
        return digamma(g) - math.log(g) - rhs

    if f(hi) < 0.0:
        return hi
    if f(lo) > 0.0:
        return lo
    # Brent on log(g); the bracket is valid since f(lo) <= 0 <= f(hi).
    t = brentq(lambda u: f(math.exp(u)), math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-15)
    return math.exp(t)


def gamma_at_bound(gamma, cfg=None):
    cfg = cfg or EMConfig()
    return gamma <= cfg.gamma_bounds[0] or gamma >= cfg.gamma_bounds[1]


def _component(gamma, mu, sigma, alpha, index, noise=0.0):
    # ``noise``: variance attributable to rounding alone at the data's magnitude.
    if not np.trace(sigma) > noise:
        raise DegenerateComponent(index, "covariance vanished")
    try:
        comp = VGComponent(gamma, mu, sigma, alpha)
    except NotPositiveDefinite:
        p = sigma.shape[0]
        ridge = RIDGE * max(np.trace(sigma) / p, np.finfo(float).tiny)
        try:
            comp = VGComponent(gamma, mu, sigma + ridge * np.eye(p), alpha)
        except NotPositiveDefinite as exc:
            raise DegenerateComponent(index, "covariance not positive definite") from exc
    ev = np.linalg.eigvalsh(comp.sigma)
    if ev[0] < COND_FLOOR * ev[-1]:
        raise DegenerateComponent(index, f"covariance nearly singular (eigenvalue ratio {ev[0] / ev[-1]:.2e})")
    return comp


def m_step(data, lat, prev, cfg=None):
    """Maximize the expected complete-data log-likelihood given ``lat``."""
    return _m_step(data, lat, prev, cfg)[0]


def _m_step(data, lat, prev, cfg=None):
    cfg = cfg or EMConfig()
    x = np.asarray(data, dtype=np.float64)
    n, p = x.shape
    n_g = lat.zhat.sum(axis=0)
    noise = p * (1e3 * np.finfo(float).eps * float(np.max(np.abs(x), initial=0.0))) ** 2
    comps = []
    flags = []
    for g in range(prev.n_components):
        z = lat.zhat[:, g]
        if n_g[g] < p + 1:
            raise DegenerateComponent(g, f"effective size {n_g[g]:.3g} < p + 1")
        a, b, c = lat.a[:, g], lat.b[:, g], lat.c[:, g]
        a_bar = z @ a / n_g[g]
        b_bar = z @ b / n_g[g]
        w = z * (a_bar * b - 1.0)
        denom = w.sum()
        if not denom > 1e-12 * n_g[g]:
            raise DegenerateComponent(g, "no spread in the latent scale")
        mu = w @ x / denom
        alpha = (z * (b_bar - b)) @ x / denom
        x_bar = z @ x / n_g[g]
        r = x - mu
        d = x_bar - mu
        sigma = ((r * (z * b)[:, None]).T @ r / n_g[g]
                 - np.outer(alpha, d) - np.outer(d, alpha) + a_bar * np.outer(alpha, alpha))
        sigma = 0.5 * (sigma + sigma.T)
        gamma = solve_gamma(a_bar, z @ c / n_g[g], prev.components[g].gamma, cfg)
        flags.append(gamma_at_bound(gamma, cfg))
        comps.append(_component(gamma, mu, sigma, alpha, g, noise))
    weights = n_g / n_g.sum()
    return VGMixtureModel(weights, comps), tuple(flags)


def aitken_estimate(trace):
    """``(a, l_inf)`` from the last three log-likelihoods.

    ``a = (l2 - l1) / (l1 - l0)`` is the estimated contraction rate and
    ``l_inf = l1 + (l2 - l1) / (1 - a)`` the extrapolated limit. Returns
    ``(nan, nan)`` when the rate is undefined (a flat step) and ``l_inf`` is
    ``nan`` when ``a == 1``.
    """
    l0, l1, l2 = (float(v) for v in trace[-3:])
    step_prev = l1 - l0
    if step_prev == 0.0:
        return math.nan, math.nan
    acc = (l2 - l1) / step_prev
    if acc == 1.0:
        return acc, math.nan
    return acc, l1 + (l2 - l1) / (1.0 - acc)


def aitken_converged(trace, eps):
    """Aitken-accelerated stopping rule on the last three log-likelihoods.

    Converged iff ``0 <= l_inf - l_latest < eps``; a negative gap means the
    sequence is not yet in its geometric regime. A flat trace counts as
    converged.
    """
    if len(trace) < 3:
        return False
    acc, l_inf = aitken_estimate(trace)
    if math.isnan(acc):
        return trace[-1] == trace[-2]
    if math.isnan(l_inf):
        return False
    gap = l_inf - trace[-1]
    return 0.0 <= gap < eps


def _kmeanspp(x, centers, rng):
    """Fill the NaN rows of ``centers`` by k-means++ seeding over ``x``."""
    centers = centers.copy()
    for k in range(len(centers)):
        if not np.isnan(centers[k, 0]):
            continue
        have = centers[~np.isnan(centers[:, 0])]
        if len(have) == 0:
            centers[k] = x[rng.integers(len(x))]
            continue
        d2 = np.min(((x[:, None, :] - have[None, :, :]) ** 2).sum(axis=2), axis=1)
        total = d2.sum()
        idx = rng.choice(len(x), p=d2 / total) if total > 0 else rng.integers(len(x))
        centers[k] = x[idx]
    return centers


def _partition(x, g, cfg, rng, labels):
    n = len(x)
    known = labels >= 0 if labels is not None else np.zeros(n, bool)
    free = np.flatnonzero(~known)
    assign = np.full(n, -1)
    if labels is not None:
        assign[known] = labels[known]
    if cfg.init == RANDOM_PARTITION:
        perm = rng.permutation(free)
        assign[perm] = np.arange(len(perm)) % g
        return assign
    centers = np.full((g, x.shape[1]), np.nan)
    for k in range(g):
        if np.any(assign == k):
            centers[k] = x[assign == k].mean(axis=0)
    centers = _kmeanspp(x[free] if len(free) else x, centers, rng)
    for _ in range(100):
        d2 = ((x[free, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = np.argmin(d2, axis=1)
        if np.array_equal(new, assign[free]):
            break
        assign[free] = new
        for k in range(g):
            members = assign == k
            if members.any():
                centers[k] = x[members].mean(axis=0)
    return assign


def initialize(data, G, cfg=None, rng=None, fixed_labels=None):
    """Starting model from a hard partition of the data.

    Each part gives a component with its sample mean and (ridged) covariance,
    ``alpha = 0``, ``gamma = 1`` and weight equal to its share of rows.
    """
    cfg = cfg or EMConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    x = np.asarray(data, dtype=np.float64)
    n, p = x.shape
    if n < G * (p + 1):
        raise TooFewObservations(f"need at least {G * (p + 1)} rows for G={G}, p={p}; got {n}")
    assign = _partition(x, G, cfg, rng, fixed_labels)
    comps = []
    counts = np.bincount(assign, minlength=G)
    for k in range(G):
        part = x[assign == k]
        if len(part) < p + 1:
            raise DegenerateComponent(k, f"initial part has {len(part)} rows")
        cov = np.atleast_2d(np.cov(part, rowvar=False, bias=True))
        cov = 0.5 * (cov + cov.T) + RIDGE * max(np.trace(cov) / p, 1e-300) * np.eye(p)
        comps.append(VGComponent(1.0, part.mean(axis=0), cov, np.zeros(p)))
    return VGMixtureModel(counts / n, comps)


def _run(x, G, labels, cfg, rng):
    model = initialize(x, G, cfg, rng, labels)
    trace = []
    flags = (False,) * G
    converged = False
    for it in range(cfg.max_iter):
        lat = e_step(x, model, labels, cfg)
        trace.append(lat.loglik)
        if not math.isfinite(lat.loglik):
            raise DegenerateComponent(-1, "log-likelihood is not finite")
        if aitken_converged(trace, cfg.aitken_eps):
            converged = True
            break
        if it == cfg.max_iter - 1:
            break
        model, flags = _m_step(x, lat, model, cfg)
    return model, lat, trace, converged, flags


def fit_em(data, G, fixed_labels=None, H=None, cfg=None):
    """Fit a G-class (H-component) VG mixture by EM with several starts.

    With ``fixed_labels`` all -1 (or None) and ``H == G`` this is plain
    model-based clustering. Returns the start with the highest final
    log-likelihood.
    """
    cfg = cfg or EMConfig()
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("data must be an (n, p) array")
    n, p = x.shape
    H = G if H is None else H
    if H < G:
        raise InvalidLabels(f"H={H} must be >= G={G}")
    labels = check_labels(fixed_labels, n, G)
    if labels is not None and not np.any(labels >= 0):
        labels = None
    if n < H * (p + 1):
        raise TooFewObservations(f"need at least {H * (p + 1)} rows for {H} components, p={p}")
    fully_labeled = labels is not None and H == G and np.all(labels >= 0)
    n_starts = 1 if fully_labeled else cfg.n_starts
    streams = np.random.SeedSequence(cfg.seed).spawn(n_starts)
    best = None
    errors = []
    for s, stream in enumerate(streams):
        try:
            run = _run(x, H, labels, cfg, np.random.default_rng(stream))
        except (DegenerateComponent, NotPositiveDefinite) as exc:
            log.debug("start %d failed: %s", s, exc)
            errors.append(exc)
            continue
        if best is None or run[2][-1] > best[1][2][-1]:
            best = (s, run)
    if best is None:
        raise AllStartsFailed(errors)
    s, (model, lat, trace, converged, flags) = best
    ll = trace[-1]
    return FitResult(
        model=model, loglik=ll, trace=trace,
        bic=bic(ll, count_free_params(model), n),
        labels=map_labels(lat.zhat), responsibilities=lat.zhat,
        n_iter=len(trace), converged=converged, boundary_flags=flags,
        seed_used=cfg.seed, best_start=s, start_errors=errors,
    )
