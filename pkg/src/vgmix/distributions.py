"""Densities for the variance-gamma mixture and its relatives.

All densities are returned on the log scale. Functions taking an observation
accept either a single point of shape ``(p,)`` (returning a float) or a batch
of shape ``(n, p)`` (returning an ``(n,)`` array).

The restricted variance-gamma law used for fitting is the normal variance-mean
mixture ``X = mu + Y alpha + sqrt(Y) U`` with ``Y ~ gamma(shape=gamma, rate=gamma)``
and ``U ~ N(0, Sigma)``, so that ``E[Y] = 1``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from . import _backend
from .exceptions import DimensionMismatch, DomainError
from .linalg import CholFactor, cholesky, mahalanobis, quad_form, solve

DELTA_FLOOR = 1e-10
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GIGParams:
    psi: float
    chi: float
    lam: float

    def __post_init__(self):
        if not (self.psi > 0 and self.chi > 0 and math.isfinite(self.psi)
                and math.isfinite(self.chi) and math.isfinite(self.lam)):
            raise DomainError(f"invalid GIG parameters {self}")


@dataclass(frozen=True)
class GammaParams:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise DomainError(f"invalid gamma parameters {self}")


def _vec(v, name):
    arr = np.array(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be a vector")
    arr.setflags(write=False)
    return arr


def _mat(m):
    arr = np.array(m, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GHParams:
    """Generalized hyperbolic parameters; ``|sigma| = 1`` is enforced."""

    lam: float
    chi: float
    psi: float
    mu: np.ndarray
    sigma: np.ndarray
    alpha: np.ndarray
    chol: CholFactor = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mu", _vec(self.mu, "mu"))
        object.__setattr__(self, "alpha", _vec(self.alpha, "alpha"))
        object.__setattr__(self, "sigma", _mat(self.sigma))
        if not (self.chi > 0 and self.psi > 0):
            raise DomainError("GH requires chi > 0 and psi > 0")
        p = self.mu.shape[0]
        if self.alpha.shape != (p,) or self.sigma.shape != (p, p):
            raise DimensionMismatch("GH parameter dimensions disagree")
        chol = cholesky(self.sigma)
        if abs(math.exp(chol.log_det) - 1.0) > 1e-8:
            raise DomainError("GH parameterization requires |sigma| = 1")
        object.__setattr__(self, "chol", chol)


@dataclass(frozen=True)
class VGComponent:
    """One restricted variance-gamma component ``(gamma, mu, Sigma, alpha)``."""

    gamma: float
    mu: np.ndarray
    sigma: np.ndarray
    alpha: np.ndarray
    chol: CholFactor = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "mu", _vec(self.mu, "mu"))
        object.__setattr__(self, "alpha", _vec(self.alpha, "alpha"))
        object.__setattr__(self, "sigma", _mat(self.sigma))
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        p = self.mu.shape[0]
        if self.alpha.shape != (p,) or self.sigma.shape != (p, p):
            raise DimensionMismatch("component parameter dimensions disagree")
        if not np.array_equal(self.sigma, self.sigma.T):
            raise DomainError("sigma must be symmetric")
        object.__setattr__(self, "chol", cholesky(self.sigma))

    @property
    def dim(self):
        return self.mu.shape[0]


@dataclass(frozen=True)
class VGMixtureModel:
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = _vec(self.weights, "weights")
        comps = tuple(self.components)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)
        if len(comps) == 0 or w.shape != (len(comps),):
            raise DimensionMismatch("need one weight per component")
        if np.any(~(w > 0)) or abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise DomainError("weights must be positive and sum to 1")
        if len({c.dim for c in comps}) != 1:
            raise DimensionMismatch("components differ in dimension")

    @property
    def n_components(self):
        return len(self.components)

    @property
    def dim(self):
        return self.components[0].dim


def _positive(y, what):
    arr = np.asarray(y, dtype=np.float64)
    if np.any(~(arr > 0)):
        raise DomainError(f"{what} requires y > 0")
    return arr


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def _points(x, p):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != p or x.ndim > 2:
        raise DimensionMismatch(f"observations of shape {x.shape} vs dimension {p}")
    return x


def _unbatch(value, x):
    return float(value[0]) if np.ndim(x) == 1 else value


def _logk(nu, s):
    return _backend.kernels.log_bessel_k(float(nu), np.atleast_1d(s))


def gig_log_density(y, params):
    """Log density of ``GIG(psi, chi, lambda)`` at ``y > 0``."""
    y = _positive(y, "GIG density")
    psi, chi, lam = params.psi, params.chi, params.lam
    omega = math.sqrt(psi * chi)
    out = (0.5 * lam * math.log(psi / chi) + (lam - 1.0) * np.log(y) - math.log(2.0)
           - float(_logk(lam, omega)[0]) - 0.5 * (psi * y + chi / y))
    return _scalar_or_array(out, y)


def gig_expectations(params):
    """``(E[Y], E[1/Y], E[log Y])`` under ``GIG(psi, chi, lambda)``.

    ``E[1/Y]`` is evaluated as ``sqrt(psi/chi) K_{lambda-1}/K_lambda``, which
    equals ``sqrt(psi/chi) K_{lambda+1}/K_lambda - 2 lambda/chi`` by the Bessel
    recurrence but has no cancellation.
    """
    e_y, e_inv, e_log = _gig_moments(params.psi, np.array([params.chi]), params.lam)
    return float(e_y[0]), float(e_inv[0]), float(e_log[0])


def _gig_moments(psi, chi, lam):
    # psi and lam scalar, chi an array: the per-component shape of the E-step.
    omega = np.sqrt(psi * chi)
    _, up, down, dlogk = _backend.kernels.latent_terms(float(lam), omega)
    root = np.sqrt(chi / psi)
    return root * up, down / root, np.log(root) + dlogk


def gamma_log_density(y, params):
    """Log density of ``gamma(shape, rate)`` at ``y > 0``."""
    y = _positive(y, "gamma density")
    a, r = params.shape, params.rate
    out = a * math.log(r) - gammaln(a) + (a - 1.0) * np.log(y) - r * y
    return _scalar_or_array(out, y)


def mvn_log_density(x, mu, chol):
    """Multivariate normal log density from a Cholesky factor of the covariance."""
    x = _points(x, chol.dim)
    delta = mahalanobis(x, mu, chol)
    return -0.5 * (chol.dim * LOG_2PI + chol.log_det + delta)


def gh_log_density(x, params):
    """Generalized hyperbolic log density (McNeil-Frey-Embrechts form)."""
    p = params.mu.shape[0]
    x = _points(x, p)
    xb = np.atleast_2d(x)
    chol = params.chol
    lam, chi, psi = params.lam, params.chi, params.psi
    delta = mahalanobis(xb, params.mu, chol)
    psi_t = psi + quad_form(params.alpha, chol)
    chi_t = chi + delta
    nu = lam - 0.5 * p
    skew = (xb - params.mu) @ solve(chol, params.alpha)
    out = (0.5 * nu * np.log(chi_t / psi_t) + 0.5 * lam * math.log(psi / chi)
           + _logk(nu, np.sqrt(psi_t * chi_t))
           - 0.5 * (p * LOG_2PI + chol.log_det)
           - float(_logk(lam, math.sqrt(chi * psi))[0]) + skew)
    return _unbatch(out, x)


def _vg_terms(x, lam, psi, mu, chol, alpha, delta_floor, moments=False):
    # Shared by the density and the E-step: the Bessel argument of the density
    # is sqrt(psi_t * delta), the same as that of the latent GIG posterior.
    p = chol.dim
    delta = np.maximum(mahalanobis(x, mu, chol), delta_floor)
    psi_t = psi + quad_form(alpha, chol)
    nu = lam - 0.5 * p
    omega = np.sqrt(psi_t * delta)
    skew = (x - mu) @ solve(chol, alpha)
    if moments:
        logk, up, down, dlogk = _backend.kernels.latent_terms(float(nu), omega)
    else:
        logk = _logk(nu, omega)
    out = (0.5 * nu * (np.log(delta) - math.log(psi_t)) + (1.0 - lam) * math.log(2.0)
           + lam * math.log(psi) + logk
           - gammaln(lam) - 0.5 * (p * LOG_2PI + chol.log_det) + skew)
    if not moments:
        return out
    root = np.sqrt(delta / psi_t)
    return out, root * up, down / root, np.log(root) + dlogk


def vg_log_density_unrestricted(x, lam, psi, mu, chol, alpha, delta_floor=DELTA_FLOOR):
    """Variance-gamma log density with gamma(lam, psi/2) mixing (no E[Y]=1 restriction)."""
    if not (lam > 0 and psi > 0):
        raise DomainError("unrestricted VG requires lambda > 0 and psi > 0")
    mu = np.asarray(mu, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    x = _points(x, chol.dim)
    out = _vg_terms(np.atleast_2d(x), lam, psi, mu, chol, alpha, delta_floor)
    return _unbatch(out, x)


def vg_terms(x, comp, delta_floor=DELTA_FLOOR):
    """``log v*`` and the posterior ``(E[Y], E[1/Y], E[log Y])`` for rows of ``x``."""
    return _vg_terms(np.atleast_2d(x), comp.gamma, 2.0 * comp.gamma, comp.mu, comp.chol,
                     comp.alpha, delta_floor, moments=True)


def vg_log_density(x, comp, delta_floor=DELTA_FLOOR):
    """Restricted variance-gamma log density ``log v*(x | gamma, mu, Sigma, alpha)``."""
    return vg_log_density_unrestricted(x, comp.gamma, 2.0 * comp.gamma, comp.mu,
                                       comp.chol, comp.alpha, delta_floor)


def posterior_gig(x, comp, delta_floor=DELTA_FLOOR):
    """GIG law of the latent scale ``Y`` given one observation ``x``."""
    x = _points(x, comp.dim)
    if x.ndim != 1:
        raise DimensionMismatch("posterior_gig takes a single observation")
    delta = max(mahalanobis(x, comp.mu, comp.chol), delta_floor)
    return GIGParams(2.0 * comp.gamma + quad_form(comp.alpha, comp.chol), delta,
                     comp.gamma - 0.5 * comp.dim)


def component_log_densities(x, model, delta_floor=DELTA_FLOOR):
    """``(n, G)`` matrix of ``log pi_g + log v*(x_i | theta_g)``."""
    xb = np.atleast_2d(_points(x, model.dim))
    cols = [math.log(w) + np.atleast_1d(vg_log_density(xb, c, delta_floor))
            for w, c in zip(model.weights, model.components)]
    return np.column_stack(cols) if xb.shape[0] else np.empty((0, model.n_components))


def mixture_log_density(x, model, delta_floor=DELTA_FLOOR):
    """Log density of the variance-gamma mixture."""
    out = logsumexp(component_log_densities(x, model, delta_floor), axis=1)
    return _unbatch(out, np.asarray(x))
