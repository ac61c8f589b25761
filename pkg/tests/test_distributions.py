import math

import numpy as np
import pytest
from scipy import integrate

from oracles import gig_log_pdf, gig_moments_quad, integrate_1d, integrate_positive
from vgmix import specfun
from vgmix.distributions import (GammaParams, GHParams, GIGParams, VGComponent, VGMixtureModel,
                                 gamma_log_density, gh_log_density, gig_expectations,
                                 gig_log_density, mixture_log_density, mvn_log_density,
                                 posterior_gig, vg_log_density, vg_log_density_unrestricted)
from vgmix.exceptions import DimensionMismatch, DomainError
from vgmix.linalg import cholesky

UNIT_DET = np.array([[1.25, 0.5], [0.5, 1.0]])


def comp1(gamma=2.0, alpha=0.5, mu=0.0, s2=1.0):
    return VGComponent(gamma, [mu], [[s2]], [alpha])


# GIG

def test_gig_half_integer_value(backend):
    val = gig_log_density(1.0, GIGParams(1.0, 1.0, 0.5))
    assert math.exp(val) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-12)


@pytest.mark.parametrize("lam", [-2.0, 0.3, 1.0, 4.5])
def test_gig_mode_is_stationary(backend, lam):
    mode = ((lam - 1.0) + math.sqrt((lam - 1.0) ** 2 + 4.0)) / 2.0
    prm = GIGParams(2.0, 2.0, lam)
    h = 1e-6 * mode
    grad = (gig_log_density(mode + h, prm) - gig_log_density(mode - h, prm)) / (2 * h)
    assert abs(grad) < 1e-7
    assert gig_log_density(mode, prm) > gig_log_density(1.05 * mode, prm)
    assert gig_log_density(mode, prm) > gig_log_density(0.95 * mode, prm)


@pytest.mark.parametrize("psi,chi,lam", [(1.0, 1.0, 2.0), (3.0, 0.5, -1.2), (5.0, 4.2, 0.5)])
def test_gig_normalizes(backend, psi, chi, lam):
    prm = GIGParams(psi, chi, lam)
    total = integrate_positive(lambda y: gig_log_density(y, prm))
    assert total == pytest.approx(1.0, abs=1e-6)


def test_gig_density_matches_quadrature_normalized_kernel(backend):
    prm = GIGParams(3.0, 0.5, -1.2)
    for y in (0.05, 0.4, 2.0, 9.0):
        assert gig_log_density(y, prm) == pytest.approx(gig_log_pdf(y, 3.0, 0.5, -1.2), abs=1e-10)


def test_gig_domain():
    with pytest.raises(DomainError):
        gig_log_density(0.0, GIGParams(1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        GIGParams(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        GIGParams(-1.0, 1.0, 1.0)


def test_gig_expectations_examples(backend):
    e_y, e_inv, _ = gig_expectations(GIGParams(1.7, 1.7, 0.0))
    assert e_y == pytest.approx(e_inv, rel=1e-14)
    ratio = math.exp(specfun.log_bessel_k(1.0, 1.7) - specfun.log_bessel_k(0.0, 1.7))
    assert e_y == pytest.approx(ratio, rel=1e-12)
    assert gig_expectations(GIGParams(1.0, 1.0, 0.5))[0] == pytest.approx(2.0, rel=1e-14)


def test_gig_expectations_vs_quadrature(backend, rng):
    for _ in range(5):
        psi, chi = rng.uniform(0.2, 6.0, 2)
        lam = rng.uniform(-3.0, 3.0)
        got = gig_expectations(GIGParams(psi, chi, lam))
        ref = gig_moments_quad(psi, chi, lam)
        np.testing.assert_allclose(got, ref, rtol=1e-8, atol=1e-9)


def test_gig_inverse_moment_matches_textbook_form(backend):
    # E[1/Y] via the K_{lam+1} form, which cancels badly only when 2 lam / chi dominates.
    for psi, chi, lam in [(2.0, 3.0, 0.7), (1.0, 0.4, -1.5), (6.0, 1.0, 2.5)]:
        w = math.sqrt(psi * chi)
        up = math.exp(specfun.log_bessel_k(lam + 1, w) - specfun.log_bessel_k(lam, w))
        textbook = math.sqrt(psi / chi) * up - 2 * lam / chi
        assert gig_expectations(GIGParams(psi, chi, lam))[1] == pytest.approx(textbook, rel=1e-10)


# gamma and Gaussian

def test_gamma_examples():
    assert gamma_log_density(1.0, GammaParams(1.0, 1.0)) == pytest.approx(-1.0, abs=1e-15)
    for shape, rate in [(0.7, 2.0), (3.0, 0.5)]:
        prm = GammaParams(shape, rate)
        assert integrate_positive(lambda y: gamma_log_density(y, prm)) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        gamma_log_density(-1.0, GammaParams(1.0, 1.0))
    with pytest.raises(DomainError):
        GammaParams(0.0, 1.0)


def test_mvn_examples(rng):
    assert mvn_log_density(np.zeros(2), np.zeros(2), cholesky(np.eye(2))) == pytest.approx(
        -math.log(2 * math.pi), abs=1e-15)
    s = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 0.5]])
    mu = np.array([1.0, -1.0, 0.5])
    expect = -1.5 * math.log(2 * math.pi) - 0.5 * math.log(np.linalg.det(s))
    assert mvn_log_density(mu, mu, cholesky(s)) == pytest.approx(expect, abs=1e-13)
    x = rng.standard_normal(3)
    d = x - mu
    ref = -1.5 * math.log(2 * math.pi) - 0.5 * math.log(np.linalg.det(s)) - 0.5 * d @ np.linalg.inv(s) @ d
    assert mvn_log_density(x, mu, cholesky(s)) == pytest.approx(ref, abs=1e-10)
    with pytest.raises(DimensionMismatch):
        mvn_log_density(np.zeros(2), np.zeros(3), cholesky(np.eye(3)))


# generalized hyperbolic

def test_gh_normalizes_p1(backend):
    prm = GHParams(2.0, 1.0, 1.0, [0.0], [[1.0]], [0.5])
    total = integrate_1d(lambda t: gh_log_density(np.array([t]), prm), center=0.5, scale=3.0)
    assert total == pytest.approx(1.0, abs=1e-5)


def test_gh_symmetric_without_skew(backend, rng):
    prm = GHParams(1.3, 0.7, 2.0, [0.5, -1.0], UNIT_DET, [0.0, 0.0])
    for _ in range(5):
        d = rng.standard_normal(2)
        assert gh_log_density(prm.mu + d, prm) == pytest.approx(gh_log_density(prm.mu - d, prm), abs=1e-13)


def test_gh_requires_unit_determinant():
    with pytest.raises(DomainError):
        GHParams(1.0, 1.0, 1.0, [0.0, 0.0], 2.0 * np.eye(2), [0.0, 0.0])


def test_gh_approaches_vg_as_chi_vanishes(backend, rng):
    gamma = 1.7
    mu, alpha = np.array([0.3, -0.2]), np.array([0.6, -0.4])
    comp = VGComponent(gamma, mu, UNIT_DET, alpha)
    pts = mu + rng.standard_normal((10, 2)) * 1.5
    vg = vg_log_density(pts, comp)
    gaps = []
    for chi in (1e-2, 1e-4, 1e-6):
        gh = gh_log_density(pts, GHParams(gamma, chi, 2.0 * gamma, mu, UNIT_DET, alpha))
        gaps.append(np.abs(gh - vg))
    assert np.all(gaps[0] > gaps[1]) and np.all(gaps[1] > gaps[2])
    assert np.all(gaps[2] < 1e-3)
    gh8 = gh_log_density(pts, GHParams(gamma, 1e-8, 2.0 * gamma, mu, UNIT_DET, alpha))
    assert np.all(np.abs(gh8 - vg) < 1e-3)


# variance-gamma

def test_unrestricted_matches_restricted(backend, rng):
    comp = VGComponent(2.3, [1.0, 0.0], [[2.0, 0.4], [0.4, 1.0]], [0.3, -0.8])
    x = rng.standard_normal((7, 2))
    np.testing.assert_array_equal(
        vg_log_density_unrestricted(x, 2.3, 4.6, comp.mu, comp.chol, comp.alpha), vg_log_density(x, comp))


def test_aliasing_of_unrestricted_form(backend, rng):
    lam, psi = 1.4, 3.7
    mu = np.array([0.2, -0.5])
    sigma = np.array([[1.5, 0.2], [0.2, 0.8]])
    alpha = np.array([0.9, 0.4])
    for _ in range(10):
        x = mu + rng.standard_normal(2) * 2.0
        left = vg_log_density_unrestricted(x, lam, psi, mu, cholesky(sigma), alpha)
        right = vg_log_density_unrestricted(x, lam, 1.0, mu, cholesky(sigma / psi), alpha / psi)
        assert left == pytest.approx(right, abs=1e-10)


def test_restriction_removes_flat_direction(backend):
    x = np.array([0.7, -1.1])
    base = VGComponent(2.0, [0.0, 0.0], np.eye(2), [0.5, 0.2])
    moved = VGComponent(2.1, base.mu, base.sigma, base.alpha)
    assert abs(vg_log_density(x, base) - vg_log_density(x, moved)) > 1e-6


def test_unrestricted_normalizes_p1(backend):
    chol = cholesky([[1.0]])
    total = integrate_1d(lambda t: vg_log_density_unrestricted(np.array([t]), 1.5, 2.0, [0.0], chol, [0.7]),
                         center=0.0, scale=3.0)
    assert total == pytest.approx(1.0, abs=1e-5)


def test_laplace_case_is_symmetric(backend):
    comp = comp1(gamma=1.0, alpha=0.0)
    for d in (0.1, 0.9, 3.3):
        assert vg_log_density(np.array([d]), comp) == vg_log_density(np.array([-d]), comp)


def test_restricted_normalizes_p1(backend):
    comp = comp1()
    total = integrate_1d(lambda t: vg_log_density(np.array([t]), comp), center=0.0, scale=3.0)
    assert total == pytest.approx(1.0, abs=1e-4)


def test_restricted_normalizes_p2():
    comp = VGComponent(2.0, [0.0, 0.0], np.eye(2), [0.5, 0.5])

    def f(y, x):
        return math.exp(vg_log_density(np.array([x, y]), comp))

    total = 0.0
    # The mass outside [-25, 25]^2 is below 1e-12.
    for lo, hi in ((-25.0, 0.0), (0.0, 25.0)):
        total += integrate.dblquad(f, lo, hi, -25.0, 25.0, epsabs=1e-9, epsrel=1e-7)[0]
    assert total == pytest.approx(1.0, abs=1e-4)


def test_density_finite_at_mean(backend):
    # gamma <= p/2 makes the density unbounded at mu; the delta floor keeps it finite.
    comp = VGComponent(0.6, [0.0, 0.0], np.eye(2), [0.2, 0.0])
    assert math.isfinite(vg_log_density(np.zeros(2), comp))
    assert vg_log_density(np.zeros(2), comp) > vg_log_density(np.array([1e-3, 0.0]), comp)


def test_component_validation():
    with pytest.raises(DomainError):
        VGComponent(0.0, [0.0], [[1.0]], [0.0])
    with pytest.raises(DimensionMismatch):
        VGComponent(1.0, [0.0, 0.0], [[1.0]], [0.0])
    with pytest.raises(DomainError):
        VGComponent(1.0, [0.0, 0.0], [[1.0, 0.1], [0.2, 1.0]], [0.0, 0.0])
    with pytest.raises(DomainError):
        VGMixtureModel([0.5, 0.4], [comp1(), comp1()])
    with pytest.raises(DimensionMismatch):
        VGMixtureModel([0.5, 0.5], [comp1(), VGComponent(1.0, [0, 0], np.eye(2), [0, 0])])
    with pytest.raises(DimensionMismatch):
        vg_log_density(np.zeros(3), comp1())


# posterior

def test_posterior_example():
    comp = VGComponent(2.0, [0.0, 0.0], np.eye(2), [0.0, 0.0])
    prm = posterior_gig(np.array([1.0, 0.0]), comp)
    assert (prm.psi, prm.chi, prm.lam) == (4.0, 1.0, 1.0)


def test_posterior_mean_formula(backend):
    comp = VGComponent(1.4, [0.5, 0.0], [[1.0, 0.2], [0.2, 2.0]], [0.4, -0.3])
    x = np.array([1.2, 0.7])
    prm = posterior_gig(x, comp)
    sinv = np.linalg.inv(comp.sigma)
    psi = 2 * comp.gamma + comp.alpha @ sinv @ comp.alpha
    chi = (x - comp.mu) @ sinv @ (x - comp.mu)
    nu = comp.gamma - 1.0
    w = math.sqrt(psi * chi)
    direct = math.sqrt(chi / psi) * math.exp(specfun.log_bessel_k(nu + 1, w) - specfun.log_bessel_k(nu, w))
    assert gig_expectations(prm)[0] == pytest.approx(direct, rel=1e-12)


def test_bayes_identity(backend, rng):
    comp = VGComponent(1.8, [0.3, -0.4], [[1.2, 0.3], [0.3, 0.7]], [0.8, -0.5])
    for _ in range(20):
        x = comp.mu + rng.standard_normal(2) * 2.0
        y = rng.gamma(2.0, 1.0)
        prior = gamma_log_density(y, GammaParams(comp.gamma, comp.gamma))
        like = mvn_log_density(x, comp.mu + y * comp.alpha, cholesky(y * comp.sigma))
        post = gig_log_density(y, posterior_gig(x, comp))
        assert prior + like - vg_log_density(x, comp) == pytest.approx(post, abs=1e-9)


# mixture

def test_mixture_reductions(backend, rng):
    a = VGComponent(1.5, [0.0, 1.0], [[1.0, 0.2], [0.2, 1.0]], [0.3, 0.3])
    x = rng.standard_normal((6, 2))
    np.testing.assert_allclose(mixture_log_density(x, VGMixtureModel([1.0], [a])), vg_log_density(x, a),
                               rtol=0, atol=1e-14)
    np.testing.assert_allclose(mixture_log_density(x, VGMixtureModel([0.3, 0.7], [a, a])),
                               vg_log_density(x, a), rtol=0, atol=1e-13)


def test_mixture_permutation_invariant(blobs, rng):
    x = rng.standard_normal((10, 2)) * 4
    swapped = VGMixtureModel(blobs.weights[::-1], blobs.components[::-1])
    np.testing.assert_allclose(mixture_log_density(x, blobs), mixture_log_density(x, swapped), atol=1e-13)


def test_mixture_normalizes_p1(backend):
    model = VGMixtureModel([0.35, 0.65], [comp1(2.0, 0.5, -2.0), comp1(0.8, -0.3, 3.0, 0.5)])
    total = integrate_1d(lambda t: mixture_log_density(np.array([t]), model), center=0.0, scale=5.0)
    assert total == pytest.approx(1.0, abs=1e-4)


def test_mixture_is_finite_far_out(blobs):
    far = np.array([[1e4, -1e4], [0.0, 0.0]])
    assert np.all(np.isfinite(mixture_log_density(far, blobs)))
