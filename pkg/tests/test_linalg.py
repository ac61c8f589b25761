import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spd
from vgmix.exceptions import DimensionMismatch, NotPositiveDefinite
from vgmix.linalg import cholesky, mahalanobis, quad_form, solve


def test_identity():
    f = cholesky(np.eye(3))
    assert np.array_equal(f.lower, np.eye(3))
    assert f.log_det == 0.0


def test_hand_checked_2x2():
    f = cholesky([[4.0, 2.0], [2.0, 5.0]])
    np.testing.assert_array_equal(f.lower, [[2.0, 0.0], [1.0, 2.0]])
    assert f.log_det == pytest.approx(math.log(16.0), abs=1e-15)


@pytest.mark.parametrize("p", [1, 2, 5, 12, 20])
def test_reconstruction_random_spd(rng, p):
    a = random_spd(rng, p)
    f = cholesky(a)
    err = np.linalg.norm(f.reconstruct() - a) / np.linalg.norm(a)
    assert err < 1e-10
    assert f.log_det == pytest.approx(2.0 * np.sum(np.log(np.diag(f.lower))), abs=0)
    assert f.log_det == pytest.approx(np.linalg.slogdet(a)[1], rel=1e-10)
    assert np.allclose(f.lower, np.tril(f.lower))


def test_failing_pivot_is_reported():
    m = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]])
    with pytest.raises(NotPositiveDefinite) as err:
        cholesky(m)
    assert err.value.pivot == 2
    with pytest.raises(NotPositiveDefinite) as err:
        cholesky([[-1.0, 0.0], [0.0, 1.0]])
    assert err.value.pivot == 0


def test_pivot_tolerance_is_relative():
    # Pivot 1e-13 relative to the largest diagonal is treated as singular.
    with pytest.raises(NotPositiveDefinite):
        cholesky(np.diag([1.0, 1e-13]))
    cholesky(np.diag([1.0, 1e-11]))
    cholesky(np.diag([1e-20, 1e-20]))


def test_non_square_rejected():
    with pytest.raises(DimensionMismatch):
        cholesky(np.ones((2, 3)))


def test_mahalanobis_examples(rng):
    f = cholesky(np.diag([4.0, 9.0]))
    assert mahalanobis([1.0, 0.0], [0.0, 0.0], f) == pytest.approx(0.25, abs=1e-15)
    mu = rng.standard_normal(4)
    s = cholesky(random_spd(rng, 4))
    assert mahalanobis(mu, mu, s) == 0.0


def test_mahalanobis_explicit_inverse(rng):
    for _ in range(20):
        p = int(rng.integers(1, 8))
        a = random_spd(rng, p)
        x, mu = rng.standard_normal(p), rng.standard_normal(p)
        d = x - mu
        ref = d @ np.linalg.inv(a) @ d
        assert mahalanobis(x, mu, cholesky(a)) == pytest.approx(ref, rel=1e-10)


def test_quad_form_examples(rng):
    f = cholesky(np.diag([4.0, 9.0]))
    assert quad_form(np.zeros(2), f) == 0.0
    assert quad_form([2.0, 0.0], f) == 1.0
    s = cholesky(random_spd(rng, 3))
    v = rng.standard_normal(3)
    assert quad_form(v, s) == mahalanobis(v, np.zeros(3), s)


def test_rows_are_independent(rng):
    s = cholesky(random_spd(rng, 3))
    v = rng.standard_normal((6, 3))
    batch = quad_form(v, s)
    assert batch.shape == (6,)
    for i in range(6):
        assert batch[i] == pytest.approx(quad_form(v[i], s), rel=1e-14)


def test_solve(rng):
    a = random_spd(rng, 4)
    v = rng.standard_normal(4)
    np.testing.assert_allclose(solve(cholesky(a), v), np.linalg.solve(a, v), rtol=1e-10)
    np.testing.assert_allclose(cholesky(a).inverse(), np.linalg.inv(a), rtol=1e-9, atol=1e-12)


def test_dimension_mismatch(rng):
    f = cholesky(np.eye(2))
    with pytest.raises(DimensionMismatch):
        quad_form(np.ones(3), f)
    with pytest.raises(DimensionMismatch):
        mahalanobis(np.ones(2), np.ones(3), f)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), c=st.floats(-1e3, 1e3).filter(lambda t: abs(t) > 1e-3))
def test_quad_form_homogeneous(seed, c):
    r = np.random.default_rng(seed)
    p = int(r.integers(1, 6))
    f = cholesky(random_spd(r, p))
    v = r.standard_normal(p)
    assert quad_form(c * v, f) == pytest.approx(c * c * quad_form(v, f), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_mahalanobis_nonnegative(seed):
    r = np.random.default_rng(seed)
    p = int(r.integers(1, 20))
    f = cholesky(random_spd(r, p))
    x, mu = r.standard_normal(p), r.standard_normal(p)
    assert mahalanobis(x, mu, f) > 0.0
