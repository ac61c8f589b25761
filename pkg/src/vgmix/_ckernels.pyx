# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Bessel-K kernels; same algorithm and interface as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, sin, sinh, cosh, sqrt, fabs, asinh, M_PI

from ._pykernels import DEBYE_MIN as _PY_DEBYE_MIN, debye_even_parts

cnp.import_array()

DEF DEBYE_TERMS = 12
cdef double DEBYE_MIN = _PY_DEBYE_MIN
cdef double[DEBYE_TERMS][DEBYE_TERMS] DEBYE
cdef int[DEBYE_TERMS] DEBYE_DEG


def _load_debye():
    cdef int k, j
    for k, poly in enumerate(debye_even_parts(DEBYE_TERMS)):
        DEBYE_DEG[k] = len(poly) - 1
        for j in range(len(poly)):
            DEBYE[k][j] = poly[j]


_load_debye()

cdef double EPS = 1e-16
cdef double SERIES_SWITCH = 2.0
cdef int MAXIT = 10000
cdef double DNU_REL_STEP = 1e-5

cdef double[31] RGAMMA_TAYLOR
RGAMMA_TAYLOR[:] = [
    0.0,
    1.0,
    0.57721566490153286,
    -0.65587807152025388,
    -0.042002635034095236,
    0.16653861138229149,
    -0.042197734555544337,
    -0.0096219715278769736,
    0.0072189432466630995,
    -0.0011651675918590651,
    -0.00021524167411495097,
    0.00012805028238811619,
    -2.0134854780788239e-5,
    -1.2504934821426707e-6,
    1.1330272319816959e-6,
    -2.0563384169776071e-7,
    6.1160951044814158e-9,
    5.0020076444692229e-9,
    -1.1812745704870201e-9,
    1.0434267116911005e-10,
    7.7822634399050713e-12,
    -3.6968056186422057e-12,
    5.100370287454476e-13,
    -2.0583260535665068e-14,
    -5.348122539423018e-15,
    1.2267786282382608e-15,
    -1.1812593016974588e-16,
    1.1866922547516003e-18,
    1.4123806553180318e-18,
    -2.2987456844353702e-19,
    1.7144063219273374e-20,
]


cdef void _temme(double mu, double x, double* logk, double* ratio) noexcept nogil:
    cdef double gam1 = 0.0, gam2 = 0.0, mu2 = mu * mu
    cdef int k, i
    k = 30
    while k > 1:
        gam1 = gam1 * mu2 - RGAMMA_TAYLOR[k]
        k -= 2
    k = 29
    while k > 0:
        gam2 = gam2 * mu2 + RGAMMA_TAYLOR[k]
        k -= 2
    cdef double gampl = gam2 - mu * gam1
    cdef double gammi = gam2 + mu * gam1
    cdef double x2 = 0.5 * x
    cdef double pimu = M_PI * mu
    cdef double fact = 1.0 if fabs(pimu) < EPS else pimu / sin(pimu)
    cdef double d = -log(x2)
    cdef double e = mu * d
    cdef double fact2 = 1.0 if fabs(e) < EPS else sinh(e) / e
    cdef double ff = fact * (gam1 * cosh(e) + gam2 * fact2 * d)
    cdef double total = ff
    e = exp(e)
    cdef double p = 0.5 * e / gampl
    cdef double q = 0.5 / (e * gammi)
    cdef double c = 1.0
    cdef double dd = x2 * x2
    cdef double total1 = p
    cdef double delta
    for i in range(1, MAXIT):
        ff = (i * ff + p + q) / (i * i - mu2)
        c = c * dd / i
        p = p / (i - mu)
        q = q / (i + mu)
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if fabs(delta) < fabs(total) * EPS:
            break
    logk[0] = log(total) + x
    ratio[0] = total1 * (2.0 / x) / total


cdef void _steed(double mu, double x, double* logk, double* ratio) noexcept nogil:
    cdef double a1 = 0.25 - mu * mu
    cdef double b = 2.0 * (1.0 + x)
    cdef double d = 1.0 / b
    cdef double h = d, delh = d
    cdef double q1 = 0.0, q2 = 1.0
    cdef double q = a1, c = a1, a = -a1
    cdef double s = 1.0 + q * delh
    cdef double qnew, dels
    cdef int i
    for i in range(2, MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if fabs(dels) < fabs(s) * EPS:
            break
    h = a1 * h
    logk[0] = 0.5 * log(M_PI / (2.0 * x)) - log(s)
    ratio[0] = (mu + x + 0.5 - h) / x


cdef double _debye_scaled(double m, double x) noexcept nogil:
    cdef double root = sqrt(m * m + x * x)
    cdef double t = m / root
    cdef double t2 = t * t, step = -t / m
    cdef double total = 0.0, pk
    cdef int k, j
    for k in range(DEBYE_TERMS - 1, -1, -1):
        pk = 0.0
        for j in range(DEBYE_DEG[k], -1, -1):
            pk = pk * t2 + DEBYE[k][j]
        total = total * step + pk
    return (0.5 * log(0.5 * M_PI) - 0.25 * log(root * root)
            + m * asinh(m / x) - m * m / (x + root) + log(total))


cdef inline void _base(double mu, double x, double* logk, double* ratio) noexcept nogil:
    if x < SERIES_SWITCH:
        _temme(mu, x, logk, ratio)
    else:
        _steed(mu, x, logk, ratio)


cdef void _scaled_triple(double m, double x, double* logk, double* up, double* down) noexcept nogil:
    # log(K_m(x) e^x), K_{m+1}/K_m and K_{m-1}/K_m for m >= 0
    cdef int nl = <int>(m + 0.5)
    cdef double mu = m - nl
    cdef double lk, r, dn, junk
    cdef int i
    if m >= DEBYE_MIN:
        lk = _debye_scaled(m, x)
        logk[0] = lk
        down[0] = exp(_debye_scaled(m - 1.0, x) - lk)
        up[0] = down[0] + 2.0 * m / x
        return
    _base(mu, x, &lk, &r)
    if nl == 0:
        # K_{mu-1}/K_mu = K_{1-mu}/K_{-mu}: the base ratio at -mu.
        if mu == 0.0:
            dn = r
        else:
            _base(-mu, x, &junk, &dn)
    for i in range(1, nl + 1):
        lk += log(r)
        dn = 1.0 / r
        r = dn + 2.0 * (mu + i) / x
    logk[0] = lk
    up[0] = r
    down[0] = dn


cdef double _scaled(double nu, double x) noexcept nogil:
    cdef double m = fabs(nu)
    cdef int nl = <int>(m + 0.5)
    cdef double mu = m - nl
    cdef double lk, r
    cdef int i
    if m >= DEBYE_MIN:
        return _debye_scaled(m, x)
    _base(mu, x, &lk, &r)
    for i in range(1, nl + 1):
        lk += log(r)
        r = 1.0 / r + 2.0 * (mu + i) / x
    return lk


cdef inline double _logk(double nu, double x) noexcept nogil:
    return _scaled(nu, x) - x


cdef void _signed_triple(double nu, double x, double* logk, double* up, double* down) noexcept nogil:
    # K_{-m} = K_m, so a negative order swaps the two neighbours.
    if nu >= 0.0:
        _scaled_triple(nu, x, logk, up, down)
    else:
        _scaled_triple(-nu, x, logk, down, up)


cdef double _dlogk(double nu, double x) noexcept nogil:
    cdef double h = DNU_REL_STEP * (fabs(nu) if fabs(nu) > 1.0 else 1.0)
    return (_scaled(nu + h, x) - _scaled(nu - h, x)) / (2.0 * h)


def logk_ratio(double m, x):
    """``(log K_m(x), K_{m+1}(x)/K_m(x))`` for scalar ``m >= 0``."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xv.shape[0], j
    out_k = np.empty(n)
    out_r = np.empty(n)
    cdef double[::1] ok = out_k
    cdef double[::1] orr = out_r
    cdef double dn
    with nogil:
        for j in range(n):
            _scaled_triple(m, xv[j], &ok[j], &orr[j], &dn)
            ok[j] -= xv[j]
    shape = np.shape(x)
    return out_k.reshape(shape), out_r.reshape(shape)


def log_bessel_k(double nu, x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xv.shape[0], j
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for j in range(n):
            o[j] = _logk(nu, xv[j])
    return out.reshape(np.shape(x))


def bessel_k_ratio(double nu, x):
    """``K_{nu+1}(x) / K_nu(x)`` for any real ``nu``."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xv.shape[0], j
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double lk, dn
    with nogil:
        for j in range(n):
            _signed_triple(nu, xv[j], &lk, &o[j], &dn)
    return out.reshape(np.shape(x))


def dlog_bessel_k_dnu(double nu, x):
    """Central difference of ``log K_nu(x)`` in ``nu`` on the scaled log."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xv.shape[0], j
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for j in range(n):
            o[j] = _dlogk(nu, xv[j])
    return out.reshape(np.shape(x))


def latent_terms(double nu, s):
    """E-step kernel for one mixture component.

    Returns ``log K_nu(s)``, ``K_{nu+1}(s)/K_nu(s)``, ``K_{nu-1}(s)/K_nu(s)`` and
    ``d/dnu log K_nu(s)``, each with the shape of ``s``.
    """
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64).ravel()
    cdef Py_ssize_t n = sv.shape[0], j
    logk = np.empty(n)
    up = np.empty(n)
    down = np.empty(n)
    dnu = np.empty(n)
    cdef double[::1] lk = logk, u = up, dn = down, dv = dnu
    with nogil:
        for j in range(n):
            _signed_triple(nu, sv[j], &lk[j], &u[j], &dn[j])
            lk[j] -= sv[j]
            dv[j] = _dlogk(nu, sv[j])
    shape = np.shape(s)
    return (logk.reshape(shape), up.reshape(shape), down.reshape(shape),
            dnu.reshape(shape))
