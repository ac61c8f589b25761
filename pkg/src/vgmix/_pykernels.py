"""Pure numpy implementation of the Bessel-K kernels.

This is the fallback used when the compiled ``_ckernels`` extension is not
available. Both modules expose the same functions with the same semantics:
the order is a scalar and the argument is a 1-d float64 array.

``K_m(x)`` for ``m >= 0`` is evaluated at the reduced order ``mu = m - round(m)``
(``|mu| <= 1/2``) with Temme's series for ``x < 2`` and Steed's continued
fraction for ``x >= 2``, then carried up to ``m`` by forward recurrence on the
ratio ``K_{k+1}/K_k``. Orders ``m >= DEBYE_MIN`` use the uniform asymptotic
(Debye) expansion instead of a long recurrence. Everything is accumulated in
log space.
"""

import math
from fractions import Fraction

import numpy as np

# Taylor coefficients of 1/Gamma(z) about 0 (coefficient of z**k at index k).
_RGAMMA_TAYLOR = (
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
)

EPS = 1e-16
SERIES_SWITCH = 2.0
MAXIT = 10000
DNU_REL_STEP = 1e-5
DEBYE_MIN = 50.0
DEBYE_TERMS = 12


def debye_polynomials(n_terms=DEBYE_TERMS):
    """Coefficient lists (ascending powers of t) of the Debye polynomials u_0..u_{n-1}."""
    polys = [[Fraction(1)]]
    for _ in range(n_terms - 1):
        prev = polys[-1]
        nxt = {}
        # u_{k+1} = t^2 (1 - t^2) u_k' / 2 + (1/8) int_0^t (1 - 5 s^2) u_k(s) ds
        for j in range(1, len(prev)):
            v = j * prev[j]
            nxt[j + 1] = nxt.get(j + 1, 0) + v / 2
            nxt[j + 3] = nxt.get(j + 3, 0) - v / 2
        for j, v in enumerate(prev):
            nxt[j + 1] = nxt.get(j + 1, 0) + v / 8 / (j + 1)
            nxt[j + 3] = nxt.get(j + 3, 0) - 5 * v / 8 / (j + 3)
        polys.append([nxt.get(j, Fraction(0)) for j in range(max(nxt) + 1)])
    return [[float(c) for c in poly] for poly in polys]


def debye_even_parts(n_terms=DEBYE_TERMS):
    """``P_k`` with ``u_k(t) = t^k P_k(t^2)``; only every other power of ``u_k`` is nonzero."""
    return [poly[k::2] for k, poly in enumerate(debye_polynomials(n_terms))]


_DEBYE = debye_even_parts()


def _debye_scaled(m, x):
    # log(K_m(x) e^x) = ... + log sum_k (-1)^k u_k(t) / m^k, summed by Horner in -t/m.
    root = np.sqrt(m * m + x * x)
    t = m / root
    t2 = t * t
    step = -t / m
    total = np.zeros_like(x)
    for k in range(DEBYE_TERMS - 1, -1, -1):
        pk = np.zeros_like(x)
        for coef in reversed(_DEBYE[k]):
            pk = pk * t2 + coef
        total = total * step + pk
    return (0.5 * math.log(0.5 * math.pi) - 0.25 * np.log(root * root)
            + m * np.arcsinh(m / x) - m * m / (x + root) + np.log(total))


def gamma_pair(mu):
    """Temme's auxiliary functions for ``|mu| <= 1/2``.

    Returns ``(gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu))`` where
    ``gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)`` and
    ``gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2``.
    """
    gam1 = 0.0
    gam2 = 0.0
    # Horner from the top; even k feed gam1, odd k feed gam2.
    mu2 = mu * mu
    for k in range(30, 1, -2):
        gam1 = gam1 * mu2 - _RGAMMA_TAYLOR[k]
    for k in range(29, 0, -2):
        gam2 = gam2 * mu2 + _RGAMMA_TAYLOR[k]
    return gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1


def _temme(mu, x):
    gam1, gam2, gampl, gammi = gamma_pair(mu)
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < EPS else pimu / math.sin(pimu)
    d = -np.log(x2)
    e = mu * d
    with np.errstate(invalid="ignore", divide="ignore"):
        fact2 = np.where(np.abs(e) < EPS, 1.0, np.sinh(e) / e)
    ff = fact * (gam1 * np.cosh(e) + gam2 * fact2 * d)
    total = ff.copy()
    e = np.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = np.ones_like(x)
    dd = x2 * x2
    total1 = p.copy()
    mu2 = mu * mu
    for i in range(1, MAXIT):
        ff = (i * ff + p + q) / (i * i - mu2)
        c = c * dd / i
        p = p / (i - mu)
        q = q / (i + mu)
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if np.all(np.abs(delta) < np.abs(total) * EPS):
            break
    return np.log(total) + x, total1 * (2.0 / x) / total


def _steed(mu, x):
    a1 = 0.25 - mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < np.abs(s) * EPS):
            break
    h = a1 * h
    logk_scaled = 0.5 * np.log(math.pi / (2.0 * x)) - np.log(s)
    return logk_scaled, (mu + x + 0.5 - h) / x


def logk_ratio(m, x):
    """``(log K_m(x), K_{m+1}(x)/K_m(x))`` for scalar ``m >= 0``."""
    logk, up, _ = scaled_triple(m, x)
    return logk - x, up


def _base(mu, x):
    logk = np.empty_like(x)
    ratio = np.empty_like(x)
    small = x < SERIES_SWITCH
    if small.any():
        logk[small], ratio[small] = _temme(mu, x[small])
    big = ~small
    if big.any():
        logk[big], ratio[big] = _steed(mu, x[big])
    return logk, ratio


def scaled_triple(m, x):
    """``(log(K_m(x) e^x), K_{m+1}/K_m, K_{m-1}/K_m)`` for scalar ``m >= 0``.

    The scaled log keeps the ``-x`` term out of differences taken in the order.
    """
    x = np.asarray(x, dtype=np.float64)
    if m >= DEBYE_MIN:
        logk = _debye_scaled(m, x)
        down = np.exp(_debye_scaled(m - 1.0, x) - logk)
        return logk, down + 2.0 * m / x, down
    nl = int(m + 0.5)
    mu = m - nl
    logk, ratio = _base(mu, x)
    if nl == 0:
        # K_{mu-1}/K_mu = K_{1-mu}/K_{-mu}: the base ratio at -mu.
        down = ratio if mu == 0.0 else _base(-mu, x)[1]
    for i in range(1, nl + 1):
        logk += np.log(ratio)
        down = 1.0 / ratio
        ratio = down + 2.0 * (mu + i) / x
    return logk, ratio, down


def log_bessel_k(nu, x):
    return logk_ratio(abs(nu), x)[0]


def _signed_triple(nu, x):
    logk, up, down = scaled_triple(abs(nu), x)
    # K_{-m} = K_m, so a negative order swaps the two neighbours.
    return (logk, up, down) if nu >= 0.0 else (logk, down, up)


def bessel_k_ratio(nu, x):
    """``K_{nu+1}(x) / K_nu(x)`` for any real ``nu``."""
    return _signed_triple(nu, x)[1]


def _scaled(nu, x):
    m = abs(nu)
    if m >= DEBYE_MIN:
        return _debye_scaled(m, x)
    nl = int(m + 0.5)
    mu = m - nl
    logk, ratio = _base(mu, x)
    for i in range(1, nl + 1):
        logk += np.log(ratio)
        ratio = 1.0 / ratio + 2.0 * (mu + i) / x
    return logk


def dlog_bessel_k_dnu(nu, x):
    """Central difference of ``log K_nu(x)`` in ``nu`` on the scaled log."""
    x = np.asarray(x, dtype=np.float64)
    h = DNU_REL_STEP * max(1.0, abs(nu))
    return (_scaled(nu + h, x) - _scaled(nu - h, x)) / (2.0 * h)


def latent_terms(nu, s):
    """E-step kernel for one mixture component.

    Returns ``log K_nu(s)``, ``K_{nu+1}(s)/K_nu(s)``, ``K_{nu-1}(s)/K_nu(s)`` and
    ``d/dnu log K_nu(s)``, each with the shape of ``s``.
    """
    s = np.asarray(s, dtype=np.float64)
    logk, up, down = _signed_triple(nu, s)
    return logk - s, up, down, dlog_bessel_k_dnu(nu, s)
