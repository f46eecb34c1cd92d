"""Hermite, Legendre and Gaussian helpers.

Hermite polynomials are the probabilists' family (H2 = t^2 - 1).  Associated
Legendre functions are fully normalised with the Condon-Shortley phase, so that
``Y_nm = associated_legendre(n, m, cos theta) * exp(i m phi)`` is orthonormal on
the unit sphere.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

from .errors import DomainError, OrderTooLarge

MAX_HERMITE_ORDER = 64
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def hermite(k: int, t):
    """H_k(t) by H_k = t H_{k-1} - (k-1) H_{k-2}. Works on scalars and arrays."""
    if k < 0:
        raise ValueError("Hermite order must be non-negative")
    if k > MAX_HERMITE_ORDER:
        raise OrderTooLarge(f"order {k} exceeds {MAX_HERMITE_ORDER}")
    t = np.asarray(t, dtype=float)
    h_prev, h = np.zeros_like(t), np.ones_like(t)
    for j in range(1, k + 1):
        h_prev, h = h, t * h - (j - 1) * h_prev
    return h if h.ndim else float(h)


def gaussian_pdf(u):
    u = np.asarray(u, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    return out if out.ndim else float(out)


def gaussian_cdf(u):
    # erfc keeps full relative accuracy in the lower tail
    u = np.asarray(u, dtype=float)
    out = 0.5 * _sp.erfc(-u / _SQRT2)
    return out if out.ndim else float(out)


def gaussian_sf(u):
    """Phi(-u), the upper tail."""
    return gaussian_cdf(-np.asarray(u, dtype=float))


def _check_unit_interval(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise DomainError("Legendre argument must lie in [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def legendre(n: int, x):
    """P_n(x) by Bonnet's recurrence."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    x = _check_unit_interval(x)
    p_prev, p = np.zeros_like(x), np.ones_like(x)
    for j in range(1, n + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    return p if p.ndim else float(p)


def legendre_table(n: int, x) -> np.ndarray:
    """Normalised associated Legendre functions of degrees n and n - 1.

    Returns an array of shape (2, n + 1, *x.shape); ``out[0, m]`` holds degree n
    and ``out[1, m]`` degree n - 1 (zero where m > n - 1).  Each column m is
    built by the standard upward recurrence in degree starting from the
    sectoral value P_mm.
    """
    if n < 0:
        raise DomainError("degree must be non-negative")
    x = _check_unit_interval(x)
    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    out = np.zeros((2, n + 1) + x.shape)
    pmm = np.full_like(x, math.sqrt(1.0 / (4.0 * math.pi)))
    for m in range(n + 1):
        if m > 0:
            pmm = -math.sqrt((2 * m + 1) / (2.0 * m)) * s * pmm
        p_lm2 = np.zeros_like(x)
        p_lm1 = pmm
        for l in range(m + 1, n + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            p_l = a * (x * p_lm1 - b * p_lm2)
            p_lm2, p_lm1 = p_lm1, p_l
        # p_lm1 is degree n, p_lm2 degree n - 1 (or the zero seed when m == n)
        out[0, m] = p_lm1
        if m < n:
            out[1, m] = p_lm2
    return out


def associated_legendre(n: int, m: int, x):
    if not 0 <= m <= n:
        raise DomainError(f"need 0 <= m <= n, got n={n}, m={m}")
    out = legendre_table(n, x)[0, m]
    return out if out.ndim else float(out)


def bessel_j0(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("bessel_j0 is defined here for x >= 0")
    out = _sp.j0(x)
    return out if out.ndim else float(out)
