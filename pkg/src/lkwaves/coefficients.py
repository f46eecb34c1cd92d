"""Closed-form coefficients of the chaos expansions and reduction formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple

from .errors import EpcDegenerate, OddIndex
from .lattice import FrequencySet, enumerate_frequencies
from .special import gaussian_pdf, gaussian_sf, hermite

SQRT_PI_OVER_2 = math.sqrt(math.pi / 2.0)
MAX_ALPHA_INDEX = 16


class Manifold(str, Enum):
    TORUS = "torus"
    SPHERE = "sphere"


def eigenvalue(manifold: Manifold | str, n: int) -> float:
    manifold = Manifold(manifold)
    if manifold is Manifold.TORUS:
        return 4.0 * math.pi**2 * n
    return float(n * (n + 1))


def area(manifold: Manifold | str) -> float:
    return 1.0 if Manifold(manifold) is Manifold.TORUS else 4.0 * math.pi


def gamma_coeff(q: int, u: float) -> float:
    """Excursion-area coefficient; q = 0 gives the mean 1 - Phi(u)."""
    if q < 0:
        raise ValueError("q must be non-negative")
    if q == 0:
        return gaussian_sf(u)
    return hermite(q - 1, u) * gaussian_pdf(u)


def beta_coeff(l: int, u: float) -> float:
    """Hermite coefficient of the Dirac mass at u."""
    return hermite(l, u) * gaussian_pdf(u)


def p_poly(N: int, x: Fraction) -> Fraction:
    total = Fraction(0)
    for j in range(N + 1):
        swing = Fraction(math.factorial(2 * j + 1), math.factorial(j) ** 2)
        total += (-1) ** (j + N) * math.comb(N, j) * swing * x**j
    return total


def alpha_exact(two_n: int, two_m: int) -> Fraction:
    """alpha_{2n,2m} / sqrt(pi/2) as an exact rational."""
    if two_n % 2 or two_m % 2:
        raise OddIndex(f"alpha indices must be even, got ({two_n}, {two_m})")
    if not (0 <= two_n <= MAX_ALPHA_INDEX and 0 <= two_m <= MAX_ALPHA_INDEX):
        raise ValueError(f"alpha indices must lie in [0, {MAX_ALPHA_INDEX}]")
    n, m = two_n // 2, two_m // 2
    ratio = Fraction(
        math.factorial(two_n) * math.factorial(two_m),
        math.factorial(n) * math.factorial(m) * 2 ** (n + m),
    )
    return ratio * p_poly(n + m, Fraction(1, 4))


def alpha_coeff(two_n: int, two_m: int) -> float:
    """Hermite coefficient E[|Z| H_{2n}(Z1) H_{2m}(Z2)] of the Euclidean norm in R^2."""
    return SQRT_PI_OVER_2 * float(alpha_exact(two_n, two_m))


@dataclass(frozen=True)
class KappaSet:
    manifold: Manifold
    n: int
    eigenvalue: float
    kappa: tuple[float, float, float, float, float]
    mu4: float | None = None

    def __getitem__(self, i: int) -> float:
        """1-based access, kappa_set[3] is kappa_3."""
        return self.kappa[i - 1]


def _torus_kappas(lam: float, mu: float) -> tuple[float, ...]:
    r = lam / (2.0 * math.sqrt(2.0))
    return (
        math.sqrt(lam / 2.0),
        r * (1.0 - mu) / math.sqrt(3.0 + mu),
        r * math.sqrt(3.0 + mu),
        r * math.sqrt(1.0 - mu),
        lam * math.sqrt(1.0 + mu) / math.sqrt(3.0 + mu),
    )


def _sphere_kappas(lam: float) -> tuple[float, ...]:
    s2 = 2.0 * math.sqrt(2.0)
    return (
        math.sqrt(lam) / math.sqrt(2.0),
        math.sqrt(lam) * (lam + 2.0) / (s2 * math.sqrt(3.0 * lam - 2.0)),
        math.sqrt(lam) * math.sqrt(3.0 * lam - 2.0) / s2,
        math.sqrt(lam) * math.sqrt(lam - 2.0) / s2,
        lam * math.sqrt(lam - 2.0) / math.sqrt(3.0 * lam - 2.0),
    )


def kappa_set(manifold: Manifold | str, n: int | FrequencySet, strict: bool = True) -> KappaSet:
    """Standard deviations used to normalise first and second derivatives.

    On the torus, ``strict`` raises EpcDegenerate when |mu_hat(4)| = 1, where
    kappa_4 or kappa_5 vanishes.
    """
    manifold = Manifold(manifold)
    if manifold is Manifold.TORUS:
        fs = n if isinstance(n, FrequencySet) else enumerate_frequencies(n)
        if strict and fs.epc_degenerate:
            raise EpcDegenerate(f"mu_hat_{fs.n}(4) = {fs.mu4:g}")
        lam = fs.eigenvalue
        return KappaSet(manifold, fs.n, lam, _torus_kappas(lam, fs.mu4), fs.mu4)
    if n < 2:
        raise ValueError("sphere kappas need n >= 2")
    lam = eigenvalue(manifold, n)
    return KappaSet(manifold, n, lam, _sphere_kappas(lam))


class HCoeffs(NamedTuple):
    h1: float
    h2: float
    h3: float
    h4: float
    h5: float
    h35: float


def h_coeffs(n: int | FrequencySet, u: float) -> HCoeffs:
    """Second-chaos EPC coefficients on the torus."""
    fs = n if isinstance(n, FrequencySet) else enumerate_frequencies(n)
    if fs.epc_degenerate:
        raise EpcDegenerate(f"mu_hat_{fs.n}(4) = {fs.mu4:g}")
    lam, mu = fs.eigenvalue, fs.mu4
    phi, tail = gaussian_pdf(u), gaussian_sf(u)
    c = lam / (4.0 * math.pi)
    h1 = -c * u * phi
    h3 = c * (2.0 * u * (1.0 + u * u) * phi / (3.0 + mu) + tail * (1.0 - mu))
    h4 = -c * (1.0 - mu) * tail
    h5 = c * u * (1.0 + u * u) * (1.0 + mu) * phi / (3.0 + mu)
    h35 = (
        lam / (2.0 * math.sqrt(2.0) * math.pi) * math.sqrt(1.0 + mu)
        * (u * phi * (1.0 + u * u) + (3.0 + mu) * tail) / (3.0 + mu)
    )
    return HCoeffs(h1, h1, h3, h4, h5, h35)


class CollapseConstants(NamedTuple):
    """Coefficients of int f11 f22, int f11^2, int f22^2, int |grad f|^2 and the constant."""

    A: float
    B: float
    C: float
    D: float
    E: float


def collapse_assembled(n: int | FrequencySet, u: float) -> tuple[CollapseConstants, CollapseConstants]:
    """A..E built from the h's and kappas, plus the magnitude of their largest summand.

    The second tuple gives, per constant, the largest absolute summand; it is
    the natural scale for judging cancellation where the closed form is zero.
    """
    fs = n if isinstance(n, FrequencySet) else enumerate_frequencies(n)
    h = h_coeffs(fs, u)
    k = kappa_set(Manifold.TORUS, fs)
    k1, k2, k3, k4, k5 = k.kappa
    a_terms = (h.h35 / (k3 * k5), h.h4 / (2.0 * k4**2), -k2 * h.h5 / (k3 * k5**2))
    b_terms = (h.h3 / (2.0 * k3**2), -k2 * h.h35 / (k3**2 * k5), k2**2 * h.h5 / (2.0 * k3**2 * k5**2))
    c_terms = (h.h5 / (2.0 * k5**2),)
    d_terms = (h.h1 / (2.0 * k1**2),)
    e_terms = (h.h1, h.h3 / 2.0, h.h4 / 2.0, h.h5 / 2.0)
    groups = (a_terms, b_terms, c_terms, d_terms, e_terms)
    values = CollapseConstants(*(math.fsum(g) for g in groups))
    scales = CollapseConstants(*(max(abs(t) for t in g) for g in groups))
    return values, scales


def collapse_closed_form(n: int | FrequencySet, u: float) -> CollapseConstants:
    fs = n if isinstance(n, FrequencySet) else enumerate_frequencies(n)
    lam = fs.eigenvalue
    g = u * gaussian_pdf(u) * (1.0 + u * u)
    return CollapseConstants(
        A=g / (4.0 * lam * math.pi),
        B=g / (8.0 * lam * math.pi),
        C=g / (8.0 * lam * math.pi),
        D=-u * gaussian_pdf(u) / (4.0 * math.pi),
        E=lam / (8.0 * math.pi) * hermite(1, u) * hermite(2, u) * gaussian_pdf(u),
    )


@dataclass(frozen=True)
class ReductionConstants:
    u: float
    c0: float
    c1: float
    c2: float

    def __getitem__(self, k: int) -> float:
        return (self.c0, self.c1, self.c2)[k]


def reduction_constants(u: float) -> ReductionConstants:
    phi = gaussian_pdf(u)
    h1, h2 = hermite(1, u), hermite(2, u)
    return ReductionConstants(
        u=u,
        c0=0.5 * h1 * h2 * phi / (2.0 * math.pi),
        c1=0.5 * math.sqrt(math.pi / 8.0) * h1**2 * phi,
        c2=0.5 * h1 * phi,
    )


def reduced_scale(k: int, lam: float) -> float:
    """(sqrt(lambda/2))^(2-k), the eigenvalue factor of the reduced second chaos."""
    return math.sqrt(lam / 2.0) ** (2 - k)


def all_coefficients(manifold: Manifold | str, n: int, u: float) -> dict[str, float]:
    """Every coefficient defined for (manifold, n, u), flattened for reporting."""
    manifold = Manifold(manifold)
    lam = eigenvalue(manifold, n)
    out: dict[str, float] = {"lambda": lam}
    if manifold is Manifold.TORUS:
        fs = enumerate_frequencies(n)
        out["multiplicity"] = float(fs.multiplicity)
        out["mu4"] = fs.mu4
    for q in range(5):
        out[f"gamma_{q}"] = gamma_coeff(q, u)
        out[f"beta_{q}"] = beta_coeff(q, u)
    for a in range(0, 6, 2):
        for b in range(0, 6 - a, 2):
            out[f"alpha_{a}_{b}"] = alpha_coeff(a, b)
    rc = reduction_constants(u)
    out.update(c0=rc.c0, c1=rc.c1, c2=rc.c2)
    degenerate = manifold is Manifold.TORUS and fs.epc_degenerate
    if not degenerate and (manifold is Manifold.TORUS or n >= 2):
        ks = kappa_set(manifold, fs if manifold is Manifold.TORUS else n)
        out.update({f"kappa_{i}": v for i, v in enumerate(ks.kappa, start=1)})
        if manifold is Manifold.TORUS:
            out.update(h_coeffs(fs, u)._asdict())
            out.update({k: v for k, v in collapse_assembled(fs, u)[0]._asdict().items()})
    return out
