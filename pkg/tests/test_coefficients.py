import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from scipy.special import roots_genlaguerre
from hypothesis import given, settings, strategies as st

from lkwaves.coefficients import (
    all_coefficients,
    alpha_coeff,
    alpha_exact,
    beta_coeff,
    collapse_assembled,
    collapse_closed_form,
    gamma_coeff,
    h_coeffs,
    kappa_set,
    reduction_constants,
)
from lkwaves.errors import EpcDegenerate, OddIndex
from lkwaves.lattice import enumerate_frequencies
from lkwaves.special import gaussian_pdf, hermite

LEVELS = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)


def norm_hermite_moment(a, b):
    """E[|Z| H_a(Z1) H_b(Z2)] in polar coordinates, exact for these polynomial integrands.

    Angle: trapezoid rule on 64 nodes. Radius: s = r^2 / 2 turns r^2 exp(-r^2/2) dr
    into sqrt(2) s^(1/2) exp(-s) ds, integrated by generalised Gauss-Laguerre.
    """
    s, w = roots_genlaguerre(40, 0.5)
    r = np.sqrt(2.0 * s)[:, None]
    t = 2.0 * np.pi * np.arange(64) / 64
    ang = np.mean(hermite(a, r * np.cos(t)) * hermite(b, r * np.sin(t)), axis=1)
    return math.sqrt(2.0) * float(np.sum(w * ang))


def test_gamma_beta_examples():
    assert gamma_coeff(2, 0.0) == 0.0
    assert gamma_coeff(1, 0.0) == pytest.approx(0.3989422804, abs=1e-10)
    assert gamma_coeff(0, 0.0) == 0.5
    assert beta_coeff(1, 0.0) == 0.0
    assert beta_coeff(2, 1.0) == 0.0
    assert beta_coeff(0, 1.0) == pytest.approx(0.2419707245, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.floats(-5, 5))
def test_gamma_is_shifted_beta(q, u):
    assert gamma_coeff(q, u) == beta_coeff(q - 1, u)


def test_alpha_examples():
    assert alpha_coeff(0, 0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-15)
    assert alpha_coeff(2, 0) == pytest.approx(math.sqrt(math.pi / 2) / 2, rel=1e-15)
    assert alpha_exact(0, 0) == 1 and alpha_exact(2, 0) == Fraction(1, 2)
    with pytest.raises(OddIndex):
        alpha_coeff(1, 0)


@pytest.mark.parametrize("a,b", [(0, 0), (2, 0), (0, 2), (2, 2), (4, 0), (4, 2), (6, 0), (2, 4)])
def test_alpha_against_polar_quadrature(a, b):
    assert alpha_coeff(a, b) == pytest.approx(norm_hermite_moment(a, b), rel=1e-12, abs=1e-14)


def test_alpha_symmetric():
    for a in range(0, 12, 2):
        for b in range(0, 12, 2):
            assert alpha_exact(a, b) == alpha_exact(b, a)


def test_boundary_prefactor_symbolic():
    """Re-derive alpha_00, alpha_20 and the second-chaos boundary coefficient symbolically.

    With int (H2(d1 f / s) + H2(d2 f / s)) = 2 int H2(f) (Green, s^2 = lambda / 2) the
    derivative form collapses to one multiple of int H2(f); it must equal c1.
    """
    r, t, u = sp.symbols("r t u", real=True)
    w = sp.exp(-r**2 / 2) / (2 * sp.pi)
    a00 = sp.integrate(sp.integrate(r * w * r, (r, 0, sp.oo)), (t, 0, 2 * sp.pi))
    h2 = (r * sp.cos(t)) ** 2 - 1
    a20 = sp.integrate(sp.integrate(sp.expand(r * h2 * w * r), (r, 0, sp.oo)), (t, 0, 2 * sp.pi))
    assert sp.simplify(a00 - sp.sqrt(sp.pi / 2)) == 0
    assert sp.simplify(a20 - sp.sqrt(sp.pi / 2) / 2) == 0
    phi = sp.exp(-u**2 / 2) / sp.sqrt(2 * sp.pi)
    beta0, beta2 = phi, (u**2 - 1) * phi
    coeff = sp.Rational(1, 2) * (beta2 * a00 / 2 + beta0 * a20 / 2 * 2)
    c1 = sp.Rational(1, 2) * sp.sqrt(sp.pi / 8) * u**2 * phi
    assert sp.simplify(coeff - c1) == 0
    for uv in LEVELS:
        assert float(coeff.subs(u, uv)) == pytest.approx(reduction_constants(uv).c1, rel=1e-14, abs=1e-300)


def test_kappa_examples():
    assert kappa_set("torus", 25)[1] == pytest.approx(math.pi * math.sqrt(50), rel=1e-14)
    assert kappa_set("sphere", 2)[1] == pytest.approx(math.sqrt(3), rel=1e-15)
    with pytest.raises(EpcDegenerate):
        kappa_set("torus", 1)
    with pytest.raises(EpcDegenerate):
        h_coeffs(2, 0.5)


@pytest.mark.parametrize("n", [5, 13, 25, 65, 325])
def test_torus_kappas_from_lattice_moments(n):
    """kappas are derivative standard deviations computed from spectral moments."""
    fs = enumerate_frequencies(n)
    xi = 2 * math.pi * np.array(fs.points, dtype=float)
    k1, k2, k3, k4, k5 = kappa_set("torus", fs).kappa
    assert k1**2 == pytest.approx(np.mean(xi[:, 0] ** 2), rel=1e-12)
    assert k3**2 == pytest.approx(np.mean(xi[:, 0] ** 4), rel=1e-12)
    assert k4**2 == pytest.approx(np.mean(xi[:, 0] ** 2 * xi[:, 1] ** 2), rel=1e-12)
    assert k2 * k3 == pytest.approx(np.mean(xi[:, 0] ** 2 * xi[:, 1] ** 2), rel=1e-12)
    assert k2**2 + k5**2 == pytest.approx(np.mean(xi[:, 1] ** 4), rel=1e-12)


def test_h_examples():
    for n in (5, 25, 65):
        assert h_coeffs(n, 0.0).h1 == 0.0
        assert abs(h_coeffs(n, 40.0).h4) < 1e-300
    assert h_coeffs(25, 1.0).h1 == pytest.approx(-25 * math.pi * gaussian_pdf(1.0), rel=1e-14)
    assert h_coeffs(25, 1.0).h1 == pytest.approx(-19.00434, abs=1e-5)


@pytest.mark.parametrize("n", [5, 25, 65])
@pytest.mark.parametrize("u", [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
def test_collapse(n, u):
    assembled, scales = collapse_assembled(n, u)
    closed = collapse_closed_form(n, u)
    for a, s, c in zip(assembled, scales, closed):
        assert abs(a - c) <= 1e-12 * max(abs(c), s)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([5, 10, 13, 17, 25, 29, 50, 65, 85, 325, 1105]), st.floats(-4, 4))
def test_collapse_property(n, u):
    assembled, scales = collapse_assembled(n, u)
    closed = collapse_closed_form(n, u)
    for a, s, c in zip(assembled, scales, closed):
        assert abs(a - c) <= 1e-12 * max(abs(c), s, 1e-300)


def test_reduction_constants():
    rc0 = reduction_constants(0.0)
    assert (rc0.c0, rc0.c1, rc0.c2) == (0.0, 0.0, 0.0)
    assert reduction_constants(1.0).c0 == 0.0
    assert reduction_constants(-1.0).c0 == 0.0
    assert reduction_constants(1.0).c2 == pytest.approx(0.1209854, abs=1e-7)


def test_cancellation_levels_on_dense_grid():
    grid = np.linspace(-4, 4, 8001)
    zeros = {0.0, 1.0, -1.0}
    for u in grid:
        u = float(round(u, 6))
        rc = reduction_constants(u)
        assert (rc.c0 == 0.0) == (u in zeros)
        assert (rc.c1 == 0.0) == (u == 0.0)
        assert (rc.c2 == 0.0) == (u == 0.0)


def test_all_coefficients_keys():
    t = all_coefficients("torus", 5, 1.0)
    assert {"kappa_5", "h35", "A", "E", "c0"} <= set(t)
    s = all_coefficients("sphere", 10, 1.0)
    assert "kappa_4" in s and "h1" not in s
    degenerate = all_coefficients("torus", 1, 1.0)
    assert "kappa_1" not in degenerate
