import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lkwaves.errors import PolarExclusion, ResolutionTooLow
from lkwaves.lattice import enumerate_frequencies
from lkwaves.sampler import (
    WaveSpec,
    covariance_theoretical,
    default_resolution,
    evaluate_sphere,
    evaluate_torus,
    load_field,
    min_torus_resolution,
    sample,
    sample_sphere,
    sample_torus,
    save_field,
)
from lkwaves.special import bessel_j0, legendre

TORUS_NS = [5, 10, 13, 25, 65]


def test_determinism_and_independence():
    fs = enumerate_frequencies(25)
    a = sample_torus(fs, 7, 32)
    b = sample_torus(fs, 7, 32)
    c = sample_torus(fs, 7, 32, replicate=1)
    for name in ("f", "d1", "d22"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert not np.allclose(a.f, c.f)
    s1 = sample(WaveSpec("sphere", 6, 3, 2))
    s2 = sample(WaveSpec("sphere", 6, 3, 2))
    assert np.array_equal(s1.f, s2.f)


def test_imaginary_residue():
    for n in TORUS_NS:
        g = sample(WaveSpec("torus", n, 1))
        assert g.meta["imag_residue"] < 1e-12


def test_resolution_floor():
    assert min_torus_resolution(25) == 21
    assert min_torus_resolution(26) == 25
    with pytest.raises(ResolutionTooLow):
        sample_torus(enumerate_frequencies(25), 0, 20)
    with pytest.raises(ResolutionTooLow):
        sample_sphere(10, 0, (30, 60))


def test_pointwise_evaluation_matches_grid():
    fs = enumerate_frequencies(13)
    g = sample_torus(fs, 4, 24, replicate=3)
    X1, X2 = np.meshgrid(g.x1, g.x2, indexing="ij")
    vals = evaluate_torus(fs, 4, np.stack([X1, X2], axis=-1), replicate=3)
    assert np.max(np.abs(vals - g.f)) < 1e-12
    s = sample(WaveSpec("sphere", 7, 2, 1))
    T, P = np.meshgrid(s.x1, s.x2, indexing="ij")
    assert np.max(np.abs(evaluate_sphere(7, 2, T.ravel(), P.ravel(), 1).reshape(T.shape) - s.f)) < 1e-12


@pytest.mark.parametrize("n", TORUS_NS)
def test_torus_pathwise_identities(n):
    g = sample(WaveSpec("torus", n, 9))
    lam = g.eigenvalue
    assert np.max(np.abs(g.d11 + g.d22 + lam * g.f)) / lam < 1e-10
    grad2 = g.integrate(g.d1**2 + g.d2**2)
    assert grad2 == pytest.approx(lam * g.integrate(g.f**2), rel=1e-10)
    assert abs(g.integrate(g.f)) < 1e-10
    # integration by parts twice: int f12^2 = int f11 f22
    assert g.integrate(g.d12**2) == pytest.approx(g.integrate(g.d11 * g.d22), rel=1e-10)


@pytest.mark.parametrize("n", [2, 5, 12])
def test_sphere_pathwise_identities(n):
    g = sample(WaveSpec("sphere", n, 3))
    lam = g.eigenvalue
    assert g.weights.sum() == pytest.approx(4 * math.pi, rel=1e-13)
    assert np.max(np.abs(g.d11 + g.d22 + lam * g.f)) / lam < 1e-10
    assert g.integrate(g.d1**2 + g.d2**2) == pytest.approx(lam * g.integrate(g.f**2), rel=1e-10)
    assert abs(g.integrate(g.f)) < 1e-10


def test_sphere_derivatives_against_finite_differences():
    n, seed, h = 9, 5, 1e-5

    def f(t, p):
        return float(evaluate_sphere(n, seed, t, p)[0])

    g = sample_sphere(n, seed, (36, 36))
    # evaluate the sampled derivatives at a grid node, then compare with differences there
    i, j = 17, 5
    t, p = g.x1[i], g.x2[j]
    ft = (f(t + h, p) - f(t - h, p)) / (2 * h)
    fp = (f(t, p + h) - f(t, p - h)) / (2 * h)
    ftt = (f(t + h, p) - 2 * f(t, p) + f(t - h, p)) / h**2
    assert g.d1[i, j] == pytest.approx(ft, abs=1e-6)
    assert g.d2[i, j] == pytest.approx(fp / math.sin(t), abs=1e-6)
    assert g.d11[i, j] == pytest.approx(ftt, abs=1e-3)


def test_polar_exclusion_warns_and_renormalises():
    with pytest.warns(PolarExclusion):
        g = sample_sphere(2, 0, (1700, 8), quadrature="midpoint")
    assert g.meta["excluded_polar_rows"] > 0
    assert g.weights.sum() == pytest.approx(4 * math.pi, rel=1e-12)


def test_covariance_kernel_examples():
    assert covariance_theoretical("torus", 5, (0.2, 0.3), (0.2, 0.3)) == pytest.approx(1.0)
    assert covariance_theoretical("torus", 1, (0.5, 0.0), (0.0, 0.0)) == pytest.approx(0.0, abs=1e-15)
    assert covariance_theoretical("sphere", 2, (0.0, 0.0), (math.pi / 2, 0.0)) == pytest.approx(-0.5)


def test_torus_variance_over_nodes_and_replicates():
    vals = np.concatenate([sample(WaveSpec("torus", 25, 2, r)).f.ravel() for r in range(2000)])
    assert vals.var() == pytest.approx(1.0, abs=0.05)


def test_sphere_empirical_covariance():
    R, n = 2000, 10
    rng = np.random.default_rng(0)
    pairs = [((rng.uniform(0.2, 3.0), rng.uniform(0, 6.2)), (rng.uniform(0.2, 3.0), rng.uniform(0, 6.2))) for _ in range(5)]
    theta = np.array([p[0][0] for p in pairs] + [p[1][0] for p in pairs])
    phi = np.array([p[0][1] for p in pairs] + [p[1][1] for p in pairs])
    F = np.array([evaluate_sphere(n, 1, theta, phi, r) for r in range(R)])
    emp = (F[:, :5] * F[:, 5:]).mean(axis=0)
    theo = [covariance_theoretical("sphere", n, x, y) for x, y in pairs]
    assert np.max(np.abs(emp - theo)) < 0.08
    assert np.max(np.abs(F.var(axis=0) - 1.0)) < 0.1


def test_torus_empirical_covariance_and_stationarity():
    R, n = 2000, 13
    fs = enumerate_frequencies(n)
    lag = np.array([0.07, 0.03])
    base = np.array([[0.1, 0.2], [0.6, 0.85]])
    pts = np.vstack([base, base + lag])
    F = np.array([evaluate_torus(fs, 3, pts, r) for r in range(R)])
    c1, c2 = (F[:, 0] * F[:, 2]).mean(), (F[:, 1] * F[:, 3]).mean()
    theo = covariance_theoretical("torus", n, base[0] + lag, base[0])
    tol = 3 / math.sqrt(R)
    assert abs(c1 - theo) < tol and abs(c2 - theo) < tol
    assert abs(c1 - c2) < 2 * tol


def test_berry_scaling():
    n, R = 325, 2000
    fs = enumerate_frequencies(n)
    d = np.array([0.5, 1.0, 2.0, 3.0, 5.0])
    direction = np.array([math.cos(0.4), math.sin(0.4)])
    x0 = np.array([0.3, 0.1])
    pts = np.vstack([x0] + [x0 + di / (2 * math.pi * math.sqrt(n)) * direction for di in d])
    F = np.array([evaluate_torus(fs, 1, pts, r) for r in range(R)])
    emp = (F[:, :1] * F[:, 1:]).mean(axis=0)
    assert np.max(np.abs(emp - bessel_j0(d))) < 0.1


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.floats(0, math.pi), st.floats(0, math.pi))
def test_sphere_kernel_is_legendre(n, t1, t2):
    c = covariance_theoretical("sphere", n, (t1, 0.3), (t2, 0.3))
    assert c == pytest.approx(float(legendre(n, math.cos(t1 - t2))), abs=1e-12)


@pytest.mark.parametrize("suffix", [".csv", ".npz"])
@pytest.mark.parametrize("manifold,n", [("torus", 25), ("sphere", 6)])
def test_field_roundtrip(tmp_path, suffix, manifold, n):
    g = sample(WaveSpec(manifold, n, 12, 1))
    back = load_field(save_field(g, tmp_path / f"field{suffix}"))
    assert back.spec == g.spec
    for name in ("x1", "x2", "f", "d1", "d2", "d11", "d12", "d22", "weights"):
        assert np.array_equal(getattr(back, name), getattr(g, name))
    assert back.meta.get("pole_values") == g.meta.get("pole_values")


def test_default_resolution():
    assert default_resolution("torus", 1) == 8
    assert default_resolution("torus", 1, points_per_wavelength=2) == min_torus_resolution(1)
    m = default_resolution("torus", 1105)
    assert m >= 8 * math.sqrt(1105)
    mt, mp = default_resolution("sphere", 50)
    assert mt >= 200 and mp >= 2 * mt - 1


@pytest.mark.parametrize("n,shift", [(5, (16, 16)), (10, (16, 0)), (25, (16, 16)), (8, (8, 0))])
def test_half_period_antisymmetry(n, shift):
    """Every torus eigenfunction changes sign under some translation; on an even grid
    this makes the excursion area at u = 0 exactly one half."""
    g = sample_torus(enumerate_frequencies(n), 3, 32)
    assert np.max(np.abs(np.roll(g.f, shift, axis=(0, 1)) + g.f)) < 1e-12
    assert float(np.sum(g.weights[g.f >= 0])) == pytest.approx(0.5, abs=1e-15)
