import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lkwaves.errors import NotRepresentable
from lkwaves.lattice import (
    enumerate_frequencies,
    is_representable,
    lattice_points,
    mu_hat4,
    mu_hat4_exact,
    mu_hat4_float,
)


def brute_points(n):
    r = math.isqrt(n) + 1
    return sorted((a, b) for a in range(-r, r + 1) for b in range(-r, r + 1) if a * a + b * b == n)


def rational_mu4(points):
    # cos 4 theta = Re((a + ib)^4) / n^2, independent of the production formula
    n = points[0][0] ** 2 + points[0][1] ** 2
    total = sum(Fraction((complex(a, b) ** 4).real).limit_denominator(1) for a, b in points)
    return total / (len(points) * n * n)


def test_small_cases():
    fs = enumerate_frequencies(1)
    assert set(fs.points) == {(1, 0), (0, 1), (-1, 0), (0, -1)}
    assert fs.multiplicity == 4
    assert fs.mu4 == 1.0 and fs.epc_degenerate
    with pytest.raises(NotRepresentable):
        enumerate_frequencies(3)
    fs25 = enumerate_frequencies(25)
    assert fs25.multiplicity == 12
    expected = {(5, 0), (-5, 0), (0, 5), (0, -5)} | {(s * 3, t * 4) for s in (1, -1) for t in (1, -1)}
    expected |= {(s * 4, t * 3) for s in (1, -1) for t in (1, -1)}
    assert set(fs25.points) == expected


def test_mu4_examples():
    assert mu_hat4_exact(5, lattice_points(5)) == Fraction(-7, 25)
    assert mu_hat4_exact(25, lattice_points(25)) == Fraction(-143, 625)
    assert abs(mu_hat4(enumerate_frequencies(25)) - (-143 / 625)) < 1e-12


@pytest.mark.parametrize("n,mu", [(1, 1), (4, 1), (9, 1), (2, -1), (8, -1)])
def test_degenerate_measures(n, mu):
    fs = enumerate_frequencies(n)
    assert fs.mu4 == mu and fs.epc_degenerate


def test_brute_force_up_to_1000():
    for n in range(1, 1001):
        pts = brute_points(n)
        assert is_representable(n) == bool(pts)
        if pts:
            assert lattice_points(n) == pts


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=10_000))
def test_mu4_rational_matches_float(n):
    if not is_representable(n):
        with pytest.raises(NotRepresentable):
            enumerate_frequencies(n)
        return
    pts = lattice_points(n)
    exact = mu_hat4_exact(n, pts)
    assert exact == rational_mu4(pts)
    assert abs(float(exact) - mu_hat4_float(pts)) < 1e-12
    assert abs(exact) <= 1


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=10_000))
def test_lattice_symmetry(n):
    pts = set(lattice_points(n))
    for a, b in pts:
        assert {(-a, b), (a, -b), (b, a)} <= pts
    if pts:
        fs = enumerate_frequencies(n)
        reps = fs.representatives()
        assert 2 * len(reps) == fs.multiplicity
        assert {(-a, -b) for a, b in reps}.isdisjoint(reps)
