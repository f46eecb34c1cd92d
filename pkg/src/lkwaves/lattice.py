"""Lattice points on circles: the frequency sets of arithmetic random waves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotRepresentable


@dataclass(frozen=True)
class FrequencySet:
    """All xi in Z^2 with |xi|^2 = n, sorted lexicographically."""

    n: int
    points: tuple[tuple[int, int], ...]
    mu4: float

    @property
    def multiplicity(self) -> int:
        return len(self.points)

    @property
    def eigenvalue(self) -> float:
        return 4.0 * math.pi**2 * self.n

    @property
    def epc_degenerate(self) -> bool:
        # mu4 = 1 kills kappa_4, mu4 = -1 kills kappa_5
        return abs(self.mu4) == 1.0

    def representatives(self) -> list[tuple[int, int]]:
        """One point per {xi, -xi} orbit: xi1 > 0, or xi1 == 0 and xi2 > 0."""
        return [p for p in self.points if p[0] > 0 or (p[0] == 0 and p[1] > 0)]


def lattice_points(n: int) -> list[tuple[int, int]]:
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    r = math.isqrt(n)
    pts = []
    for a in range(-r, r + 1):
        b2 = n - a * a
        b = math.isqrt(b2)
        if b * b == b2:
            pts.append((a, -b))
            if b:
                pts.append((a, b))
    return sorted(pts)


def is_representable(n: int) -> bool:
    return n >= 1 and bool(lattice_points(n))


def mu_hat4_exact(n: int, points) -> Fraction:
    """(1/N) sum cos(4 theta_xi) as an exact rational, via cos 4t = 8c^4 - 8c^2 + 1."""
    total = Fraction(0)
    for a, _ in points:
        c2 = Fraction(a * a, n)
        total += 8 * c2 * c2 - 8 * c2 + 1
    return total / len(points)


def mu_hat4_float(points) -> float:
    """Floating-point (1/N) sum cos(4 theta_xi); used to cross-check the exact path."""
    return math.fsum(math.cos(4.0 * math.atan2(b, a)) for a, b in points) / len(points)


def enumerate_frequencies(n: int) -> FrequencySet:
    """Return the frequency set Lambda_n.

    Raises NotRepresentable when n is not a sum of two squares.
    """
    pts = lattice_points(n)
    if not pts:
        raise NotRepresentable(f"{n} is not a sum of two squares")
    return FrequencySet(n=n, points=tuple(pts), mu4=float(mu_hat4_exact(n, pts)))


def mu_hat4(fs: FrequencySet) -> float:
    return float(mu_hat4_exact(fs.n, fs.points))
