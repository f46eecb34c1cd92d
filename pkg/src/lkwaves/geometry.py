"""Lipschitz-Killing curvatures of excursion sets {f >= u} on a sampled grid.

L1 follows the half-length convention: it is one half of the geometric length
of the level curve {f = u}.  Double it to get the contour length.

The Euler characteristic is that of the piecewise-linear region traced by
marching squares (linear interpolation along edges, saddle cells resolved by
the bilinear centre value, centre == u counting as above).  For a region X
cut out of a cell complex by those rules,

    chi(X) = sum_faces chi(X & F) - sum_edges chi(X & E) + sum_vertices [v in X]

where every piece is a union of disjoint contractible sets, so each term is a
component count.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .coefficients import Manifold
from .errors import EpsTooSmallForGrid
from .sampler import FieldGrid


@dataclass(frozen=True)
class LkcEstimate:
    u: float
    L0: float
    L1: float
    L2: float
    estimator: str
    resolution: tuple[int, int]
    meta: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {
            "level": self.u,
            "L0": self.L0,
            "L1": self.L1,
            "L2": self.L2,
            "estimator": self.estimator,
            "resolution": "x".join(map(str, self.resolution)),
        }


def excursion_area(grid: FieldGrid, u: float) -> float:
    return float(np.sum(grid.weights[grid.f >= u]))


def _pole_values(grid: FieldGrid) -> tuple[float, float]:
    poles = grid.meta.get("pole_values")
    if poles is None:
        return float(grid.f[0].mean()), float(grid.f[-1].mean())
    return float(poles[0]), float(poles[1])


# ---------------------------------------------------------------- marching squares


def _cross(pa, pb, fa, fb, u):
    """Crossing point on segment pa-pb where the linear interpolant equals u (NaN if none)."""
    hit = (fa >= u) != (fb >= u)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(hit, (u - fa) / (fb - fa), np.nan)
    return pa + t[..., None] * (pb - pa)


def _seg_len(p, q, metric):
    d = q - p
    if metric is None:
        out = np.hypot(d[..., 0], d[..., 1])
    else:
        s = np.sin(0.5 * (p[..., 0] + q[..., 0]))
        out = np.hypot(d[..., 0], s * d[..., 1])
    return np.nan_to_num(out, nan=0.0)


def _quad_lengths(v00, v10, v11, v01, c00, c10, c11, c01, u, metric):
    """Contour length in quadrilateral cells given corner values and corner coordinates.

    Corner order: 00 -> 10 -> 11 -> 01 counter-clockwise; edges e0 = 00-10,
    e1 = 10-11, e2 = 01-11, e3 = 00-01.
    """
    e0 = _cross(c00, c10, v00, v10, u)
    e1 = _cross(c10, c11, v10, v11, u)
    e2 = _cross(c01, c11, v01, v11, u)
    e3 = _cross(c00, c01, v00, v01, u)
    edges = (e0, e1, e2, e3)
    has = [~np.isnan(e[..., 0]) for e in edges]
    count = sum(h.astype(int) for h in has)

    total = np.zeros(v00.shape)
    two = count == 2
    if two.any():
        for i in range(4):
            for j in range(i + 1, 4):
                sel = two & has[i] & has[j]
                if sel.any():
                    total[sel] += _seg_len(edges[i][sel], edges[j][sel], metric)
    four = count == 4
    if four.any():
        center_above = 0.25 * (v00 + v10 + v11 + v01) >= u
        b00 = v00 >= u
        # corners whose status differs from the centre are cut off on their own
        cut_10_01 = four & (center_above == b00)
        cut_00_11 = four & (center_above != b00)
        for sel, pairs in ((cut_10_01, ((0, 1), (2, 3))), (cut_00_11, ((0, 3), (1, 2)))):
            if sel.any():
                for i, j in pairs:
                    total[sel] += _seg_len(edges[i][sel], edges[j][sel], metric)
    return total


def _torus_corners(grid: FieldGrid):
    f = grid.f
    M1, M2 = f.shape
    v00 = f
    v10 = np.roll(f, -1, axis=0)
    v01 = np.roll(f, -1, axis=1)
    v11 = np.roll(v10, -1, axis=1)
    h1, h2 = 1.0 / M1, 1.0 / M2
    # local coordinates suffice for lengths
    c00 = np.zeros((1, 1, 2))
    c10 = np.array([h1, 0.0])[None, None, :]
    c01 = np.array([0.0, h2])[None, None, :]
    c11 = np.array([h1, h2])[None, None, :]
    shape = f.shape + (2,)
    corners = tuple(np.broadcast_to(c, shape) for c in (c00, c10, c11, c01))
    return (v00, v10, v11, v01), corners


def _sphere_quad_corners(grid: FieldGrid):
    f = grid.f
    theta, phi = grid.x1, grid.x2
    phi_next = np.append(phi[1:], 2.0 * math.pi)
    v00, v01 = f[:-1], np.roll(f[:-1], -1, axis=1)
    v10, v11 = f[1:], np.roll(f[1:], -1, axis=1)
    T0, P0 = np.meshgrid(theta[:-1], phi, indexing="ij")
    T1, P1 = np.meshgrid(theta[1:], phi_next, indexing="ij")
    c00 = np.stack([T0, P0], axis=-1)
    c10 = np.stack([T1, P0], axis=-1)
    c11 = np.stack([T1, P1], axis=-1)
    c01 = np.stack([T0, P1], axis=-1)
    return (v00, v10, v11, v01), (c00, c10, c11, c01)


def _sphere_cap_triangles(grid: FieldGrid):
    """Yield (values, coords) for the north and south cap triangle fans."""
    f, theta, phi = grid.f, grid.x1, grid.x2
    phi_next = np.append(phi[1:], 2.0 * math.pi)
    north, south = _pole_values(grid)
    for row, apex_theta, apex_val in ((0, 0.0, north), (-1, math.pi, south)):
        va = np.full(phi.shape, apex_val)
        vb, vc = f[row], np.roll(f[row], -1)
        t = np.full(phi.shape, theta[row])
        # the apex takes the phi of whichever meridian edge it sits on
        ca_b = np.stack([np.full(phi.shape, apex_theta), phi], axis=-1)
        ca_c = np.stack([np.full(phi.shape, apex_theta), phi_next], axis=-1)
        cb = np.stack([t, phi], axis=-1)
        cc = np.stack([t, phi_next], axis=-1)
        yield (va, vb, vc), (ca_b, ca_c, cb, cc)


def boundary_length_marching(grid: FieldGrid, u: float) -> float:
    """Half the marching-squares length of the level curve {f = u}."""
    if grid.manifold is Manifold.TORUS:
        values, corners = _torus_corners(grid)
        return 0.5 * float(_quad_lengths(*values, *corners, u, metric=None).sum())
    values, corners = _sphere_quad_corners(grid)
    total = float(_quad_lengths(*values, *corners, u, metric="sphere").sum())
    for (va, vb, vc), (ca_b, ca_c, cb, cc) in _sphere_cap_triangles(grid):
        ab = _cross(ca_b, cb, va, vb, u)
        ac = _cross(ca_c, cc, va, vc, u)
        bc = _cross(cb, cc, vb, vc, u)
        for p, q in ((ab, bc), (ab, ac), (bc, ac)):
            total += float(_seg_len(p, q, "sphere").sum())
    return 0.5 * total


def grid_spacing(grid: FieldGrid) -> float:
    if grid.manifold is Manifold.TORUS:
        return 1.0 / min(grid.shape)
    return max(float(np.max(np.diff(grid.x1))), 2.0 * math.pi / grid.shape[1])


def boundary_length_eps(grid: FieldGrid, u: float, eps: float) -> float:
    """Band approximation 1/2 * int (1/2eps) 1{|f - u| <= eps} |grad f| dx."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    cells = 2.0 * eps / (math.sqrt(grid.eigenvalue) * grid_spacing(grid))
    if cells < 3.0:
        warnings.warn(
            f"band of half-width {eps:g} spans ~{cells:.1f} cells; refine the grid",
            EpsTooSmallForGrid,
            stacklevel=2,
        )
    band = np.abs(grid.f - u) <= eps
    grad = np.hypot(grid.d1[band], grid.d2[band])
    return 0.5 * float(np.sum(grid.weights[band] * grad)) / (2.0 * eps)


# ---------------------------------------------------------------- Euler characteristic


def _face_components(v00, v10, v11, v01, u):
    above = [v >= u for v in (v00, v10, v11, v01)]
    n_above = sum(a.astype(int) for a in above)
    diagonal = (n_above == 2) & (above[0] == above[2])
    center_below = 0.25 * (v00 + v10 + v11 + v01) < u
    comps = (n_above > 0).astype(int)
    comps[diagonal & center_below] = 2
    return comps


def euler_characteristic(grid: FieldGrid, u: float) -> int:
    f = grid.f
    up = f >= u
    if grid.manifold is Manifold.TORUS:
        (v00, v10, v11, v01), _ = _torus_corners(grid)
        faces = int(_face_components(v00, v10, v11, v01, u).sum())
        edges = int((up | np.roll(up, -1, axis=0)).sum() + (up | np.roll(up, -1, axis=1)).sum())
        return faces - edges + int(up.sum())

    (v00, v10, v11, v01), _ = _sphere_quad_corners(grid)
    faces = int(_face_components(v00, v10, v11, v01, u).sum())
    north, south = _pole_values(grid)
    verts = int(up.sum()) + int(north >= u) + int(south >= u)
    edges = int((up | np.roll(up, -1, axis=1)).sum())  # along parallels, wrapping in phi
    edges += int((up[:-1] | up[1:]).sum())  # along meridians
    for row, apex in ((0, north >= u), (-1, south >= u)):
        r = up[row]
        edges += int((r | apex).sum())
        faces += int((r | np.roll(r, -1) | apex).sum())
    return faces - edges + verts


# ---------------------------------------------------------------- bundle


def estimate_lkc(grid: FieldGrid, u: float, boundary: str = "marching", eps: float | None = None) -> LkcEstimate:
    if boundary == "marching":
        L1 = boundary_length_marching(grid, u)
        l1_name = "MarchingSquares"
    elif boundary == "eps":
        if eps is None:
            raise ValueError("eps estimator needs eps")
        L1 = boundary_length_eps(grid, u, eps)
        l1_name = "EpsilonApprox"
    else:
        raise ValueError(f"unknown boundary estimator {boundary!r}")
    l0_name = "CubicalComplex" if grid.manifold is Manifold.TORUS else "MeshComplex"
    meta = {"quadrature": grid.meta.get("quadrature")}
    if eps is not None:
        meta["eps"] = eps
    return LkcEstimate(
        u=float(u),
        L0=float(euler_characteristic(grid, u)),
        L1=L1,
        L2=excursion_area(grid, u),
        estimator=f"{l0_name}/{l1_name}",
        resolution=tuple(grid.shape),
        meta=meta,
    )
