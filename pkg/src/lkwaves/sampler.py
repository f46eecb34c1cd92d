"""Realisations of arithmetic random waves and random spherical harmonics.

Both samplers return a :class:`FieldGrid` holding the field, its analytic first
and second derivatives and quadrature weights.  On the torus the derivatives are
plain partial derivatives in the flat coordinates x1, x2.  On the sphere they are
expressed in the orthonormal frame (e_theta, e_phi / sin theta): ``d1`` is
d/dtheta, ``d2`` is (1/sin theta) d/dphi, and ``d11, d12, d22`` are the
covariant Hessian components in that frame, so ``d11 + d22 = -lambda f``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .coefficients import Manifold, area, eigenvalue
from .errors import IoFailure, PolarExclusion, ResolutionTooLow
from .lattice import FrequencySet, enumerate_frequencies
from .special import legendre, legendre_table

THETA_MIN = 1e-3
FIELD_NAMES = ("f", "d1", "d2", "d11", "d12", "d22")
CSV_COLUMNS = ("x1", "x2") + FIELD_NAMES + ("weight",)


@dataclass(frozen=True)
class WaveSpec:
    manifold: Manifold
    n: int
    seed: int
    replicate: int = 0

    def __post_init__(self):
        object.__setattr__(self, "manifold", Manifold(self.manifold))

    @property
    def eigenvalue(self) -> float:
        return eigenvalue(self.manifold, self.n)

    def rng(self) -> np.random.Generator:
        # one independent stream per (seed, replicate), regardless of run order
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.replicate,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class FieldGrid:
    spec: WaveSpec
    x1: np.ndarray
    x2: np.ndarray
    f: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d11: np.ndarray
    d12: np.ndarray
    d22: np.ndarray
    weights: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def manifold(self) -> Manifold:
        return self.spec.manifold

    @property
    def eigenvalue(self) -> float:
        return self.spec.eigenvalue

    @property
    def shape(self) -> tuple[int, int]:
        return self.f.shape

    @property
    def area(self) -> float:
        return area(self.manifold)

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * values))


def min_torus_resolution(n: int) -> int:
    return 4 * (math.isqrt(n - 1) + 1) + 1  # 4 * ceil(sqrt(n)) + 1


def default_resolution(manifold: Manifold | str, n: int, points_per_wavelength: float = 8.0):
    """Grid size giving ``points_per_wavelength`` nodes per 2 pi / sqrt(lambda)."""
    manifold = Manifold(manifold)
    wavelength = 2.0 * math.pi / math.sqrt(eigenvalue(manifold, n))
    if manifold is Manifold.TORUS:
        return max(math.ceil(points_per_wavelength / wavelength), min_torus_resolution(n))
    m_theta = max(math.ceil(points_per_wavelength * math.pi / wavelength), 4 * n)
    m_phi = max(math.ceil(points_per_wavelength * 2.0 * math.pi / wavelength), 4 * n)
    return (m_theta, m_phi)


# ---------------------------------------------------------------- torus


def torus_coefficients(fs: FrequencySet, spec: WaveSpec) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies (N, 2) and complex coefficients (N,) with a_{-xi} = conj(a_xi)."""
    reps = np.array(fs.representatives(), dtype=np.int64)
    g = spec.rng().standard_normal((len(reps), 2))
    a = (g[:, 0] + 1j * g[:, 1]) / math.sqrt(2.0)
    xi = np.concatenate([reps, -reps])
    return xi, np.concatenate([a, np.conj(a)])


def sample_torus(fs: FrequencySet, seed: int, resolution: int, replicate: int = 0) -> FieldGrid:
    M = int(resolution)
    if M < min_torus_resolution(fs.n):
        raise ResolutionTooLow(f"torus grid needs M >= {min_torus_resolution(fs.n)}, got {M}")
    spec = WaveSpec(Manifold.TORUS, fs.n, seed, replicate)
    xi, a = torus_coefficients(fs, spec)
    scale = M * M / math.sqrt(fs.multiplicity)
    k1 = 2j * math.pi * xi[:, 0]
    k2 = 2j * math.pi * xi[:, 1]
    multipliers = {
        "f": np.ones(len(a)),
        "d1": k1,
        "d2": k2,
        "d11": k1 * k1,
        "d12": k1 * k2,
        "d22": k2 * k2,
    }
    out = {}
    residue = 0.0
    for name, mult in multipliers.items():
        C = np.zeros((M, M), dtype=complex)
        C[xi[:, 0] % M, xi[:, 1] % M] = a * mult
        vals = np.fft.ifft2(C) * scale
        residue = max(residue, float(np.abs(vals.imag).max()) / max(1.0, float(np.abs(vals.real).max())))
        out[name] = np.ascontiguousarray(vals.real)
    x = np.arange(M) / M
    return FieldGrid(
        spec=spec,
        x1=x,
        x2=x.copy(),
        weights=np.full((M, M), 1.0 / (M * M)),
        meta={"quadrature": "rectangle", "resolution": [M, M], "imag_residue": residue},
        **out,
    )


def evaluate_torus(fs: FrequencySet, seed: int, points, replicate: int = 0) -> np.ndarray:
    """Field values at arbitrary points (..., 2) of the torus, same draw as sample_torus."""
    spec = WaveSpec(Manifold.TORUS, fs.n, seed, replicate)
    xi, a = torus_coefficients(fs, spec)
    pts = np.asarray(points, dtype=float)
    phase = np.exp(2j * math.pi * (pts @ xi.T))
    return (phase @ a).real / math.sqrt(fs.multiplicity)


# ---------------------------------------------------------------- sphere


def sphere_coefficients(n: int, spec: WaveSpec) -> np.ndarray:
    """a_{n,m} for m = 0..n; a_{n,-m} = (-1)^m conj(a_{n,m}) is implied."""
    rng = spec.rng()
    g = rng.standard_normal(2 * n + 1)
    a = np.empty(n + 1, dtype=complex)
    a[0] = g[0]
    a[1:] = (g[1 : n + 1] + 1j * g[n + 1 :]) / math.sqrt(2.0)
    return a


def _theta_nodes(m_theta: int, quadrature: str) -> tuple[np.ndarray, np.ndarray]:
    if quadrature == "gauss":
        x, w = np.polynomial.legendre.leggauss(m_theta)
        order = np.argsort(-x)
        return np.arccos(x[order]), w[order]
    if quadrature == "midpoint":
        theta = (np.arange(m_theta) + 0.5) * math.pi / m_theta
        return theta, np.sin(theta) * math.pi / m_theta
    raise ValueError(f"unknown quadrature {quadrature!r}")


@lru_cache(maxsize=16)
def _sphere_basis(n: int, m_theta: int, m_phi: int, quadrature: str):
    theta, w_theta = _theta_nodes(m_theta, quadrature)
    keep = (theta >= THETA_MIN) & (math.pi - theta >= THETA_MIN)
    dropped = int((~keep).sum())
    theta, w_theta = theta[keep], w_theta[keep]
    if dropped:
        w_theta = w_theta * (2.0 / w_theta.sum())
    lam = n * (n + 1.0)
    ct, st = np.cos(theta), np.sin(theta)
    tab = legendre_table(n, ct)
    m = np.arange(n + 1)[:, None]
    P = tab[0]
    ratio = np.sqrt((2 * n + 1.0) * (n * n - m * m) / (2 * n - 1.0))
    dP = (n * ct * P - ratio * tab[1]) / st
    d2P = -lam * P - (ct / st) * dP + (m * m / st**2) * P
    phi = 2.0 * math.pi * np.arange(m_phi) / m_phi
    E = np.exp(1j * np.arange(n + 1)[:, None] * phi[None, :])
    basis = {
        "theta": theta,
        "phi": phi,
        "w_theta": w_theta,
        "P": P.T.copy(),
        "dP": dP.T.copy(),
        "d2P": d2P.T.copy(),
        "E": E,
        "dropped": dropped,
    }
    for arr in basis.values():
        if isinstance(arr, np.ndarray):
            arr.setflags(write=False)
    return basis


def sample_sphere(
    n: int,
    seed: int,
    resolution: tuple[int, int],
    replicate: int = 0,
    quadrature: str = "gauss",
) -> FieldGrid:
    """Random spherical harmonic of degree n on a (theta, phi) product grid.

    ``quadrature="gauss"`` puts the theta rows at Gauss-Legendre nodes in
    cos(theta), which integrates products of two degree-n harmonics exactly;
    ``"midpoint"`` uses equispaced rows with sin(theta) d theta d phi weights.
    """
    if n < 2:
        raise ValueError("sphere sampler needs n >= 2")
    m_theta, m_phi = map(int, resolution)
    if m_theta < 4 * n or m_phi < 4 * n:
        raise ResolutionTooLow(f"sphere grid needs both sizes >= {4 * n}, got {resolution}")
    spec = WaveSpec(Manifold.SPHERE, n, seed, replicate)
    b = _sphere_basis(n, m_theta, m_phi, quadrature)
    if b["dropped"]:
        warnings.warn(f"{b['dropped']} polar rows excluded", PolarExclusion, stacklevel=2)
    a = sphere_coefficients(n, spec)
    c = math.sqrt(4.0 * math.pi / (2 * n + 1))
    # real part of sum over m >= 0 with m > 0 terms doubled
    coef = c * a * np.where(np.arange(n + 1) > 0, 2.0, 1.0)
    im = 1j * np.arange(n + 1)
    E = b["E"]

    def synth(rows, mult=None):
        cm = coef if mult is None else coef * mult
        return ((rows * cm[None, :]) @ E).real

    theta = b["theta"]
    st = np.sin(theta)[:, None]
    cot = (np.cos(theta) / np.sin(theta))[:, None]
    f = synth(b["P"])
    f_t = synth(b["dP"])
    f_p = synth(b["P"], im)
    f_tt = synth(b["d2P"])
    f_tp = synth(b["dP"], im)
    f_pp = synth(b["P"], im * im)
    weights = np.outer(b["w_theta"], np.full(m_phi, 2.0 * math.pi / m_phi))
    pole = float(a[0].real)
    return FieldGrid(
        spec=spec,
        x1=theta.copy(),
        x2=b["phi"].copy(),
        f=f,
        d1=f_t,
        d2=f_p / st,
        d11=f_tt,
        d12=(f_tp - cot * f_p) / st,
        d22=f_pp / st**2 + cot * f_t,
        weights=weights,
        meta={
            "quadrature": quadrature,
            "resolution": [m_theta, m_phi],
            "excluded_polar_rows": b["dropped"],
            "pole_values": [pole, pole * (-1) ** n],
        },
    )


def evaluate_sphere(n: int, seed: int, theta, phi, replicate: int = 0) -> np.ndarray:
    """Field values at arbitrary (theta, phi), same draw as sample_sphere."""
    spec = WaveSpec(Manifold.SPHERE, n, seed, replicate)
    a = sphere_coefficients(n, spec)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    P = legendre_table(n, np.cos(theta))[0]  # (n+1, k)
    m = np.arange(n + 1)[:, None]
    coef = (a * np.where(np.arange(n + 1) > 0, 2.0, 1.0))[:, None]
    vals = (coef * P * np.exp(1j * m * phi[None, :])).sum(axis=0).real
    return math.sqrt(4.0 * math.pi / (2 * n + 1)) * vals


# ---------------------------------------------------------------- dispatch


def sample(spec: WaveSpec, resolution=None, **kwargs) -> FieldGrid:
    if resolution is None:
        resolution = default_resolution(spec.manifold, spec.n)
    if spec.manifold is Manifold.TORUS:
        return sample_torus(enumerate_frequencies(spec.n), spec.seed, resolution, spec.replicate)
    if isinstance(resolution, int):
        resolution = (resolution, 2 * resolution)
    return sample_sphere(spec.n, spec.seed, resolution, spec.replicate, **kwargs)


def geodesic_cos(x, y) -> np.ndarray:
    (t1, p1), (t2, p2) = np.asarray(x, dtype=float).T, np.asarray(y, dtype=float).T
    c = np.cos(t1) * np.cos(t2) + np.sin(t1) * np.sin(t2) * np.cos(p1 - p2)
    return np.clip(c, -1.0, 1.0)


def covariance_theoretical(manifold: Manifold | str, n: int, x, y):
    """Covariance kernel E[f(x) f(y)]; points are (x1, x2) or (theta, phi)."""
    manifold = Manifold(manifold)
    if manifold is Manifold.TORUS:
        fs = enumerate_frequencies(n)
        xi = np.array(fs.points, dtype=float)
        lag = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        out = np.cos(2.0 * math.pi * (lag @ xi.T)).mean(axis=-1)
    else:
        out = np.asarray(legendre(n, geodesic_cos(x, y)))
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------- persistence


def save_field(grid: FieldGrid, path) -> Path:
    """Write a grid as CSV (JSON metadata on a leading '#' line) or as .npz."""
    path = Path(path)
    meta = {
        "manifold": grid.manifold.value,
        "n": grid.spec.n,
        "seed": grid.spec.seed,
        "replicate": grid.spec.replicate,
        **grid.meta,
    }
    try:
        if path.suffix == ".npz":
            np.savez(
                path,
                x1=grid.x1,
                x2=grid.x2,
                weights=grid.weights,
                meta=json.dumps(meta),
                **{k: getattr(grid, k) for k in FIELD_NAMES},
            )
            return path
        X1, X2 = np.meshgrid(grid.x1, grid.x2, indexing="ij")
        cols = [X1, X2] + [getattr(grid, k) for k in FIELD_NAMES] + [grid.weights]
        table = np.column_stack([c.ravel() for c in cols])
        with open(path, "w") as fh:
            fh.write("# " + json.dumps(meta) + "\n")
            fh.write(",".join(CSV_COLUMNS) + "\n")
            np.savetxt(fh, table, delimiter=",", fmt="%.17g")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return path


def load_field(path) -> FieldGrid:
    path = Path(path)
    try:
        if path.suffix == ".npz":
            with np.load(path) as z:
                meta = json.loads(str(z["meta"]))
                arrays = {k: z[k] for k in FIELD_NAMES + ("x1", "x2", "weights")}
        else:
            with open(path) as fh:
                first = fh.readline()
                if not first.startswith("#"):
                    raise IoFailure(f"{path}: missing metadata line")
                meta = json.loads(first[1:])
                header = fh.readline().strip().split(",")
                if tuple(header) != CSV_COLUMNS:
                    raise IoFailure(f"{path}: unexpected columns {header}")
                table = np.loadtxt(fh, delimiter=",", ndmin=2)
            shape = tuple(meta["resolution"])
            if meta.get("excluded_polar_rows"):
                shape = (table.shape[0] // shape[1], shape[1])
            cols = {name: table[:, i].reshape(shape) for i, name in enumerate(CSV_COLUMNS)}
            arrays = {k: cols[k] for k in FIELD_NAMES}
            arrays["weights"] = cols["weight"]
            arrays["x1"] = cols["x1"][:, 0].copy()
            arrays["x2"] = cols["x2"][0, :].copy()
    except (OSError, KeyError, ValueError) as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    spec = WaveSpec(Manifold(meta.pop("manifold")), meta.pop("n"), meta.pop("seed"), meta.pop("replicate"))
    return FieldGrid(spec=spec, meta=meta, **arrays)
