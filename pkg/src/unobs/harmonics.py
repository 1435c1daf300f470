"""Legendre polynomials, real orthonormal spherical harmonics and quadrature on S².

Harmonics use the cosine/sine convention

    Y_l^0 = N_l^0 P_l(cos θ),  Y_l^m = √2 N_l^m P_l^m(cos θ) cos(mφ),  Y_l^{-m} = √2 N_l^m P_l^m(cos θ) sin(mφ)

with the fully normalized associated Legendre recurrence, which stays finite for degrees
in the hundreds.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import pi, sqrt
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import BandLimitError, DomainError
from .quadrature import _leggauss

FOUR_PI = 4.0 * pi


class HarmonicIndex(BaseModel):
    """Degree/order label (l, m) of a real spherical harmonic."""

    model_config = ConfigDict(frozen=True)

    l: int = Field(ge=0, description="Degree")
    m: int = Field(default=0, description="Order, |m| <= l")

    @model_validator(mode="after")
    def _check_order(self):
        if abs(self.m) > self.l:
            raise ValueError(f"Order m={self.m} exceeds degree l={self.l}")
        return self

    @property
    def key(self) -> tuple[int, int]:
        return (self.l, self.m)

    @property
    def eigenvalue(self) -> int:
        """Eigenvalue of the Beltrami–Laplace operator, −l(l+1)."""
        return -self.l * (self.l + 1)

    def __lt__(self, other: HarmonicIndex) -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        return f"Y_{self.l}^{self.m}"


def _as_array(x: Any) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _check_unit_interval(x: np.ndarray):
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise DomainError(f"Legendre argument outside [-1, 1]: {x[np.abs(x) > 1.0 + 1e-12][0]}")


def legendre_table(lmax: int, x: Any) -> np.ndarray:
    """Rows P_0(x) .. P_lmax(x) from the three-term recurrence."""
    xs, _ = _as_array(x)
    _check_unit_interval(xs)
    xs = np.clip(xs, -1.0, 1.0)
    table = np.empty((lmax + 1, xs.size))
    table[0] = 1.0
    if lmax >= 1:
        table[1] = xs
    for n in range(1, lmax):
        table[n + 1] = ((2 * n + 1) * xs * table[n] - n * table[n - 1]) / (n + 1)
    return table


def eval_legendre(l: int, x: Any) -> Any:
    """P_l(x) for scalar or array x in [-1, 1]."""
    if l < 0:
        raise DomainError(f"Legendre degree must be nonnegative, got {l}")
    xs, scalar = _as_array(x)
    value = legendre_table(l, xs)[l]
    return float(value[0]) if scalar else value.reshape(np.shape(x))


def eval_legendre_derivative(l: int, x: Any) -> Any:
    """P_l'(x) via P_l' = P_{l-2}' + (2l-1) P_{l-1}."""
    if l < 0:
        raise DomainError(f"Legendre degree must be nonnegative, got {l}")
    xs, scalar = _as_array(x)
    table = legendre_table(max(l, 1), xs)
    deriv = np.zeros((l + 1, xs.size))
    if l >= 1:
        deriv[1] = 1.0
    for n in range(2, l + 1):
        deriv[n] = deriv[n - 2] + (2 * n - 1) * table[n - 1]
    value = deriv[l]
    return float(value[0]) if scalar else value.reshape(np.shape(x))


@lru_cache(maxsize=None)
def legendre_coefficients(l: int) -> tuple[Fraction, ...]:
    """Exact coefficients p_k of P_l(x) = Σ p_k x^k, indexed by k."""
    if l < 0:
        raise DomainError(f"Legendre degree must be nonnegative, got {l}")
    prev, cur = [Fraction(1)], [Fraction(0), Fraction(1)]
    if l == 0:
        return tuple(prev)
    for n in range(1, l):
        nxt = [Fraction(0)] * (n + 2)
        for k, c in enumerate(cur):
            nxt[k + 1] += Fraction(2 * n + 1, n + 1) * c
        for k, c in enumerate(prev):
            nxt[k] -= Fraction(n, n + 1) * c
        prev, cur = cur, nxt
    return tuple(cur)


def _assoc_legendre_column(lmax: int, m: int, x: np.ndarray) -> np.ndarray:
    """Fully normalized P̄_l^m(x) for l = m..lmax (includes the 1/√(4π) factor)."""
    sint = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pmm = np.full(x.shape, 1.0 / sqrt(FOUR_PI))
    for k in range(1, m + 1):
        pmm = pmm * sqrt((2 * k + 1) / (2 * k)) * sint
    out = np.zeros((lmax - m + 1, x.size))
    if lmax < m:
        return out
    out[0] = pmm
    for l in range(m + 1, lmax + 1):
        a = sqrt((4 * l * l - 1) / (l * l - m * m))
        cur = a * x * out[l - m - 1]
        if l - 1 > m:
            c = sqrt((2 * l + 1) * ((l - 1) ** 2 - m * m) / ((2 * l - 3) * (l * l - m * m)))
            cur = cur - c * out[l - m - 2]
        out[l - m] = cur
    return out


def flat_index(l: int, m: int) -> int:
    """Row of (l, m) in the output of `real_harmonics`."""
    return l * l + l + m


def real_harmonics(lmax: int, theta: Any, phi: Any) -> np.ndarray:
    """All Y_l^m with l <= lmax at the given angles, shape ((lmax+1)², n)."""
    th, _ = _as_array(theta)
    ph, _ = _as_array(phi)
    x = np.cos(th)
    out = np.empty(((lmax + 1) ** 2, x.size))
    for m in range(lmax + 1):
        column = _assoc_legendre_column(lmax, m, x)
        if m == 0:
            for l in range(lmax + 1):
                out[flat_index(l, 0)] = column[l]
            continue
        cos_m = sqrt(2.0) * np.cos(m * ph)
        sin_m = sqrt(2.0) * np.sin(m * ph)
        for l in range(m, lmax + 1):
            out[flat_index(l, m)] = column[l - m] * cos_m
            out[flat_index(l, -m)] = column[l - m] * sin_m
    return out


def eval_harmonic(idx: HarmonicIndex, theta: Any, phi: Any) -> Any:
    """Real orthonormal harmonic Y_l^m(θ, φ)."""
    th, scalar = _as_array(theta)
    ph, _ = _as_array(phi)
    if np.any(th < -1e-12) or np.any(th > pi + 1e-12):
        raise DomainError("Colatitude must lie in [0, π]")
    m = abs(idx.m)
    value = _assoc_legendre_column(idx.l, m, np.cos(th))[idx.l - m]
    if idx.m > 0:
        value = value * sqrt(2.0) * np.cos(m * ph)
    elif idx.m < 0:
        value = value * sqrt(2.0) * np.sin(m * ph)
    return float(value[0]) if scalar else value


def angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Radius, colatitude and longitude of points with shape (n, 3)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(pts, axis=1)
    safe = np.where(r > 0.0, r, 1.0)
    theta = np.arccos(np.clip(pts[:, 2] / safe, -1.0, 1.0))
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    return r, theta, phi


def rotation_to(direction: Any) -> np.ndarray:
    """Orthonormal matrix whose columns (e1, e2, d̂) end with the unit vector of `direction`."""
    d = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d)
    if norm == 0.0:
        return np.eye(3)
    d = d / norm
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(helper, d)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return np.column_stack([e1, e2, d])


class AngularGrid(BaseModel):
    """Gauss–Legendre nodes in cos θ times uniform longitudes.

    With L+1 latitudes and 2L+2 longitudes the rule integrates products of harmonics of
    degree <= L exactly; the weights sum to 4π.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    band_limit: int = Field(ge=0, description="Largest degree L with exact products")
    theta: np.ndarray = Field(description="Colatitudes of the nodes")
    phi: np.ndarray = Field(description="Longitudes of the nodes")
    weights: np.ndarray = Field(description="Quadrature weights, summing to 4π")

    @classmethod
    def gauss(cls, band_limit: int) -> AngularGrid:
        x, w = _leggauss(band_limit + 1)
        n_phi = 2 * band_limit + 2
        phi = 2.0 * pi * np.arange(n_phi) / n_phi
        theta_grid, phi_grid = np.meshgrid(np.arccos(x), phi, indexing="ij")
        weights = np.outer(w, np.full(n_phi, 2.0 * pi / n_phi))
        return cls(
            band_limit=band_limit,
            theta=theta_grid.ravel(),
            phi=phi_grid.ravel(),
            weights=weights.ravel(),
        )

    @property
    def size(self) -> int:
        return self.weights.size

    def unit_vectors(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.column_stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])

    def aligned_with(self, direction: Any) -> AngularGrid:
        """Same rule rotated so that the grid pole points along `direction`."""
        rotated = self.unit_vectors() @ rotation_to(direction).T
        _, theta, phi = angles(rotated)
        return AngularGrid(
            band_limit=self.band_limit, theta=theta, phi=phi, weights=self.weights
        )

    def integrate(self, samples: np.ndarray) -> float:
        return float(np.dot(self.weights, samples))


class AngularExpansion(BaseModel):
    """Finite table of harmonic coefficients with a declared band limit."""

    model_config = ConfigDict(frozen=True)

    band_limit: int = Field(ge=0, description="Band limit L")
    coefficients: dict[HarmonicIndex, float] = Field(
        default_factory=dict, description="Coefficient per harmonic index"
    )

    @model_validator(mode="after")
    def _check_band_limit(self):
        for idx in self.coefficients:
            if idx.l > self.band_limit:
                raise BandLimitError(f"{idx} exceeds band limit {self.band_limit}")
        return self

    @classmethod
    def single(cls, l: int, m: int = 0, value: float = 1.0) -> AngularExpansion:
        return cls(band_limit=l, coefficients={HarmonicIndex(l=l, m=m): value})

    def indices(self) -> list[HarmonicIndex]:
        return sorted(self.coefficients)

    def coefficient(self, l: int, m: int = 0) -> float:
        return self.coefficients.get(HarmonicIndex(l=l, m=m), 0.0)

    @property
    def degrees(self) -> set[int]:
        return {idx.l for idx, c in self.coefficients.items() if c != 0.0}

    def norm_sq(self) -> float:
        return float(sum(c * c for c in self.coefficients.values()))

    def scaled(self, factor: float) -> AngularExpansion:
        return AngularExpansion(
            band_limit=self.band_limit,
            coefficients={k: factor * v for k, v in self.coefficients.items()},
        )

    def evaluate(self, theta: Any, phi: Any) -> np.ndarray:
        th, _ = _as_array(theta)
        ph, _ = _as_array(phi)
        if not self.coefficients:
            return np.zeros(th.size)
        lmax = max(idx.l for idx in self.coefficients)
        table = real_harmonics(lmax, th, ph)
        return sum(c * table[flat_index(i.l, i.m)] for i, c in self.items())

    def items(self) -> list[tuple[HarmonicIndex, float]]:
        return [(idx, self.coefficients[idx]) for idx in self.indices()]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "L": self.band_limit,
            "coeffs": [{"l": i.l, "m": i.m, "c": c} for i, c in self.items()],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> AngularExpansion:
        return cls(
            band_limit=data["L"],
            coefficients={
                HarmonicIndex(l=e["l"], m=e["m"]): float(e["c"]) for e in data["coeffs"]
            },
        )


def analyze(
    samples: np.ndarray, grid: AngularGrid, band_limit: int, cutoff: float = 0.0
) -> AngularExpansion:
    """Harmonic coefficients of samples on `grid`, up to `band_limit`."""
    if band_limit > grid.band_limit:
        raise BandLimitError(
            f"Grid band limit {grid.band_limit} is below requested {band_limit}"
        )
    table = real_harmonics(band_limit, grid.theta, grid.phi)
    coeffs = table @ (grid.weights * np.asarray(samples, dtype=float))
    out = {}
    for l in range(band_limit + 1):
        for m in range(-l, l + 1):
            c = float(coeffs[flat_index(l, m)])
            if abs(c) > cutoff:
                out[HarmonicIndex(l=l, m=m)] = c
    return AngularExpansion(band_limit=band_limit, coefficients=out)


def synthesize(expansion: AngularExpansion, grid: AngularGrid) -> np.ndarray:
    """Point values of an expansion at the grid nodes."""
    if expansion.band_limit > grid.band_limit:
        raise BandLimitError(
            f"Expansion band limit {expansion.band_limit} exceeds grid band limit {grid.band_limit}"
        )
    return expansion.evaluate(grid.theta, grid.phi)


def beltrami_apply(expansion: AngularExpansion) -> AngularExpansion:
    """Beltrami–Laplace operator: multiplies degree-l coefficients by −l(l+1)."""
    return AngularExpansion(
        band_limit=expansion.band_limit,
        coefficients={i: i.eigenvalue * c for i, c in expansion.coefficients.items()},
    )
