"""Radon transform and the observation operator O = -(1/2π) ∂τ R.

For y = g(r) Y_l^m(ω) the plane integrals reduce to R y(τ, ω) = G_l(τ) Y_l^m(ω) with

    G_l(τ) = 2π ∫_{max(τ,ξ)}^∞ g(r) P_l(τ/r) r dr.

Monomial profiles are integrated in closed form with exact rational Legendre sums, sampled
profiles adaptively. One-sided values of o_lm(τ) = -(1/2π) G_l'(τ±) come from
differentiating the kernel, o(τ±) = τ g(τ±) - ∫_τ^∞ g(r) P_l'(τ/r) dr.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import pi
from typing import Any, Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import NonRadonIntegrableError
from .fields import (
    HarmonicField,
    RadialMonomialSum,
    SampledRadialProfile,
    norm_sq,
)
from .harmonics import (
    HarmonicIndex,
    eval_harmonic,
    eval_legendre,
    eval_legendre_derivative,
    legendre_coefficients,
    rotation_to,
    angles,
)
from .quadrature import adaptive, gauss_nodes, integrate_pieces, integrate_to_infinity

OBSERVATION_FACTOR = -1.0 / (2.0 * pi)


def check_radon_integrable(profile: RadialMonomialSum, l: int) -> None:
    """Each kernel term τ^k r^{a+1-k} must satisfy a + 2 - k < 0."""
    for a in profile.terms:
        for k, p in enumerate(legendre_coefficients(l)):
            if p != 0 and a + 2 - k >= 0:
                raise NonRadonIntegrableError(
                    f"r^{a} against P_{l} has a divergent plane integral (term s^{k})"
                )


@lru_cache(maxsize=None)
def _legendre_moment(a: int, l: int) -> Fraction:
    """Σ_k p_k/(k - a - 2), the constant of ∫_τ^∞ r^{a+1} P_l(τ/r) dr = τ^{a+2}·(this)."""
    return sum(
        (p / (k - a - 2) for k, p in enumerate(legendre_coefficients(l)) if p != 0),
        Fraction(0),
    )


def exact_outer_coefficients(profile: RadialMonomialSum, l: int) -> dict[int, Fraction]:
    """Exact Laurent coefficients C_e of G_l(τ)/(2π) = Σ C_e τ^e on τ >= ξ."""
    check_radon_integrable(profile, l)
    out: dict[int, Fraction] = {}
    for a, c in profile.terms.items():
        value = c * _legendre_moment(a, l)
        if value != 0:
            out[a + 2] = out.get(a + 2, Fraction(0)) + value
    return {e: c for e, c in out.items() if c != 0}


def _monomial_g(profile: RadialMonomialSum, l: int, tau: float, order: int, side: int) -> float:
    """G_l or G_l' of a monomial sum (without the 2π factor)."""
    if profile.is_zero:
        return 0.0
    rho = profile.support_radius
    outside = tau > rho or (tau == rho and side > 0)
    if outside:
        if tau <= 0.0:
            raise NonRadonIntegrableError("Monomial profile on r >= 0 has no plane integral at τ = 0")
        total = 0.0
        for e, c in exact_outer_coefficients(profile, l).items():
            total += float(c) * (tau**e if order == 0 else e * tau ** (e - 1))
        return total
    check_radon_integrable(profile, l)
    total = 0.0
    for a, c in profile.terms.items():
        n = (l - a) // 2 + 2
        u, w = gauss_nodes(0.0, 1.0, n)
        if order == 0:
            kernel = u ** (-a - 3) * eval_legendre(l, tau * u / rho)
            total += float(c) * rho ** (a + 2) * float(np.dot(w, kernel))
        else:
            kernel = u ** (-a - 2) * eval_legendre_derivative(l, tau * u / rho)
            total += float(c) * rho ** (a + 1) * float(np.dot(w, kernel))
    return total


def _pieces_only(profile: SampledRadialProfile) -> SampledRadialProfile:
    return SampledRadialProfile(pieces=profile.pieces)


def _sampled_g(profile: SampledRadialProfile, l: int, tau: float, order: int, side: int) -> float:
    total = 0.0
    for piece in profile.pieces:
        lo = max(tau, piece.start)
        if lo >= piece.end:
            continue
        if order == 0:
            total += adaptive(lambda r: float(piece(r)) * eval_legendre(l, tau / r) * r, lo, piece.end)
        else:
            total += adaptive(lambda r: float(piece(r)) * eval_legendre_derivative(l, tau / r), lo, piece.end)
    if order == 1:
        left, right = _pieces_only(profile).one_sided(tau)
        total -= tau * (right if side > 0 else left)
    if profile.tail is not None:
        total += _monomial_g(profile.tail, l, tau, order, side)
    return total


def _g(profile, l: int, tau: float, order: int, side: int) -> float:
    if tau < 0.0:
        raise ValueError(f"τ must be nonnegative, got {tau}")
    if isinstance(profile, RadialMonomialSum):
        return 2.0 * pi * _monomial_g(profile, l, tau, order, side)
    return 2.0 * pi * _sampled_g(profile, l, tau, order, side)


def _map(func, tau: Any) -> Any:
    if np.ndim(tau) == 0:
        return func(float(tau))
    return np.array([func(float(t)) for t in np.asarray(tau, dtype=float)])


def radon_harmonic(profile, l: int, tau: Any) -> Any:
    """G_l(τ) such that R(g Y_l^m)(τ, ω) = G_l(τ) Y_l^m(ω)."""
    return _map(lambda t: _g(profile, l, t, 0, +1), tau)


def radon_harmonic_derivative(profile, l: int, tau: Any, side: int = +1) -> Any:
    """One-sided G_l'(τ±) from the differentiated kernel."""
    return _map(lambda t: _g(profile, l, t, 1, side), tau)


def observation_kernel(profile, l: int, tau: Any, side: int = +1) -> Any:
    """o_lm(τ±) = -(1/2π) G_l'(τ±)."""
    return _map(lambda t: OBSERVATION_FACTOR * _g(profile, l, t, 1, side), tau)


def _observation_central(profile, l: int, tau: float, step: float) -> float:
    if tau - step < 0.0:
        forward = (radon_harmonic(profile, l, tau + step) - radon_harmonic(profile, l, tau)) / step
        return OBSERVATION_FACTOR * forward
    diff = radon_harmonic(profile, l, tau + step) - radon_harmonic(profile, l, tau - step)
    return OBSERVATION_FACTOR * diff / (2.0 * step)


def _ring_means(y: HarmonicField, tau: float, omega: np.ndarray, r: np.ndarray, n_phi: int) -> np.ndarray:
    """∫_0^{2π} y dφ over the circles {x·ω = τ, |x| = r}."""
    frame = rotation_to(omega)
    phi = 2.0 * pi * np.arange(n_phi) / n_phi
    circle = np.cos(phi)[:, None] * frame[:, 0] + np.sin(phi)[:, None] * frame[:, 1]
    rho = np.sqrt(np.clip(r * r - tau * tau, 0.0, None))
    points = tau * frame[:, 2] + rho[:, None, None] * circle[None, :, :]
    values = y.evaluate(points.reshape(-1, 3)).reshape(r.size, n_phi)
    return values.sum(axis=1) * (2.0 * pi / n_phi)


def radon_direct(
    y: HarmonicField,
    tau: float,
    omega: Any,
    n_radial: int = 48,
    n_phi: int | None = None,
) -> float:
    """Plane integral of y over {x·ω = τ} in polar coordinates around τω.

    With r = |x| the area element is r dr dφ; finite radial intervals use composite
    Gauss–Legendre, the unbounded part the substitution u = r0/r.
    """
    if not y.terms:
        return 0.0
    omega = np.asarray(omega, dtype=float)
    omega = omega / np.linalg.norm(omega)
    for idx, profile in y.items():
        tail = profile if isinstance(profile, RadialMonomialSum) else profile.tail
        if tail is not None and not tail.is_zero:
            check_radon_integrable(tail, idx.l)
    n_phi = n_phi or 2 * y.band_limit + 4
    start = max(tau, min(p.support_radius for p in y.terms.values()))
    points = [start] + [b for b in y.breakpoints if b > start]
    integrand = lambda r: _ring_means(y, tau, omega, r, n_phi) * r  # noqa: E731
    total = integrate_pieces(integrand, points, n=n_radial)
    if any(np.isinf(p.outer_radius) for p in y.terms.values()):
        total += integrate_to_infinity(integrand, points[-1], n=max(64, n_radial))
    return total


class JumpRecord(BaseModel):
    """One-sided observation values at a radial breakpoint."""

    model_config = ConfigDict(frozen=True)

    tau: float = Field(description="Jump location τ*")
    index: HarmonicIndex = Field(description="Harmonic the record belongs to")
    left: float = Field(description="o(τ*-)")
    right: float = Field(description="o(τ*+)")

    @property
    def jump(self) -> float:
        return self.right - self.left


class ObservationTrace(BaseModel):
    """Per-harmonic samples of (Oy)(τ, ω) with explicit jump records."""

    model_config = ConfigDict(frozen=True)

    tau: tuple[float, ...] = Field(description="Strictly increasing τ-grid")
    values: dict[HarmonicIndex, tuple[float, ...]] = Field(
        default_factory=dict, description="o_lm on the grid"
    )
    jumps: tuple[JumpRecord, ...] = Field(default=(), description="One-sided limits at breakpoints")
    method: Literal["kernel", "central"] = "kernel"

    @field_validator("tau")
    @classmethod
    def _increasing(cls, value):
        if any(b <= a for a, b in zip(value[:-1], value[1:])):
            raise ValueError("τ-grid must be strictly increasing")
        if value and value[0] < 0.0:
            raise ValueError("τ-grid must be nonnegative")
        return value

    def jump_at(self, tau: float, index: HarmonicIndex) -> JumpRecord | None:
        for record in self.jumps:
            if record.index == index and abs(record.tau - tau) < 1e-12:
                return record
        return None

    def csv_rows(self) -> list[tuple[float, int, int, float, int]]:
        rows = []
        for idx in sorted(self.values):
            rows.extend((t, idx.l, idx.m, v, 0) for t, v in zip(self.tau, self.values[idx]))
        for rec in self.jumps:
            rows.append((rec.tau, rec.index.l, rec.index.m, rec.left, -1))
            rows.append((rec.tau, rec.index.l, rec.index.m, rec.right, 1))
        return rows

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "tau": list(self.tau),
            "method": self.method,
            "values": [
                {"l": i.l, "m": i.m, "o": list(self.values[i])} for i in sorted(self.values)
            ],
            "jumps": [
                {"tau": j.tau, "l": j.index.l, "m": j.index.m, "left": j.left, "right": j.right}
                for j in self.jumps
            ],
        }


def tau_grid(xi0: float, step: float = 0.01, max_factor: float = 5.0) -> np.ndarray:
    """Uniform grid with the given step on [0, max_factor·ξ0]."""
    count = int(round(max_factor * xi0 / step))
    return np.arange(count + 1) * step


def observe(
    y: HarmonicField,
    tau: Any,
    method: Literal["kernel", "central"] = "kernel",
    step: float = 1e-4,
) -> ObservationTrace:
    """Sample Oy per harmonic; breakpoints inside the grid range become jump records."""
    grid = np.asarray(tau, dtype=float)
    values = {}
    jumps = []
    for idx, profile in y.items():
        if method == "kernel":
            values[idx] = tuple(float(v) for v in np.atleast_1d(observation_kernel(profile, idx.l, grid)))
        else:
            values[idx] = tuple(_observation_central(profile, idx.l, t, step) for t in grid)
        for b in profile.breakpoints:
            if not grid[0] <= b <= grid[-1]:
                continue
            left = observation_kernel(profile, idx.l, b, side=-1)
            right = observation_kernel(profile, idx.l, b, side=+1)
            if abs(right - left) > 1e-13 * (1.0 + abs(left) + abs(right)):
                jumps.append(JumpRecord(tau=b, index=idx, left=left, right=right))
    logger.debug(f"Observed {len(values)} harmonics on {grid.size} τ-points, {len(jumps)} jumps")
    return ObservationTrace(
        tau=tuple(float(t) for t in grid), values=values, jumps=tuple(jumps), method=method
    )


def unobservability_residual(
    y: HarmonicField,
    xi: float,
    tau: Any = None,
    step: float = 0.01,
    max_factor: float = 5.0,
) -> float:
    """sup over τ >= ξ on the grid and over harmonics of |o_lm(τ)|, divided by ‖y‖."""
    size = norm_sq(y)
    if size == 0.0:
        return 0.0
    grid = tau_grid(xi, step, max_factor) if tau is None else np.asarray(tau, dtype=float)
    grid = grid[grid >= xi]
    worst = 0.0
    for idx, profile in y.items():
        values = [observation_kernel(profile, idx.l, xi, side=+1)]
        values.extend(np.atleast_1d(observation_kernel(profile, idx.l, grid)))
        worst = max(worst, max(abs(v) for v in values))
    return worst / np.sqrt(size)


def observation_at(y: HarmonicField, tau: float, omega: Any, side: int = +1) -> float:
    """(Oy)(τ, ω) = Σ o_lm(τ) Y_l^m(ω)."""
    _, theta, phi = angles(np.asarray(omega, dtype=float)[None, :])
    total = 0.0
    for idx, profile in y.items():
        total += observation_kernel(profile, idx.l, tau, side) * eval_harmonic(idx, theta[0], phi[0])
    return float(total)
