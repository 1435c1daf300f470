"""The dual system: v_tt - Δv = 0 for t < 0 with v(·, 0) = 0, v_t(·, 0) = y.

Kirchhoff's formula gives v(x, t) = t·(mean of y over the sphere |γ - x| = |t|). For a
single harmonic g(|x|) Y_l(x/|x|) the mean reduces to a radial integral,

    v(rω, t) = Y_l(ω) · t/(2r|t|) · ∫_{|r-|t||}^{r+|t|} g(ρ) P_l(μ) ρ dρ,
    μ = (r² + ρ² - t²) / (2rρ),

μ being the cosine of the angle between γ and x. The module measures how radial jumps of y
travel along the characteristic cones and reproduces O from its limit definition.
"""

from __future__ import annotations

from math import pi
from typing import Any, Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import cumulative_trapezoid

from .errors import DomainError
from .fields import HarmonicField, ProfilePiece, SampledRadialProfile
from .harmonics import (
    AngularExpansion,
    HarmonicIndex,
    angles,
    eval_harmonic,
    eval_legendre,
    eval_legendre_derivative,
    rotation_to,
)
from .quadrature import gauss_nodes, integrate_pieces
from .radon import observation_kernel

DEFAULT_EPSILONS = (0.02, 0.01, 0.005)


def jump_profile(xi0: float, width: float = 0.5) -> SampledRadialProfile:
    """χ(r): 1 at ξ0⁺ falling to 0 at (1+width)ξ0 by a quintic smoothstep, C² at the far end."""
    span = width * xi0
    x = np.polynomial.Polynomial([-xi0 / span, 1.0 / span])
    chi = 1.0 - (10.0 * x**3 - 15.0 * x**4 + 6.0 * x**5)
    return SampledRadialProfile(
        pieces=(ProfilePiece.from_polynomial(xi0, xi0 + span, chi.coef),)
    )


def bump_profile(start: float, end: float, power: int = 3) -> SampledRadialProfile:
    """[(r - a)(b - r)]^power scaled to peak 1, C^{power-1} at both ends."""
    factor = np.polynomial.Polynomial([-start * end, start + end, -1.0])
    peak = ((end - start) / 2.0) ** (2 * power)
    return SampledRadialProfile(
        pieces=(ProfilePiece.from_polynomial(start, end, (factor**power / peak).coef),)
    )


def jump_field(xi0: float, alpha: AngularExpansion, width: float = 0.5) -> HarmonicField:
    """y = α(ω)·χ(r) with a jump of size α across |x| = ξ0."""
    chi = jump_profile(xi0, width)
    return HarmonicField(
        support_radius=xi0,
        terms={idx: chi.scaled(c) for idx, c in alpha.items() if c != 0.0},
    )


def _check_time(t: float) -> float:
    if t >= 0.0:
        raise DomainError(f"The dual system runs backwards, t must be negative, got {t}")
    return -t


def _limits(profile, r: float, s: float) -> list[float]:
    lower, upper = abs(r - s), r + s
    return [lower] + [b for b in profile.breakpoints if lower < b < upper] + [upper]


def _mu(r: float, s: float, rho: np.ndarray) -> np.ndarray:
    return np.clip((r * r + rho * rho - s * s) / (2.0 * r * rho), -1.0, 1.0)


def _kernel_integral(profile, l: int, r: float, s: float, weight) -> float:
    """∫ g(ρ) ρ K(ρ) dρ over [|r-s|, r+s] split at the profile breakpoints."""

    def integrand(rho):
        return profile.evaluate(rho) * rho * weight(rho)

    return integrate_pieces(integrand, _limits(profile, r, s), n=48)


def kirchhoff_harmonic(profile, l: int, r: float, t: float) -> float:
    """Radial factor of v for the field g(|x|) Y_l^m(x/|x|)."""
    s = _check_time(t)
    if r < 1e-12:
        return t * float(profile.evaluate(s)) if l == 0 else 0.0
    J = _kernel_integral(profile, l, r, s, lambda rho: eval_legendre(l, _mu(r, s, rho)))
    return -J / (2.0 * r)


def _boundary(profile, l: int, r: float, s: float) -> tuple[float, float, float]:
    """g(U)U, g(L)L·P_l(μ_L) and sign(r - s)."""
    upper, lower = r + s, abs(r - s)
    sign = float(np.sign(r - s))
    top = float(profile.evaluate(upper)) * upper
    bottom = float(profile.evaluate(lower)) * lower * eval_legendre(l, sign) if lower > 0.0 else 0.0
    return top, bottom, sign


def kirchhoff_radial_derivative(profile, l: int, r: float, t: float) -> float:
    """∂v/∂r of the radial factor, differentiating the kernel and the limits analytically."""
    s = _check_time(t)
    if r <= 0.0:
        raise DomainError("Radial derivative needs r > 0")
    J = _kernel_integral(profile, l, r, s, lambda rho: eval_legendre(l, _mu(r, s, rho)))
    K = _kernel_integral(
        profile,
        l,
        r,
        s,
        lambda rho: eval_legendre_derivative(l, _mu(r, s, rho))
        * (r * r - rho * rho + s * s)
        / (2.0 * r * r * rho),
    )
    top, bottom, sign = _boundary(profile, l, r, s)
    return J / (2.0 * r * r) - (K + top - bottom * sign) / (2.0 * r)


def kirchhoff_time_derivative(profile, l: int, r: float, t: float) -> float:
    """∂v/∂t of the radial factor; with s = -t this is (1/2r)·dJ/ds."""
    s = _check_time(t)
    if r <= 0.0:
        raise DomainError("Time derivative needs r > 0")
    K = _kernel_integral(
        profile,
        l,
        r,
        s,
        lambda rho: eval_legendre_derivative(l, _mu(r, s, rho)) * (-s / (r * rho)),
    )
    top, bottom, sign = _boundary(profile, l, r, s)
    return (K + top + bottom * sign) / (2.0 * r)


def _sphere_mean(y: HarmonicField, x: np.ndarray, s: float, n_mu: int, n_phi: int) -> float:
    R = float(np.linalg.norm(x))
    frame = rotation_to(x if R > 0.0 else np.array([0.0, 0.0, 1.0]))
    cuts = [-1.0, 1.0]
    if R > 0.0:
        for b in y.breakpoints:
            c = (b * b - R * R - s * s) / (2.0 * R * s)
            if -1.0 < c < 1.0:
                cuts.append(c)
    phi = 2.0 * pi * np.arange(n_phi) / n_phi
    total = 0.0
    for a, b in zip(sorted(cuts)[:-1], sorted(cuts)[1:]):
        c, w = gauss_nodes(a, b, n_mu)
        ring = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
        directions = (
            ring[:, None, None] * (np.cos(phi)[None, :, None] * frame[:, 0] + np.sin(phi)[None, :, None] * frame[:, 1])
            + c[:, None, None] * frame[:, 2]
        )
        points = x + s * directions
        values = y.evaluate(points.reshape(-1, 3)).reshape(c.size, n_phi)
        total += float(np.dot(w, values.sum(axis=1))) * (2.0 * pi / n_phi)
    return total / (4.0 * pi)


def kirchhoff_eval(
    y: HarmonicField, x: Any, t: float, n_mu: int = 48, tolerance: float = 1e-9
) -> float:
    """v^y(x, t) = t·(mean of y over |γ - x| = |t|) by direct sphere quadrature.

    The polar angle around x is split where the sphere crosses the radial breakpoints of y;
    the result at doubled resolution is returned and the difference is logged when it
    exceeds `tolerance`.
    """
    s = _check_time(t)
    x = np.asarray(x, dtype=float)
    n_phi = 2 * y.band_limit + 4
    coarse = _sphere_mean(y, x, s, n_mu, n_phi)
    fine = _sphere_mean(y, x, s, 2 * n_mu, n_phi)
    error = abs(fine - coarse) * s
    if error > tolerance * max(1.0, abs(fine * s)):
        logger.warning(f"Sphere quadrature at x={x.tolist()}, t={t} reached only {error:.3e}")
    return t * fine


def field_kirchhoff(y: HarmonicField, x: Any, t: float) -> float:
    """v^y(x, t) assembled from the per-harmonic radial factors."""
    r, theta, phi = angles(np.asarray(x, dtype=float)[None, :])
    total = 0.0
    for idx, profile in y.items():
        total += kirchhoff_harmonic(profile, idx.l, float(r[0]), t) * eval_harmonic(idx, theta[0], phi[0])
    return total


def radial_dalembert(profile, r: float, t: float, points: int = 20001) -> float:
    """Degree-0 reference: v = -(1/2r) ∫_{r-s}^{r+s} ρ g(|ρ|) dρ with the odd extension."""
    s = _check_time(t)
    reach = r + s
    rho = np.linspace(-reach, reach, points)
    odd = rho * profile.evaluate(np.abs(rho))
    primitive = cumulative_trapezoid(odd, rho, initial=0.0)
    upper, lower = np.interp([r + s, r - s], rho, primitive)
    return -(upper - lower) / (2.0 * r)


class JumpDatum(BaseModel):
    """Measured and predicted jump of ∂v/∂r across a characteristic cone, one harmonic."""

    model_config = ConfigDict(frozen=True)

    xi0: float = Field(description="Radius of the jump of y")
    t: float = Field(description="Negative time of the measurement")
    cone: Literal["C1", "C2"] = Field(description="C1: r = ξ0 - t, C2: r = |t + ξ0|")
    radius: float = Field(description="Cone radius at time t")
    index: HarmonicIndex = Field(description="Harmonic of the record")
    alpha: float = Field(description="Jump of y across r = ξ0 for this harmonic")
    predicted: float = Field(description="Geometric-optics amplitude")
    measured: float = Field(description="Richardson-extrapolated jump")
    ratio: float | None = Field(description="measured / predicted")
    literal_prediction: float | None = Field(default=None, description="-ξ0/(ξ0 - t)·α")
    literal_ratio: float | None = Field(default=None, description="measured / literal_prediction")
    extrapolation_residual: float = Field(description="Gap between quadratic and linear extrapolation")
    inconclusive: bool = Field(description="Residual above 1e-3 of the predicted amplitude")

    def csv_row(self) -> tuple:
        return (self.xi0, self.t, self.index.l, self.index.m, self.predicted, self.measured, self.ratio)


def _extrapolate(eps: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Value at ε = 0 of the quadratic through the samples, and its distance to the linear one."""
    quadratic = float(np.polyval(np.polyfit(eps, values, len(eps) - 1), 0.0))
    e1, e2 = eps[-2], eps[-1]
    v1, v2 = values[-2], values[-1]
    linear = float(v2 - e2 * (v1 - v2) / (e1 - e2))
    return quadratic, abs(quadratic - linear)


def cone_radius(xi0: float, t: float, cone: Literal["C1", "C2"]) -> float:
    s = _check_time(t)
    radius = xi0 + s if cone == "C1" else abs(xi0 - s)
    if radius <= 0.0:
        raise DomainError(f"Cone {cone} passes through the origin at t={t}")
    return radius


def predicted_jump(xi0: float, t: float, alpha: float, l: int, cone: Literal["C1", "C2"]) -> float:
    radius = cone_radius(xi0, t, cone)
    if cone == "C1":
        return xi0 * alpha / (2.0 * radius)
    if -t < xi0:
        return -xi0 * alpha / (2.0 * radius)
    return (-1) ** l * xi0 * alpha / (2.0 * radius)


def extract_jump_vr(
    y: HarmonicField,
    xi0: float,
    t: float,
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS,
    cone: Literal["C1", "C2"] = "C1",
) -> list[JumpDatum]:
    """Jump of ∂v/∂r across the cone through ξ0, one record per harmonic of y."""
    radius = cone_radius(xi0, t, cone)
    eps = np.array(epsilons) * xi0
    if eps.max() >= radius:
        raise DomainError(f"ε-schedule reaches the origin on cone {cone} at t={t}")
    records = []
    for idx, profile in y.items():
        left, right = profile.one_sided(xi0)
        alpha = right - left
        jumps = np.array(
            [
                kirchhoff_radial_derivative(profile, idx.l, radius + e, t)
                - kirchhoff_radial_derivative(profile, idx.l, radius - e, t)
                for e in eps
            ]
        )
        measured, residual = _extrapolate(eps, jumps)
        predicted = predicted_jump(xi0, t, alpha, idx.l, cone)
        literal = -xi0 / (xi0 - t) * alpha if cone == "C1" else None
        inconclusive = residual > 1e-3 * abs(predicted) if predicted != 0.0 else residual > 1e-12
        if inconclusive:
            logger.warning(f"Jump of {idx} on {cone} at t={t} is inconclusive, residual {residual:.3e}")
        records.append(
            JumpDatum(
                xi0=xi0,
                t=t,
                cone=cone,
                radius=radius,
                index=idx,
                alpha=alpha,
                predicted=predicted,
                measured=measured,
                ratio=measured / predicted if predicted != 0.0 else None,
                literal_prediction=literal,
                literal_ratio=measured / literal if literal else None,
                extrapolation_residual=residual,
                inconclusive=inconclusive,
            )
        )
    return records


class ObservedJumpRecord(BaseModel):
    index: HarmonicIndex
    alpha: float = Field(description="Jump of y across r = ξ0")
    measured: float = Field(description="o(ξ0+) - o(ξ0-)")
    predicted: float = Field(description="ξ0·α")
    literal_prediction: float = Field(description="-ξ0·α")

    @property
    def ratio(self) -> float | None:
        return self.measured / self.predicted if self.predicted != 0.0 else None


class ObservedJump(BaseModel):
    xi0: float
    xi: float
    records: list[ObservedJumpRecord]
    not_in_D: bool = Field(description="A nonzero jump of Oy on τ > ξ rules out y in D^ξ")

    @property
    def verdict(self) -> str:
        return f"y ∉ D^{self.xi}" if self.not_in_D else "no jump observed"


def observed_jump(y: HarmonicField, xi: float, xi0: float, tolerance: float = 1e-10) -> ObservedJump:
    """One-sided limits of o_lm at τ = ξ0 and the resulting verdict on membership in D^ξ."""
    if not xi < xi0:
        raise DomainError(f"Need ξ < ξ0, got ξ={xi}, ξ0={xi0}")
    records = []
    for idx, profile in y.items():
        left, right = profile.one_sided(xi0)
        alpha = right - left
        measured = observation_kernel(profile, idx.l, xi0, +1) - observation_kernel(
            profile, idx.l, xi0, -1
        )
        records.append(
            ObservedJumpRecord(
                index=idx,
                alpha=alpha,
                measured=measured,
                predicted=xi0 * alpha,
                literal_prediction=-xi0 * alpha,
            )
        )
    not_in_D = any(abs(r.measured) > tolerance for r in records)
    logger.info(f"Observed jump at τ={xi0}: {'y not in D^' + str(xi) if not_in_D else 'none'}")
    return ObservedJump(xi0=xi0, xi=xi, records=records, not_in_D=not_in_D)


def limit_observation(y: HarmonicField, tau: float, omega: Any, s: float) -> float:
    """s·[v_t + v_r] at x = (s + τ)ω, t = -s; tends to (Oy)(τ, ω) as s grows."""
    omega = np.asarray(omega, dtype=float)
    omega = omega / np.linalg.norm(omega)
    _, theta, phi = angles(omega[None, :])
    radius = s + tau
    total = 0.0
    for idx, profile in y.items():
        local = kirchhoff_time_derivative(profile, idx.l, radius, -s) + kirchhoff_radial_derivative(
            profile, idx.l, radius, -s
        )
        total += local * eval_harmonic(idx, theta[0], phi[0])
    return s * total


def convergence_order(values: list[float], target: float, scales: list[float]) -> float:
    """Least-squares slope of log|error| against log(1/s)."""
    errors = np.abs(np.asarray(values) - target)
    slope, _ = np.polyfit(np.log(1.0 / np.asarray(scales)), np.log(errors), 1)
    return float(slope)


def mean_value_limit(y: HarmonicField, x: Any, t: float) -> float:
    """v(x, t)/t, which tends to y(x) as t -> 0⁻."""
    return kirchhoff_eval(y, x, t) / t

