"""Controls at infinity and the control operator W.

A control is a family of time profiles g_lm(τ), τ >= 0, vanishing for τ < ξ. The wave it
produces is

    u^f(x, t) = (1/2π) ∫_{S²} f̃_τ(t + x·ω, ω) dσ_ω,

with f̃ the extension by zero, and W f = u^f(·, 0). Per harmonic this reduces to
w_l(r) = (1/r) ∫_{-r}^{r} g̃'(τ) P_l(τ/r) dτ, where jumps of g̃ contribute point masses.
"""

from __future__ import annotations

from math import inf, pi, sqrt
from typing import Annotated, Any, Callable, Literal, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.interpolate import CubicSpline

from .errors import BandLimitError, UnsupportedProfileError
from .fields import HarmonicField, SampledRadialProfile, norm_sq
from .harmonics import AngularGrid, HarmonicIndex, eval_legendre, flat_index, real_harmonics
from .quadrature import gauss_nodes, integrate_pieces, integrate_to_infinity
from .radon import observation_kernel

GAUSSIAN_CUTOFF = 40.0


class _TimeProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    @property
    def start(self) -> float:
        raise NotImplementedError

    @property
    def end(self) -> float:
        raise NotImplementedError

    @property
    def breakpoints(self) -> list[float]:
        return [self.start, self.end]

    def _value(self, tau: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _derivative(self, tau: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _mask(self, tau: np.ndarray) -> np.ndarray:
        return (tau >= self.start) & (tau <= self.end)

    def value(self, tau: Any) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.zeros_like(tau)
        mask = self._mask(tau)
        out[mask] = self._value(tau[mask])
        return out

    def derivative(self, tau: Any) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.zeros_like(tau)
        mask = self._mask(tau)
        out[mask] = self._derivative(tau[mask])
        return out

    def params(self) -> dict[str, Any]:
        return self.model_dump(exclude={"kind"})


class GaussianProfile(_TimeProfile):
    """amplitude·exp(-rate (τ - center)²), cut where it drops below e^-40."""

    kind: Literal["gaussian"] = "gaussian"
    amplitude: float = Field(default=1.0, description="Peak value")
    center: float = Field(description="Location of the peak")
    rate: float = Field(gt=0.0, description="Inverse squared width")

    @property
    def start(self) -> float:
        return max(0.0, self.center - sqrt(GAUSSIAN_CUTOFF / self.rate))

    @property
    def end(self) -> float:
        return self.center + sqrt(GAUSSIAN_CUTOFF / self.rate)

    @property
    def breakpoints(self) -> list[float]:
        return list(np.linspace(self.start, self.end, 13))

    def _value(self, tau):
        return self.amplitude * np.exp(-self.rate * (tau - self.center) ** 2)

    def _derivative(self, tau):
        return -2.0 * self.rate * (tau - self.center) * self._value(tau)

    def scaled(self, factor: float) -> GaussianProfile:
        return self.model_copy(update={"amplitude": factor * self.amplitude})

    def shifted(self, delta: float) -> GaussianProfile:
        return self.model_copy(update={"center": self.center + delta})


class PolyBumpProfile(_TimeProfile):
    """amplitude·[4(τ-a)(b-τ)/(b-a)²]^power on [a, b]."""

    kind: Literal["poly"] = "poly"
    amplitude: float = Field(default=1.0, description="Peak value at the midpoint")
    lower: float = Field(ge=0.0, description="Left end a of the support")
    upper: float = Field(description="Right end b of the support")
    power: int = Field(default=4, ge=2, description="Order of contact at both ends")

    @model_validator(mode="after")
    def _check_support(self):
        if self.upper <= self.lower:
            raise ValueError("Bump support must have positive length")
        return self

    @property
    def start(self) -> float:
        return self.lower

    @property
    def end(self) -> float:
        return self.upper

    def _base(self, tau):
        width = (self.upper - self.lower) ** 2
        return 4.0 * (tau - self.lower) * (self.upper - tau) / width

    def _value(self, tau):
        return self.amplitude * self._base(tau) ** self.power

    def _derivative(self, tau):
        width = (self.upper - self.lower) ** 2
        slope = 4.0 * (self.lower + self.upper - 2.0 * tau) / width
        return self.amplitude * self.power * self._base(tau) ** (self.power - 1) * slope

    def scaled(self, factor: float) -> PolyBumpProfile:
        return self.model_copy(update={"amplitude": factor * self.amplitude})

    def shifted(self, delta: float) -> PolyBumpProfile:
        return self.model_copy(update={"lower": self.lower + delta, "upper": self.upper + delta})


class SplineProfile(_TimeProfile):
    """Clamped cubic spline through (knots, values), zero outside the knots."""

    kind: Literal["spline"] = "spline"
    knots: tuple[float, ...] = Field(description="Strictly increasing knots")
    values: tuple[float, ...] = Field(description="Values at the knots")

    @model_validator(mode="after")
    def _check_knots(self):
        if len(self.knots) != len(self.values) or len(self.knots) < 2:
            raise ValueError("Spline needs matching knots and values, at least two")
        if any(b <= a for a, b in zip(self.knots[:-1], self.knots[1:])):
            raise ValueError("Spline knots must be strictly increasing")
        if self.knots[0] < 0.0:
            raise ValueError("Spline knots must be nonnegative")
        return self

    @property
    def spline(self) -> CubicSpline:
        return CubicSpline(self.knots, self.values, bc_type="clamped")

    @property
    def start(self) -> float:
        return self.knots[0]

    @property
    def end(self) -> float:
        return self.knots[-1]

    @property
    def breakpoints(self) -> list[float]:
        return list(self.knots)

    def _value(self, tau):
        return self.spline(tau)

    def _derivative(self, tau):
        return self.spline(tau, 1)

    def scaled(self, factor: float) -> SplineProfile:
        return self.model_copy(update={"values": tuple(factor * v for v in self.values)})

    def shifted(self, delta: float) -> SplineProfile:
        return self.model_copy(update={"knots": tuple(k + delta for k in self.knots)})


class CallableProfile(_TimeProfile):
    """User supplied profile on [lower, upper]; the derivative callback is mandatory."""

    kind: Literal["callable"] = "callable"
    func: Callable[..., Any] = Field(description="Vectorized g(τ)")
    func_derivative: Callable[..., Any] | None = Field(default=None, description="Vectorized g'(τ)")
    lower: float = Field(ge=0.0, description="Start of the support")
    upper: float = Field(description="End of the support")

    @model_validator(mode="after")
    def _check_derivative(self):
        if self.func_derivative is None:
            raise UnsupportedProfileError(
                "Control profile has no derivative; numerical differentiation is not used"
            )
        return self

    @property
    def start(self) -> float:
        return self.lower

    @property
    def end(self) -> float:
        return self.upper

    def _value(self, tau):
        return np.asarray(self.func(tau), dtype=float)

    def _derivative(self, tau):
        return np.asarray(self.func_derivative(tau), dtype=float)

    def scaled(self, factor: float) -> CallableProfile:
        f, df = self.func, self.func_derivative
        return self.model_copy(
            update={"func": lambda t: factor * f(t), "func_derivative": lambda t: factor * df(t)}
        )

    def shifted(self, delta: float) -> CallableProfile:
        f, df = self.func, self.func_derivative
        return self.model_copy(
            update={
                "func": lambda t: f(np.asarray(t) - delta),
                "func_derivative": lambda t: df(np.asarray(t) - delta),
                "lower": self.lower + delta,
                "upper": self.upper + delta,
            }
        )

    def params(self) -> dict[str, Any]:
        raise UnsupportedProfileError("Callable profiles cannot be serialized")


TimeProfile = Annotated[
    Union[GaussianProfile, PolyBumpProfile, SplineProfile, CallableProfile],
    Field(discriminator="kind"),
]
_KINDS = {"gaussian": GaussianProfile, "poly": PolyBumpProfile, "spline": SplineProfile}


class Control(BaseModel):
    """Element of F^ξ: time profiles per harmonic, zero before the delay ξ."""

    model_config = ConfigDict(frozen=True)

    delay: float = Field(default=0.0, ge=0.0, description="Delay ξ")
    band_limit: int = Field(ge=0, description="Angular band limit L")
    profiles: dict[HarmonicIndex, TimeProfile] = Field(
        default_factory=dict, description="Time profile per harmonic index"
    )

    @model_validator(mode="after")
    def _check_band_limit(self):
        for idx in self.profiles:
            if idx.l > self.band_limit:
                raise BandLimitError(f"{idx} exceeds control band limit {self.band_limit}")
        return self

    def indices(self) -> list[HarmonicIndex]:
        return sorted(self.profiles)

    def lower(self, idx: HarmonicIndex) -> float:
        return max(self.delay, self.profiles[idx].start)

    def upper(self, idx: HarmonicIndex) -> float:
        return max(self.lower(idx), self.profiles[idx].end)

    def value(self, idx: HarmonicIndex, tau: Any) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return np.where(tau >= self.delay, self.profiles[idx].value(tau), 0.0)

    def derivative(self, idx: HarmonicIndex, tau: Any) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return np.where(tau >= self.delay, self.profiles[idx].derivative(tau), 0.0)

    def time_points(self, idx: HarmonicIndex) -> list[float]:
        lo, hi = self.lower(idx), self.upper(idx)
        inner = [b for b in self.profiles[idx].breakpoints if lo < b < hi]
        return [lo, *inner, hi]

    def jumps(self, idx: HarmonicIndex) -> list[tuple[float, float]]:
        """Locations and sizes of the jumps of the zero extension g̃."""
        lo, hi = self.lower(idx), self.upper(idx)
        if hi <= lo:
            return []
        profile = self.profiles[idx]
        out = []
        first = float(profile.value(lo)[0])
        if abs(first) > 1e-15:
            out.append((lo, first))
        last = float(profile.value(hi)[0])
        if abs(last) > 1e-15:
            out.append((hi, -last))
        return out

    def norm_sq(self) -> float:
        """‖f‖²_F = Σ ∫ g² dτ by composite Gauss–Legendre over the breakpoints."""
        total = 0.0
        for idx in self.indices():
            total += integrate_pieces(
                lambda t: self.value(idx, t) ** 2, self.time_points(idx), ratio=None
            )
        return total

    def scaled(self, factor: float) -> Control:
        return self.model_copy(
            update={"profiles": {i: p.scaled(factor) for i, p in self.profiles.items()}}
        )

    def delayed(self, delta: float) -> Control:
        """Control shifted later in τ by δ >= 0."""
        if delta < 0.0:
            raise ValueError(f"Delay shift must be nonnegative, got {delta}")
        return Control(
            delay=self.delay + delta,
            band_limit=self.band_limit,
            profiles={i: p.shifted(delta) for i, p in self.profiles.items()},
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "xi": self.delay,
            "L": self.band_limit,
            "profiles": [
                {"l": i.l, "m": i.m, "kind": p.kind, "params": p.params()}
                for i, p in sorted(self.profiles.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> Control:
        return cls(
            delay=data["xi"],
            band_limit=data["L"],
            profiles={
                HarmonicIndex(l=e["l"], m=e["m"]): _KINDS[e["kind"]](**e["params"])
                for e in data["profiles"]
            },
        )


def w_radial(f: Control, idx: HarmonicIndex, r: Any, side: int = -1, n: int = 32) -> np.ndarray:
    """w_l(r) = (1/r)[∫ g'(τ) P_l(τ/r) dτ + Σ jumps·P_l(τ_j/r)] over τ < r.

    Exactly zero for r at or below the start of the profile. `side=+1` gives the right
    limit at a jump location.
    """
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.zeros_like(rs)
    if idx not in f.profiles:
        return out
    points = f.time_points(idx)
    jumps = f.jumps(idx)
    lo = points[0]
    for i, radius in enumerate(rs):
        if radius < lo or (radius == lo and side < 0) or radius <= 0.0:
            continue
        top = min(radius, points[-1])
        cuts = [p for p in points if p < top] + [top]
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            tau, w = gauss_nodes(a, b, n)
            total += float(np.dot(w, f.derivative(idx, tau) * eval_legendre(idx.l, tau / radius)))
        for tau_j, size in jumps:
            if tau_j < radius or (tau_j == radius and side > 0):
                total += size * eval_legendre(idx.l, tau_j / radius)
        out[i] = total / radius
    return out


def apply_W_harmonic(f: Control, r_grid: Any) -> HarmonicField:
    """Wf as sampled profiles on the grid; nothing is stored below the delay."""
    grid = np.asarray(r_grid, dtype=float)
    if np.any(grid <= 0.0):
        raise ValueError("Radial grid must be positive")
    terms = {}
    for idx in f.indices():
        lo = f.lower(idx)
        inside = grid[grid > lo]
        radii = np.concatenate([[lo], inside]) if lo > 0.0 else inside
        if radii.size < 2:
            terms[idx] = SampledRadialProfile()
            continue
        values = np.concatenate(
            [w_radial(f, idx, radii[:1], side=+1), w_radial(f, idx, radii[1:])]
        ) if lo > 0.0 else w_radial(f, idx, radii)
        terms[idx] = SampledRadialProfile.from_samples(radii, values)
    return HarmonicField(support_radius=f.delay, terms=terms)


def wave_at(f: Control, x: Any, t: float, band_limit: int = 96) -> float:
    """u^f(x, t) by quadrature over S² of f̃_τ(t + x·ω, ω)."""
    if band_limit < f.band_limit:
        raise BandLimitError(
            f"Quadrature band limit {band_limit} is below the control band limit {f.band_limit}"
        )
    x = np.asarray(x, dtype=float)
    if any(abs(size) > 1e-12 for idx in f.indices() for _, size in f.jumps(idx)):
        logger.warning("Control has jumps; their point masses are not seen by the sphere quadrature")
    axis = x if np.linalg.norm(x) > 0.0 else np.array([0.0, 0.0, 1.0])
    grid = AngularGrid.gauss(band_limit).aligned_with(axis)
    arguments = t + grid.unit_vectors() @ x
    table = real_harmonics(f.band_limit, grid.theta, grid.phi)
    total = 0.0
    for idx in f.indices():
        samples = f.derivative(idx, arguments) * table[flat_index(idx.l, idx.m)]
        total += grid.integrate(samples)
    return total / (2.0 * pi)


def apply_W_direct(f: Control, x: Any, band_limit: int = 96) -> float:
    """(Wf)(x) = (1/2π) ∫ f̃_τ(x·ω, ω) dσ_ω."""
    return wave_at(f, x, 0.0, band_limit)


class UnitarityReport(BaseModel):
    control_norm: float = Field(description="‖f‖_F from time quadrature")
    state_norm: float = Field(description="‖Wf‖_H from radial quadrature")
    gap: float = Field(description="Relative difference of the two norms")


def state_norm_sq(f: Control, idx: HarmonicIndex, n: int = 48) -> float:
    """∫ w_l(r)² r² dr, finite part over the time breakpoints and tail by u = r_end/r."""
    if idx not in f.profiles:
        return 0.0
    points = f.time_points(idx)
    integrand = lambda r: w_radial(f, idx, r) ** 2 * r * r  # noqa: E731
    finite = integrate_pieces(integrand, points, n=n)
    return finite + integrate_to_infinity(integrand, points[-1], n=64)


def unitarity_check(f: Control) -> UnitarityReport:
    control = sqrt(f.norm_sq())
    state = sqrt(sum(state_norm_sq(f, idx) for idx in f.indices()))
    gap = abs(state - control) / control if control > 0.0 else abs(state)
    logger.debug(f"Unitarity: ‖f‖={control:.15g}, ‖Wf‖={state:.15g}, gap={gap:.3e}")
    return UnitarityReport(control_norm=control, state_norm=state, gap=gap)


class AdjointReport(BaseModel):
    state_inner: float = Field(description="(Wf, y)_H")
    control_inner: float = Field(description="(f, Oy)_F")
    scale: float = Field(description="‖f‖·‖y‖")
    discrepancy: float = Field(description="|difference| / scale")


def _state_inner(f: Control, idx: HarmonicIndex, profile, n: int = 48) -> float:
    lo = max(f.lower(idx), profile.support_radius)
    outer = profile.outer_radius
    cuts = set(f.time_points(idx)) | set(profile.breakpoints)
    points = sorted({lo} | {p for p in cuts if lo < p < outer})
    if outer != inf:
        if outer <= lo:
            return 0.0
        points.append(outer)
    integrand = lambda r: w_radial(f, idx, r) * profile.evaluate(r) * r * r  # noqa: E731
    total = integrate_pieces(integrand, points, n=n)
    if outer == inf:
        total += integrate_to_infinity(integrand, points[-1], n=64)
    return total


def _control_inner(f: Control, idx: HarmonicIndex, profile, n: int = 32) -> float:
    lo, hi = f.lower(idx), f.upper(idx)
    cuts = set(f.time_points(idx)) | {b for b in profile.breakpoints if lo < b < hi}
    integrand = lambda t: f.value(idx, t) * observation_kernel(profile, idx.l, t)  # noqa: E731
    return integrate_pieces(integrand, sorted(cuts), n=n, ratio=None)


def adjoint_check(f: Control, y: HarmonicField) -> AdjointReport:
    """Compare (Wf, y)_H with (f, Oy)_F harmonic by harmonic."""
    shared = sorted(set(f.profiles) & set(y.terms))
    state = sum(_state_inner(f, i, y.terms[i]) for i in shared)
    control = sum(_control_inner(f, i, y.terms[i]) for i in shared)
    scale = sqrt(f.norm_sq() * norm_sq(y))
    discrepancy = abs(state - control) / scale if scale > 0.0 else abs(state - control)
    logger.debug(f"Adjoint: (Wf,y)={state:.15g}, (f,Oy)={control:.15g}")
    return AdjointReport(
        state_inner=float(state), control_inner=float(control), scale=scale, discrepancy=discrepancy
    )


def reconstruct_via_adjoint(y: HarmonicField, tau: Any) -> Control:
    """Spline control f = Oy sampled on the τ-grid; W f ≈ y because W is unitary onto H."""
    grid = np.asarray(tau, dtype=float)
    profiles = {}
    for idx, profile in y.items():
        values = observation_kernel(profile, idx.l, grid)
        profiles[idx] = SplineProfile(knots=tuple(grid), values=tuple(float(v) for v in values))
    return Control(delay=0.0, band_limit=y.band_limit, profiles=profiles)


def random_control(
    rng: np.random.Generator,
    band_limit: int,
    delay: float = 0.0,
    terms: int = 3,
    kinds: tuple[str, ...] = ("gaussian", "poly"),
) -> Control:
    """Smooth control with `terms` random harmonics of degree <= band_limit."""
    indices: set[HarmonicIndex] = set()
    while len(indices) < min(terms, (band_limit + 1) ** 2):
        l = int(rng.integers(0, band_limit + 1))
        indices.add(HarmonicIndex(l=l, m=int(rng.integers(-l, l + 1))))
    profiles = {}
    for idx in sorted(indices):
        kind = kinds[int(rng.integers(len(kinds)))]
        amplitude = float(rng.uniform(-1.0, 1.0))
        if kind == "gaussian":
            rate = float(rng.uniform(2.0, 6.0))
            center = delay + sqrt(GAUSSIAN_CUTOFF / rate) + float(rng.uniform(0.0, 1.0))
            profiles[idx] = GaussianProfile(amplitude=amplitude, center=center, rate=rate)
        elif kind == "poly":
            lower = delay + float(rng.uniform(0.0, 1.0))
            upper = lower + float(rng.uniform(1.0, 3.0))
            profiles[idx] = PolyBumpProfile(
                amplitude=amplitude, lower=lower, upper=upper, power=int(rng.integers(4, 7))
            )
        else:
            knots = np.linspace(delay + 0.5, delay + float(rng.uniform(2.0, 4.0)), 12)
            values = rng.uniform(-1.0, 1.0, knots.size)
            values[[0, -1]] = 0.0
            profiles[idx] = SplineProfile(knots=tuple(knots), values=tuple(values))
    return Control(delay=delay, band_limit=band_limit, profiles=profiles)
