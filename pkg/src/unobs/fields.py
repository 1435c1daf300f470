"""Radial profiles and band-limited states y(x) = Σ g_lm(|x|) Y_l^m(x/|x|).

Two radial representations exist. `RadialMonomialSum` holds Σ c_a r^a on r >= ξ with exact
rational coefficients, which is what elements of the unobservable subspaces look like.
`SampledRadialProfile` holds smooth pieces on finite intervals plus an optional monomial
tail; it carries the jump data of the propagation experiments. Conversion only goes from
monomial to sampled.
"""

from __future__ import annotations

from fractions import Fraction
from math import inf, isfinite
from typing import Annotated, Any, Callable, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.interpolate import CubicSpline

from .errors import NonSquareIntegrableError, UnsupportedProfileError
from .harmonics import HarmonicIndex, angles, flat_index, real_harmonics
from .quadrature import adaptive

Number = Union[int, float, Fraction]
RadialFunction = Callable[[np.ndarray], np.ndarray]


def as_fraction(value: Number | str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value)
    return Fraction(value)


class RadialMonomialSum(BaseModel):
    """Σ c_a r^a for r >= ξ and 0 for r < ξ, exponents a integer."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["monomial"] = "monomial"
    support_radius: float = Field(ge=0.0, description="Radius ξ below which the profile is 0")
    terms: dict[int, Fraction] = Field(
        default_factory=dict, description="Exact coefficient per integer exponent"
    )

    @field_validator("terms", mode="before")
    @classmethod
    def _coerce_terms(cls, value: Any):
        if isinstance(value, dict):
            pairs = value.items()
        else:
            pairs = [
                (t["a"], t["c"]) if isinstance(t, dict) else (t[1], t[0]) for t in value
            ]
        terms: dict[int, Fraction] = {}
        for a, c in pairs:
            c = as_fraction(c)
            if c != 0:
                terms[int(a)] = terms.get(int(a), Fraction(0)) + c
        return {a: c for a, c in sorted(terms.items(), reverse=True) if c != 0}

    @property
    def exponents(self) -> list[int]:
        return sorted(self.terms, reverse=True)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return () if self.is_zero else (self.support_radius,)

    @property
    def outer_radius(self) -> float:
        return self.support_radius if self.is_zero else inf

    @property
    def is_square_integrable(self) -> bool:
        if self.is_zero:
            return True
        return self.support_radius > 0.0 and max(self.terms) <= -2

    def tail(self) -> RadialMonomialSum | None:
        return None if self.is_zero else self

    def pieces(self) -> tuple[ProfilePiece, ...]:
        return ()

    def raw(self, r: np.ndarray) -> np.ndarray:
        """Σ c_a r^a without the support cut-off."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for a, c in self.terms.items():
            out = out + float(c) * r**a
        return out

    def evaluate(self, r: Any) -> Any:
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(rs)
        mask = (rs >= self.support_radius) & (rs > 0.0)
        if np.any(mask) and self.terms:
            out[mask] = self.raw(rs[mask])
        return float(out[0]) if np.ndim(r) == 0 else out

    def evaluate_exact(self, r: Number) -> Fraction:
        r = as_fraction(r)
        if r < as_fraction(self.support_radius) or r <= 0:
            return Fraction(0)
        return sum((c * r**a for a, c in self.terms.items()), Fraction(0))

    def one_sided(self, r: float) -> tuple[float, float]:
        """Left and right limits at r."""
        if r <= 0.0 or self.is_zero:
            return 0.0, 0.0
        value = float(self.raw(np.array([r]))[0])
        left = value if r > self.support_radius else 0.0
        right = value if r >= self.support_radius else 0.0
        return left, right

    def derivative(self, order: int = 1) -> RadialMonomialSum:
        terms = dict(self.terms)
        for _ in range(order):
            terms = {a - 1: a * c for a, c in terms.items() if a != 0}
        return RadialMonomialSum(support_radius=self.support_radius, terms=terms)

    def scaled(self, factor: Number) -> RadialMonomialSum:
        f = as_fraction(factor)
        return RadialMonomialSum(
            support_radius=self.support_radius, terms={a: f * c for a, c in self.terms.items()}
        )

    def plus(self, other: RadialMonomialSum) -> RadialMonomialSum:
        if other.support_radius != self.support_radius and not (self.is_zero or other.is_zero):
            raise ValueError("Monomial sums with different supports cannot be added exactly")
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, Fraction(0)) + c
        radius = other.support_radius if self.is_zero else self.support_radius
        return RadialMonomialSum(support_radius=radius, terms=terms)

    def dilated(self, factor: float) -> RadialMonomialSum:
        """Profile of y(x/λ): ξ -> λξ and c_a -> c_a λ^{-a}."""
        lam = as_fraction(factor)
        return RadialMonomialSum(
            support_radius=float(lam * as_fraction(self.support_radius)),
            terms={a: c * lam ** (-a) for a, c in self.terms.items()},
        )

    def norm_sq_exact(self) -> Fraction:
        """∫_ξ^∞ g(r)² r² dr in exact arithmetic."""
        return monomial_product_integral(self.terms, self.terms, as_fraction(self.support_radius))

    def norm_sq(self) -> float:
        return float(self.norm_sq_exact())

    def to_sampled(self, outer_radius: float) -> SampledRadialProfile:
        """Smooth piece on [ξ, outer_radius] followed by the same sum as tail."""
        if outer_radius <= self.support_radius:
            raise ValueError("Outer radius must exceed the support radius")
        piece = ProfilePiece(
            start=self.support_radius,
            end=outer_radius,
            value=self.raw,
            derivatives=(self.derivative(1).raw, self.derivative(2).raw),
        )
        tail = RadialMonomialSum(support_radius=outer_radius, terms=self.terms)
        return SampledRadialProfile(pieces=(piece,), tail=tail)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "kind": "monomial",
            "xi": self.support_radius,
            "terms": [{"c": float(c), "a": a} for a, c in self.terms.items()],
        }


def monomial_product_integral(
    p: dict[int, Fraction], q: dict[int, Fraction], start: Fraction
) -> Fraction:
    """Σ c_a d_b ∫_start^∞ r^{a+b+2} dr, exact."""
    if not p or not q:
        return Fraction(0)
    if start <= 0:
        raise NonSquareIntegrableError("Monomial profile must be supported away from the origin")
    total = Fraction(0)
    for a, c in p.items():
        for b, d in q.items():
            e = a + b + 3
            if e >= 0:
                raise NonSquareIntegrableError(
                    f"r^{a}·r^{b}·r² is not integrable at infinity"
                )
            total += c * d * start**e / (-e)
    return total


class ProfilePiece(BaseModel):
    """Smooth function on [start, end) with optional analytic derivatives."""

    model_config = ConfigDict(frozen=True)

    start: float = Field(description="Left end (inclusive)")
    end: float = Field(description="Right end (exclusive)")
    value: Callable[..., Any] = Field(description="Vectorized values on the piece")
    derivatives: tuple[Callable[..., Any], ...] = Field(
        default=(), description="First, second, ... derivative callbacks"
    )
    poly: tuple[float, ...] | None = Field(
        default=None, description="Power-basis coefficients when the piece is a polynomial"
    )

    @model_validator(mode="after")
    def _check_interval(self):
        if not (isfinite(self.start) and isfinite(self.end)) or self.end <= self.start:
            raise ValueError(f"Invalid piece [{self.start}, {self.end})")
        return self

    @classmethod
    def from_polynomial(cls, start: float, end: float, coefficients) -> ProfilePiece:
        poly = np.polynomial.Polynomial(coefficients)
        derivs = tuple(poly.deriv(k) for k in range(1, 4))
        return cls(
            start=start,
            end=end,
            value=poly,
            derivatives=derivs,
            poly=tuple(float(c) for c in poly.coef),
        )

    @classmethod
    def from_samples(cls, r, values) -> ProfilePiece:
        spline = CubicSpline(np.asarray(r, dtype=float), np.asarray(values, dtype=float))
        return cls(
            start=float(r[0]),
            end=float(r[-1]),
            value=spline,
            derivatives=(spline.derivative(1), spline.derivative(2)),
        )

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return np.asarray(self.value(r), dtype=float)

    def derivative(self) -> ProfilePiece:
        if not self.derivatives:
            raise UnsupportedProfileError(
                f"Piece [{self.start}, {self.end}) has no derivative callback"
            )
        poly = None
        if self.poly is not None:
            poly = tuple(float(c) for c in np.polynomial.Polynomial(self.poly).deriv().coef)
        return ProfilePiece(
            start=self.start,
            end=self.end,
            value=self.derivatives[0],
            derivatives=self.derivatives[1:],
            poly=poly,
        )

    def dilated(self, factor: float) -> ProfilePiece:
        lam = float(factor)
        value, derivs = self.value, self.derivatives
        return ProfilePiece(
            start=lam * self.start,
            end=lam * self.end,
            value=lambda r: value(np.asarray(r) / lam),
            derivatives=tuple(
                (lambda d, k: lambda r: d(np.asarray(r) / lam) / lam**k)(d, k + 1)
                for k, d in enumerate(derivs)
            ),
        )

    def to_json_dict(self, samples: int = 65) -> dict[str, Any]:
        if self.poly is not None:
            return {"start": self.start, "end": self.end, "poly": list(self.poly)}
        r = np.linspace(self.start, self.end, samples)
        return {
            "start": self.start,
            "end": self.end,
            "r": r.tolist(),
            "values": self(r).tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> ProfilePiece:
        if "poly" in data:
            return cls.from_polynomial(data["start"], data["end"], data["poly"])
        return cls.from_samples(data["r"], data["values"])


class SampledRadialProfile(BaseModel):
    """Piecewise smooth radial profile with an optional monomial tail."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["sampled"] = "sampled"
    pieces: tuple[ProfilePiece, ...] = Field(default=(), description="Ordered smooth pieces")
    tail: RadialMonomialSum | None = Field(
        default=None, description="Monomial behaviour beyond the last piece"
    )

    @model_validator(mode="after")
    def _check_order(self):
        for left, right in zip(self.pieces[:-1], self.pieces[1:]):
            if right.start < left.end:
                raise ValueError(f"Pieces overlap at r={right.start}")
        if self.tail is not None and self.pieces:
            if self.tail.support_radius < self.pieces[-1].end:
                raise ValueError("Tail must start after the last piece")
        return self

    @classmethod
    def from_samples(
        cls, r, values, tail: RadialMonomialSum | None = None
    ) -> SampledRadialProfile:
        return cls(pieces=(ProfilePiece.from_samples(r, values),), tail=tail)

    @classmethod
    def from_polynomials(
        cls, breakpoints, coefficients, tail: RadialMonomialSum | None = None
    ) -> SampledRadialProfile:
        """One polynomial per interval [breakpoints[i], breakpoints[i+1])."""
        pieces = tuple(
            ProfilePiece.from_polynomial(a, b, c)
            for a, b, c in zip(breakpoints[:-1], breakpoints[1:], coefficients)
        )
        return cls(pieces=pieces, tail=tail)

    @property
    def support_radius(self) -> float:
        if self.pieces:
            return self.pieces[0].start
        return self.tail.support_radius if self.tail is not None else 0.0

    @property
    def is_zero(self) -> bool:
        return not self.pieces and (self.tail is None or self.tail.is_zero)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        points = {p.start for p in self.pieces} | {p.end for p in self.pieces}
        if self.tail is not None and not self.tail.is_zero:
            points.add(self.tail.support_radius)
        return tuple(sorted(points))

    @property
    def outer_radius(self) -> float:
        if self.tail is not None and not self.tail.is_zero:
            return inf
        return self.pieces[-1].end if self.pieces else 0.0

    @property
    def is_square_integrable(self) -> bool:
        return self.tail is None or self.tail.is_square_integrable

    def tail_part(self) -> RadialMonomialSum | None:
        return None if self.tail is None or self.tail.is_zero else self.tail

    def evaluate(self, r: Any) -> Any:
        rs = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(rs)
        for piece in self.pieces:
            mask = (rs >= piece.start) & (rs < piece.end)
            if np.any(mask):
                out[mask] = piece(rs[mask])
        if self.tail is not None:
            out = out + self.tail.evaluate(rs)
        return float(out[0]) if np.ndim(r) == 0 else out

    def one_sided(self, r: float) -> tuple[float, float]:
        left = right = 0.0
        point = np.array([r])
        for piece in self.pieces:
            if piece.start < r <= piece.end:
                left += float(piece(point)[0])
            if piece.start <= r < piece.end:
                right += float(piece(point)[0])
        if self.tail is not None:
            tail_left, tail_right = self.tail.one_sided(r)
            left += tail_left
            right += tail_right
        return left, right

    def derivative(self, order: int = 1) -> SampledRadialProfile:
        pieces = self.pieces
        tail = self.tail
        for _ in range(order):
            pieces = tuple(p.derivative() for p in pieces)
            tail = tail.derivative() if tail is not None else None
        return SampledRadialProfile(pieces=pieces, tail=tail)

    def scaled(self, factor: float) -> SampledRadialProfile:
        c = float(factor)
        pieces = tuple(
            ProfilePiece(
                start=p.start,
                end=p.end,
                value=(lambda f: lambda r: c * f(r))(p.value),
                derivatives=tuple((lambda f: lambda r: c * f(r))(d) for d in p.derivatives),
                poly=None if p.poly is None else tuple(c * v for v in p.poly),
            )
            for p in self.pieces
        )
        tail = self.tail.scaled(factor) if self.tail is not None else None
        return SampledRadialProfile(pieces=pieces, tail=tail)

    def dilated(self, factor: float) -> SampledRadialProfile:
        tail = self.tail.dilated(factor) if self.tail is not None else None
        return SampledRadialProfile(
            pieces=tuple(p.dilated(factor) for p in self.pieces), tail=tail
        )

    def norm_sq(self) -> float:
        if not self.is_square_integrable:
            raise NonSquareIntegrableError("Tail exponents must be <= -2")
        return radial_inner(self, self)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "kind": "sampled",
            "pieces": [p.to_json_dict() for p in self.pieces],
            "tail": None if self.tail is None else self.tail.to_json_dict(),
        }


RadialProfile = Annotated[
    Union[RadialMonomialSum, SampledRadialProfile], Field(discriminator="kind")
]


def profile_from_json(data: dict[str, Any], xi: float = 0.0) -> RadialMonomialSum | SampledRadialProfile:
    if data["kind"] == "monomial":
        return RadialMonomialSum(support_radius=data.get("xi", xi), terms=data["terms"])
    tail = data.get("tail")
    return SampledRadialProfile(
        pieces=tuple(ProfilePiece.from_json_dict(p) for p in data["pieces"]),
        tail=None if tail is None else profile_from_json(tail),
    )


def _tail_of(profile) -> RadialMonomialSum | None:
    if isinstance(profile, RadialMonomialSum):
        return profile.tail()
    return profile.tail_part()


def radial_inner(p, q) -> float:
    """∫ p(r) q(r) r² dr over the common support."""
    if p.is_zero or q.is_zero:
        return 0.0
    if isinstance(p, RadialMonomialSum) and isinstance(q, RadialMonomialSum):
        start = max(as_fraction(p.support_radius), as_fraction(q.support_radius))
        return float(monomial_product_integral(p.terms, q.terms, start))
    lo = max(p.support_radius, q.support_radius)
    hi = min(p.outer_radius, q.outer_radius)
    points = sorted({lo} | {b for b in p.breakpoints + q.breakpoints if lo < b < hi})
    if isfinite(hi):
        points.append(hi)
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        total += adaptive(lambda r: p.evaluate(r) * q.evaluate(r) * r * r, a, b)
    if not isfinite(hi):
        tp, tq = _tail_of(p), _tail_of(q)
        total += float(monomial_product_integral(tp.terms, tq.terms, as_fraction(points[-1])))
    return total


class HarmonicField(BaseModel):
    """State y in H^ξ given by finitely many radial profiles times harmonics."""

    model_config = ConfigDict(frozen=True)

    support_radius: float = Field(ge=0.0, description="Radius ξ of the excluded ball")
    terms: dict[HarmonicIndex, RadialProfile] = Field(
        default_factory=dict, description="Radial profile per harmonic index"
    )

    @model_validator(mode="after")
    def _check_support(self):
        for idx, profile in self.terms.items():
            if not profile.is_zero and profile.support_radius < self.support_radius - 1e-12:
                raise ValueError(
                    f"Profile of {idx} starts at {profile.support_radius} inside ξ={self.support_radius}"
                )
        return self

    @classmethod
    def zero(cls, support_radius: float = 0.0) -> HarmonicField:
        return cls(support_radius=support_radius)

    def indices(self) -> list[HarmonicIndex]:
        return sorted(self.terms)

    def items(self):
        return [(idx, self.terms[idx]) for idx in self.indices()]

    @property
    def band_limit(self) -> int:
        return max((idx.l for idx in self.terms), default=0)

    @property
    def degrees(self) -> set[int]:
        return {idx.l for idx in self.terms}

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({b for p in self.terms.values() for b in p.breakpoints}))

    def evaluate(self, points: Any) -> np.ndarray:
        """Point values at cartesian points of shape (n, 3); 0 inside the ball |x| < ξ."""
        r, theta, phi = angles(points)
        out = np.zeros(r.size)
        if not self.terms:
            return out
        table = real_harmonics(self.band_limit, theta, phi)
        for idx, profile in self.items():
            out += profile.evaluate(r) * table[flat_index(idx.l, idx.m)]
        out[r < self.support_radius] = 0.0
        return out

    def scaled(self, factor: float) -> HarmonicField:
        return HarmonicField(
            support_radius=self.support_radius,
            terms={i: p.scaled(factor) for i, p in self.terms.items()},
        )

    def dilated(self, factor: float) -> HarmonicField:
        """Field x -> y(x/λ)."""
        return HarmonicField(
            support_radius=factor * self.support_radius,
            terms={i: p.dilated(factor) for i, p in self.terms.items()},
        )

    def plus(self, other: HarmonicField) -> HarmonicField:
        terms = dict(self.terms)
        for idx, profile in other.terms.items():
            if idx in terms:
                mine = terms[idx]
                if not (isinstance(mine, RadialMonomialSum) and isinstance(profile, RadialMonomialSum)):
                    raise UnsupportedProfileError(f"Cannot add sampled profiles at {idx}")
                terms[idx] = mine.plus(profile)
            else:
                terms[idx] = profile
        return HarmonicField(
            support_radius=min(self.support_radius, other.support_radius), terms=terms
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "xi": self.support_radius,
            "terms": [
                {"l": i.l, "m": i.m, "profile": p.to_json_dict()} for i, p in self.items()
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> HarmonicField:
        xi = data["xi"]
        return cls(
            support_radius=xi,
            terms={
                HarmonicIndex(l=t["l"], m=t["m"]): profile_from_json(t["profile"], xi)
                for t in data["terms"]
            },
        )


def inner(y1: HarmonicField, y2: HarmonicField) -> float:
    """Inner product of H, Σ over shared indices of radial integrals."""
    shared = sorted(set(y1.terms) & set(y2.terms))
    return float(sum(radial_inner(y1.terms[i], y2.terms[i]) for i in shared))


def norm_sq(y: HarmonicField) -> float:
    """‖y‖²; monomial sums in closed form, sampled profiles by adaptive quadrature."""
    total = 0.0
    for idx, profile in y.items():
        if not profile.is_square_integrable:
            raise NonSquareIntegrableError(f"Profile of {idx} is not square integrable")
        total += profile.norm_sq()
    return total


def laplacian_symbolic(coefficient: Number, exponent: int, degree: int) -> list[tuple[Fraction, int]]:
    """Δ(c r^a Y_l) = c [a(a+1) - l(l+1)] r^{a-2} Y_l."""
    factor = exponent * (exponent + 1) - degree * (degree + 1)
    return [(as_fraction(coefficient) * factor, exponent - 2)]


def laplacian_profile(profile: RadialMonomialSum, degree: int) -> RadialMonomialSum:
    terms: dict[int, Fraction] = {}
    for a, c in profile.terms.items():
        for coeff, exponent in laplacian_symbolic(c, a, degree):
            terms[exponent] = terms.get(exponent, Fraction(0)) + coeff
    return RadialMonomialSum(support_radius=profile.support_radius, terms=terms)


def laplacian_field(y: HarmonicField) -> HarmonicField:
    """Symbolic Laplacian of a field with monomial profiles, valid for |x| > ξ."""
    terms = {}
    for idx, profile in y.items():
        if not isinstance(profile, RadialMonomialSum):
            raise UnsupportedProfileError("Symbolic Laplacian needs monomial profiles")
        terms[idx] = laplacian_profile(profile, idx.l)
    return HarmonicField(support_radius=y.support_radius, terms=terms)


def radial_derivative(y: HarmonicField, order: int = 1) -> HarmonicField:
    """Term-wise ∂^k/∂r^k, k in {1, 2}; one-sided values stay available via `one_sided`."""
    if order not in (1, 2):
        raise UnsupportedProfileError(f"Radial derivative of order {order} is not supported")
    return HarmonicField(
        support_radius=y.support_radius,
        terms={i: p.derivative(order) for i, p in y.terms.items()},
    )
