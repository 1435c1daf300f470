"""Polynomial classes P_l and the unobservable subspaces D^ξ_l.

An element of D^ξ_l is (1/r) p(1/r) Y_l(ω) on r > ξ with p in P_l, the odd/even
polynomials Σ_j c_j s^{l-2j} whose exponents stay positive.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import CertificateError, DegreeMismatchError, DomainError, UnsupportedProfileError
from .fields import HarmonicField, RadialMonomialSum, as_fraction, laplacian_profile, norm_sq
from .harmonics import AngularExpansion, HarmonicIndex


def sigma(l: int) -> int:
    """Largest j >= 0 with l - 2j > 0."""
    if l < 1:
        raise DomainError(f"σ(l) needs l >= 1, got {l}")
    return (l - 1) // 2


def admissible_exponents(l: int) -> list[int]:
    """Radial exponents -(l-2j)-1 of D^ξ_l, highest first."""
    return [-(l - 2 * j) - 1 for j in range(sigma(l) + 1)]


class PolyClassP(BaseModel):
    """p(s) = Σ_j c_j s^{l-2j}, j = 0..σ(l)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    degree: int = Field(ge=1, description="Degree l of the class P_l")
    coefficients: tuple[Fraction, ...] = Field(
        description="c_0..c_σ(l), the coefficient of s^{l-2j} at position j"
    )

    @field_validator("coefficients", mode="before")
    @classmethod
    def _coerce(cls, value: Any):
        return tuple(as_fraction(c) for c in value)

    @model_validator(mode="after")
    def _check_length(self):
        if len(self.coefficients) > sigma(self.degree) + 1:
            raise DegreeMismatchError(
                f"P_{self.degree} has at most {sigma(self.degree) + 1} coefficients"
            )
        return self

    @classmethod
    def monomial(cls, l: int, j: int = 0) -> PolyClassP:
        """s^{l-2j}."""
        if not 0 <= j <= sigma(l):
            raise DomainError(f"j={j} outside 0..σ({l})")
        return cls(degree=l, coefficients=[0] * j + [1])

    @classmethod
    def from_coefficients(cls, degree: int, by_exponent: dict[int, Any]) -> PolyClassP:
        """Build from {exponent: coefficient}; exponents must be l-2j > 0."""
        coeffs = [Fraction(0)] * (sigma(degree) + 1)
        for e, c in by_exponent.items():
            if as_fraction(c) == 0:
                continue
            if e <= 0 or e > degree or (degree - e) % 2:
                raise DegreeMismatchError(f"s^{e} is not admissible in P_{degree}")
            coeffs[(degree - e) // 2] = as_fraction(c)
        return cls(degree=degree, coefficients=coeffs)

    @property
    def sigma(self) -> int:
        return sigma(self.degree)

    @property
    def by_exponent(self) -> dict[int, Fraction]:
        return {
            self.degree - 2 * j: c for j, c in enumerate(self.coefficients) if c != 0
        }

    def evaluate(self, s: Any) -> Any:
        if isinstance(s, (int, Fraction)):
            return sum((c * as_fraction(s) ** e for e, c in self.by_exponent.items()), Fraction(0))
        s = np.asarray(s, dtype=float)
        return sum(float(c) * s**e for e, c in self.by_exponent.items()) + 0.0 * s

    def derivative(self) -> dict[int, Fraction]:
        """p'(s) as {exponent: coefficient}; it leaves the class P_l."""
        return {e - 1: e * c for e, c in self.by_exponent.items()}

    def times(self, other: PolyClassP) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for a, c in self.by_exponent.items():
            for b, d in other.by_exponent.items():
                out[a + b] = out.get(a + b, Fraction(0)) + c * d
        return {e: c for e, c in out.items() if c != 0}

    def radial_terms(self) -> dict[int, Fraction]:
        """Monomials of (1/r) p(1/r): s^e -> r^{-e-1}."""
        return {-e - 1: c for e, c in self.by_exponent.items()}


def certify_class(exponents: dict[int, Fraction], degree: int) -> None:
    """Raise unless every exponent lies in {l, l-2, ..., > 0}."""
    for e in exponents:
        if e <= 0 or e > degree or (degree - e) % 2:
            raise DegreeMismatchError(f"s^{e} violates P_{degree}")


def power_expand(p: PolyClassP, n: int) -> PolyClassP:
    """[p(s)]^n for odd n, exact; the result is certified to lie in P_{n·l}."""
    if n < 1 or n % 2 == 0:
        raise DomainError(f"Power must be a positive odd integer, got {n}")
    result = {0: Fraction(1)}
    base = p.by_exponent
    power = n
    while power:
        if power & 1:
            result = _multiply(result, base)
        power >>= 1
        if power:
            base = _multiply(base, base)
    degree = n * p.degree
    certify_class(result, degree)
    return PolyClassP.from_coefficients(degree, result)


def _multiply(a: dict[int, Fraction], b: dict[int, Fraction]) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            out[e1 + e2] = out.get(e1 + e2, Fraction(0)) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def basis_element(
    xi: float, p: PolyClassP, angular: AngularExpansion, normalize: bool = False
) -> HarmonicField:
    """(1/r) p(1/r) Y_l(ω) on r >= ξ, with Y_l a combination of degree-l harmonics."""
    if xi <= 0.0:
        raise DomainError(f"Support radius must be positive, got {xi}")
    if angular.degrees - {p.degree}:
        raise DegreeMismatchError(
            f"Angular part has degrees {sorted(angular.degrees)}, polynomial is in P_{p.degree}"
        )
    radial = RadialMonomialSum(support_radius=xi, terms=p.radial_terms())
    terms = {
        idx: radial.scaled(c) for idx, c in angular.items() if c != 0.0
    }
    field = HarmonicField(support_radius=xi, terms=terms)
    if normalize and terms:
        field = field.scaled(1.0 / np.sqrt(norm_sq(field)))
    return field


class PolyharmonicReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    passed: bool = Field(description="All coefficients vanish after the applications")
    degree: int = Field(description="Harmonic degree of the field")
    applications: int = Field(description="Number of Laplacians applied")
    residual: dict[HarmonicIndex, RadialMonomialSum] = Field(
        default_factory=dict, description="Nonzero leftovers per index"
    )


def polyharmonic_check(y: HarmonicField, applications: int | None = None) -> PolyharmonicReport:
    """Apply the symbolic Laplacian l times (or `applications` times) in exact arithmetic."""
    if len(y.degrees) > 1:
        raise DegreeMismatchError(f"Field mixes degrees {sorted(y.degrees)}")
    degree = next(iter(y.degrees), 0)
    count = degree if applications is None else applications
    residual = {}
    for idx, profile in y.items():
        if not isinstance(profile, RadialMonomialSum):
            raise UnsupportedProfileError("Polyharmonic check needs monomial profiles")
        current = profile
        for _ in range(count):
            if current.is_zero:
                break
            current = laplacian_profile(current, idx.l)
        if not current.is_zero:
            residual[idx] = current
    logger.debug(f"Polyharmonic check, degree {degree}, {count} applications: {len(residual)} residual terms")
    return PolyharmonicReport(
        passed=not residual, degree=degree, applications=count, residual=residual
    )


def membership_residual(y: HarmonicField, xi: float, points: int = 200, r_max_factor: float = 50.0) -> float:
    """Relative least-squares distance of each radial part from span{r^{-(l-2j)-1}}.

    The fit runs on a log-spaced grid in [ξ, r_max_factor·ξ] with weights r^{3/2}. The grid
    spacing grows like r, so the weighted sum of squares mimics ∫ g² r² dr.
    """
    r = np.geomspace(xi, r_max_factor * xi, points)
    weight = r ** 1.5
    worst = 0.0
    for idx, profile in y.items():
        if idx.l < 1:
            raise DegreeMismatchError("D^ξ has no degree-0 component")
        values = profile.evaluate(r)
        scale = np.linalg.norm(weight * values)
        if scale == 0.0:
            continue
        # scaling columns by ξ^a keeps the design matrix well conditioned
        basis = np.column_stack([(r / xi) ** a for a in admissible_exponents(idx.l)])
        solution, *_ = np.linalg.lstsq(basis * weight[:, None], weight * values, rcond=None)
        misfit = np.linalg.norm(weight * (values - basis @ solution)) / scale
        worst = max(worst, float(misfit))
    return worst


def certify_radial_part(y: HarmonicField) -> None:
    """Exact check that every monomial radial part lies in (1/r) P_l(1/r)."""
    for idx, profile in y.items():
        if not isinstance(profile, RadialMonomialSum):
            raise UnsupportedProfileError("Exact class check needs monomial profiles")
        allowed = set(admissible_exponents(idx.l))
        bad = sorted(set(profile.terms) - allowed)
        if bad:
            raise CertificateError(
                f"{idx} carries r^{bad[0]}, outside (1/r)P_{idx.l}(1/r)",
                term=idx.l,
                certificate="class",
            )
