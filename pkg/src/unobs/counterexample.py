"""A non-smooth unobservable state with singular support on the sphere |x| = 2.

With p(s) = 3s - 4s³ (so p(1/2) = 1, p'(1/2) = 0 and |p(1/r)| < 1 for r > 1, r != 2)
the field

    h = Σ_k a_k (1/r) [p(1/r)]^{2k+1} Y_{6k+3}(ω),  r >= 1,

lies in D¹ term by term. For a_k = 1/k the series converges in L², is smooth off r = 2, and
the Beltrami norm of h(2, ·) diverges. Everything here works on finite truncations h_N
with exact rational radial coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .dspace import PolyClassP, certify_class, polyharmonic_check, power_expand
from .errors import CertificateError, DegreeMismatchError, DomainError, ScheduleError
from .fields import HarmonicField, RadialMonomialSum
from .harmonics import AngularExpansion, HarmonicIndex
from .radon import unobservability_residual

P = PolyClassP(degree=3, coefficients=(-4, 3))
SINGULAR_RADIUS = Fraction(2)
SUPPORT_RADIUS = 1.0

MRule = Literal["zero", "top", "alternating"]


def term_degree(k: int) -> int:
    return 6 * k + 3


def term_order(k: int, rule: MRule = "zero") -> int:
    """Order m of the harmonic chosen for term k."""
    l = term_degree(k)
    if rule == "zero":
        return 0
    if rule == "top":
        return l
    return (-1) ** k * (k % (l + 1))


def p_value(s: Any) -> Any:
    return 3.0 * s - 4.0 * s**3


def p_slope(s: Any) -> Any:
    return 3.0 - 12.0 * s**2


def p_curvature(s: Any) -> Any:
    return -24.0 * s


class CoefficientSchedule(BaseModel):
    """Sequence a_k: `inv_k` (1/k), `unit` (1) or an explicit list."""

    model_config = ConfigDict(frozen=True)

    name: Literal["inv_k", "unit", "custom"] = Field(default="inv_k", description="Schedule kind")
    values: tuple[float, ...] = Field(default=(), description="a_1, a_2, ... for custom schedules")

    @model_validator(mode="after")
    def _check_values(self):
        if self.name == "custom" and not self.values:
            raise ScheduleError("Custom schedule needs explicit values")
        return self

    def value(self, k: int) -> Fraction:
        if k < 1:
            raise DomainError(f"Schedule index starts at 1, got {k}")
        if self.name == "inv_k":
            return Fraction(1, k)
        if self.name == "unit":
            return Fraction(1)
        if k > len(self.values):
            raise ScheduleError(f"Custom schedule has only {len(self.values)} values")
        return Fraction(self.values[k - 1])

    def sup_beyond(self, n: int) -> float:
        """sup_{k > n} |a_k|."""
        if self.name == "inv_k":
            return 1.0 / (n + 1)
        if self.name == "unit":
            return 1.0
        rest = self.values[n:]
        return max((abs(v) for v in rest), default=0.0)

    def validate_divergence(self, n_values) -> None:
        """Reject schedules whose Beltrami partial sums do not double along the range."""
        for n in n_values:
            if beltrami_partial_sum(self, 2 * n) < 2 * beltrami_partial_sum(self, n):
                raise ScheduleError(
                    f"S(2N) < 2 S(N) at N={n}: no evidence that Σ k⁴ a_k² diverges"
                )


class TruncatedH(BaseModel):
    """h_N: the first N terms of the series, radial parts exact."""

    model_config = ConfigDict(frozen=True)

    n_terms: int = Field(ge=0, description="Number of terms N")
    schedule: CoefficientSchedule = Field(description="Coefficient schedule a_k")
    m_rule: MRule = Field(default="zero", description="Choice of order m per term")
    field: HarmonicField = Field(description="Σ_{k<=N} a_k R_k(r) Y_{6k+3}")

    def term_index(self, k: int) -> HarmonicIndex:
        return HarmonicIndex(l=term_degree(k), m=term_order(k, self.m_rule))

    def term(self, k: int) -> HarmonicField:
        idx = self.term_index(k)
        return HarmonicField(support_radius=SUPPORT_RADIUS, terms={idx: self.field.terms[idx]})

    @property
    def degrees(self) -> list[int]:
        return sorted(self.field.degrees)


def radial_term(k: int) -> RadialMonomialSum:
    """R_k(r) = (1/r) p(1/r)^{2k+1} as exact monomials on r >= 1."""
    return RadialMonomialSum(
        support_radius=SUPPORT_RADIUS, terms=power_expand(P, 2 * k + 1).radial_terms()
    )


def build_h(n_terms: int, schedule: CoefficientSchedule | None = None, m_rule: MRule = "zero") -> TruncatedH:
    schedule = schedule or CoefficientSchedule()
    terms = {}
    for k in range(1, n_terms + 1):
        idx = HarmonicIndex(l=term_degree(k), m=term_order(k, m_rule))
        terms[idx] = radial_term(k).scaled(schedule.value(k))
    logger.debug(f"Built h_{n_terms} with {schedule.name} coefficients")
    return TruncatedH(
        n_terms=n_terms,
        schedule=schedule,
        m_rule=m_rule,
        field=HarmonicField(support_radius=SUPPORT_RADIUS, terms=terms),
    )


def perturb_term(h: TruncatedH, k: int, exponent: int = -3, delta: float = 1e-3) -> TruncatedH:
    """Copy of h_N with δ·r^exponent added to term k (fault injection)."""
    idx = h.term_index(k)
    terms = dict(h.field.terms)
    extra = RadialMonomialSum(support_radius=SUPPORT_RADIUS, terms={exponent: delta})
    terms[idx] = terms[idx].plus(extra)
    field = HarmonicField(support_radius=SUPPORT_RADIUS, terms=terms)
    return h.model_copy(update={"field": field})


class ValueAtTwo(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    expansion: AngularExpansion = Field(description="h_N(2, ·)")
    l2_norm_sq: Fraction = Field(description="‖h_N(2,·)‖², exact")
    beltrami_norm_sq: Fraction = Field(description="‖Δ_ω h_N(2,·)‖², exact")


def value_at_2(h: TruncatedH) -> ValueAtTwo:
    """h_N(2, ·); each coefficient is a_k·R_k(2) = a_k/2 exactly."""
    coefficients = {}
    l2 = beltrami = Fraction(0)
    for idx, profile in h.field.items():
        c = profile.evaluate_exact(SINGULAR_RADIUS)
        coefficients[idx] = float(c)
        l2 += c * c
        beltrami += (idx.l * (idx.l + 1)) ** 2 * c * c
    band = max((i.l for i in coefficients), default=0)
    return ValueAtTwo(
        expansion=AngularExpansion(band_limit=band, coefficients=coefficients),
        l2_norm_sq=l2,
        beltrami_norm_sq=beltrami,
    )


def beltrami_partial_sum(schedule: CoefficientSchedule, n: int) -> Fraction:
    """S(N) = (1/4) Σ_{k<=N} a_k² [(6k+3)(6k+4)]²."""
    return sum(
        (schedule.value(k) ** 2 * ((6 * k + 3) * (6 * k + 4)) ** 2 for k in range(1, n + 1)),
        Fraction(0),
    ) / 4


def l2_partial_sum(schedule: CoefficientSchedule, n: int) -> Fraction:
    """‖h_N(2,·)‖² = (1/4) Σ_{k<=N} a_k²."""
    return sum((schedule.value(k) ** 2 for k in range(1, n + 1)), Fraction(0)) / 4


def _radial_derivatives(n: int, r: float, order: int) -> float:
    """∂^j/∂r^j of (1/r) P(r)^n with P(r) = p(1/r), j <= 2, in floating point."""
    s = 1.0 / r
    P = p_value(s)
    dP = -p_slope(s) * s * s
    d2P = p_slope(s) * 2.0 * s**3 + p_curvature(s) * s**4
    if order == 0:
        return P**n / r
    first = n * P ** (n - 1) * dP / r - P**n / r**2
    if order == 1:
        return first
    second_inner = n * (n - 1) * P ** (n - 2) * dP**2 + n * P ** (n - 1) * d2P
    return second_inner / r - 2.0 * n * P ** (n - 1) * dP / r**2 + 2.0 * P**n / r**3


def _derivative_bound_constant(r: float, order: int) -> float:
    """B_j with |∂^j R_n(r)| <= B_j n^j q^{n-j}."""
    s = 1.0 / r
    dP = abs(p_slope(s)) * s * s
    d2P = abs(p_slope(s) * 2.0 * s**3 + p_curvature(s) * s**4)
    if order == 0:
        return 1.0 / r
    if order == 1:
        return 1.0 / r**2 + dP / r
    return 2.0 / r**3 + 2.0 * dP / r**2 + (dP**2 + d2P) / r


class SmoothnessRow(BaseModel):
    r: float
    q: float = Field(description="|p(1/r)|")
    order: int = Field(description="Radial derivative order j")
    l2_sq: float = Field(description="‖∂^j h_N(r,·)‖²")
    beltrami_sq: float = Field(description="‖Δ_ω ∂^j h_N(r,·)‖²")
    l2_tail_bound: float = Field(description="Certified bound for the terms k > N")
    beltrami_tail_bound: float = Field(description="Certified bound for the Δ_ω-images, k > N")
    converged: bool = Field(description="Tail bound below the Cauchy tolerance")


def _geometric_tail(first: float, ratio: float) -> float:
    return first / (1.0 - ratio) if ratio < 1.0 else float("inf")


def smoothness_diagnostics(
    h: TruncatedH,
    radii,
    orders=(0, 1, 2),
    excluded: float = 0.05,
    tolerance: float = 1e-8,
) -> list[SmoothnessRow]:
    """Partial sums and geometric tail bounds of the angular norms off r = 2.

    For k > N the terms are bounded by A²·λ_k²·B_j²·n_k^{2j}·q^{2(n_k-j)} with n_k = 2k+1,
    A = sup_{k>N}|a_k| and λ_k = l(l+1); consecutive bounds shrink by at most
    ((N+2)/(N+1))^{4+2j}·q⁴.
    """
    rows = []
    n = h.n_terms
    amplitude = h.schedule.sup_beyond(n)
    for r in radii:
        r = float(r)
        if r <= SUPPORT_RADIUS or abs(r - float(SINGULAR_RADIUS)) < excluded:
            raise DomainError(f"r={r} lies in the excluded set (r <= 1 or |r - 2| < {excluded})")
        q = abs(p_value(1.0 / r))
        for j in orders:
            l2 = beltrami = 0.0
            for k in range(1, n + 1):
                a = float(h.schedule.value(k))
                value = a * _radial_derivatives(2 * k + 1, r, j)
                lam = term_degree(k) * (term_degree(k) + 1)
                l2 += value**2
                beltrami += (lam * value) ** 2
            k1 = n + 1
            n1 = 2 * k1 + 1
            lam1 = term_degree(k1) * (term_degree(k1) + 1)
            base = (amplitude * _derivative_bound_constant(r, j)) ** 2 * n1 ** (2 * j) * q ** (2 * (n1 - j))
            growth = ((n + 2) / (n + 1)) ** (2 * j) * q**4
            l2_tail = _geometric_tail(base, growth)
            beltrami_tail = _geometric_tail(base * lam1**2, growth * ((n + 2) / (n + 1)) ** 4)
            rows.append(
                SmoothnessRow(
                    r=r,
                    q=q,
                    order=j,
                    l2_sq=l2,
                    beltrami_sq=beltrami,
                    l2_tail_bound=l2_tail,
                    beltrami_tail_bound=beltrami_tail,
                    converged=max(l2_tail, beltrami_tail) <= tolerance,
                )
            )
    return rows


class GrowthRow(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    beltrami: Fraction = Field(description="S(N)")
    l2: Fraction = Field(description="‖h_N(2,·)‖²")


class DivergenceCertificate(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    schedule: CoefficientSchedule
    rows: list[GrowthRow] = Field(description="Partial sums for N up to twice the range")
    doubling: bool = Field(description="S(2N) >= 2 S(N) on the whole range")
    growth_exponent: int = Field(description="Closed-form law S(N) ~ c N^e")
    growth_spread: float = Field(description="max |S(N)/N^e / (S(ref)/ref^e) - 1| for N >= N_low")
    l2_increment: float = Field(description="‖h_{ref+1}‖² - ‖h_ref‖²")
    l2_tail_bound: float = Field(description="Certified bound on Σ_{k>ref} a_k²/4, inf if divergent")
    l2_diverges: bool = Field(description="‖h_N(2,·)‖² grows like N (unit schedule)")


def divergence_certificate(
    schedule: CoefficientSchedule,
    n_values=range(5, 51),
    reference: int = 100,
    low: int = 50,
) -> DivergenceCertificate:
    """Monotone doubling of S(N) on a finite range plus the closed-form growth law."""
    n_values = list(n_values)
    schedule.validate_divergence(n_values)
    top = max(2 * max(n_values), reference + 1)
    rows = []
    s = l2 = Fraction(0)
    for k in range(1, top + 1):
        a2 = schedule.value(k) ** 2
        s += a2 * ((6 * k + 3) * (6 * k + 4)) ** 2 / 4
        l2 += a2 / 4
        rows.append(GrowthRow(n=k, beltrami=s, l2=l2))
    by_n = {row.n: row for row in rows}
    doubling = all(by_n[2 * n].beltrami >= 2 * by_n[n].beltrami for n in n_values)
    exponent = 3 if schedule.name == "inv_k" else 5
    ref_value = float(by_n[reference].beltrami) / reference**exponent
    spread = max(
        abs(float(by_n[n].beltrami) / n**exponent / ref_value - 1.0)
        for n in range(low, reference + 1)
    )
    increment = float(by_n[reference + 1].l2 - by_n[reference].l2)
    if schedule.name == "inv_k":
        tail = 1.0 / (4.0 * reference)
    elif schedule.name == "unit":
        tail = float("inf")
    else:
        tail = float(sum(Fraction(v) ** 2 for v in schedule.values[reference:]) / 4)
    diverges = schedule.name == "unit" and all(by_n[n].l2 == Fraction(n, 4) for n in by_n)
    logger.info(
        f"Divergence certificate ({schedule.name}): doubling={doubling}, spread={spread:.3e}"
    )
    return DivergenceCertificate(
        schedule=schedule,
        rows=rows,
        doubling=doubling,
        growth_exponent=exponent,
        growth_spread=spread,
        l2_increment=increment,
        l2_tail_bound=tail,
        l2_diverges=diverges,
    )


class TermCertificate(BaseModel):
    k: int
    degree: int
    class_ok: bool = Field(description="Radial exponents lie in (1/r)P_l(1/r)")
    polyharmonic: bool | None = Field(description="Δ^l kills the term, None when k > k_max")
    residual: float = Field(description="Unobservability residual on τ in [ξ, 10]")
    passed: bool


class MembershipReport(BaseModel):
    terms: list[TermCertificate]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.terms)

    @property
    def max_residual(self) -> float:
        return max((t.residual for t in self.terms), default=0.0)


def membership_certificate(
    h: TruncatedH,
    xi: float = SUPPORT_RADIUS,
    k_max: int = 4,
    tau_max: float = 10.0,
    step: float = 0.01,
    tolerance: float = 1e-8,
    raise_on_failure: bool = True,
) -> MembershipReport:
    """Class, polyharmonic and unobservability certificates for every term of h_N."""
    grid = xi + step * np.arange(int(round((tau_max - xi) / step)) + 1)
    rows = []
    for k in range(1, h.n_terms + 1):
        term = h.term(k)
        idx = h.term_index(k)
        profile = term.terms[idx]
        try:
            certify_class({-a - 1: c for a, c in profile.terms.items()}, idx.l)
            class_ok = True
        except DegreeMismatchError:
            class_ok = False
        poly = polyharmonic_check(term).passed if k <= k_max else None
        residual = unobservability_residual(term, xi, tau=grid)
        passed = class_ok and poly is not False and residual <= tolerance
        rows.append(
            TermCertificate(
                k=k, degree=idx.l, class_ok=class_ok, polyharmonic=poly, residual=residual, passed=passed
            )
        )
    report = MembershipReport(terms=rows, tolerance=tolerance)
    failed = [row for row in rows if not row.passed]
    if failed and raise_on_failure:
        row = failed[0]
        name = "class" if not row.class_ok else "polyharmonic" if row.polyharmonic is False else "unobservability"
        raise CertificateError(
            f"Term k={row.k} fails the {name} certificate (residual {row.residual:.3e})",
            term=row.k,
            certificate=name,
            report=report,
        )
    return report


def derivative_at_2(h: TruncatedH) -> dict[HarmonicIndex, Fraction]:
    """Exact ∂h_N/∂r at r = 2 per term; each equals -a_k/4.

    Every term of h_N is smooth across r = 2, so there is one value per term and the
    radial derivative of h_N has no jump there.
    """
    return {
        idx: profile.derivative(1).evaluate_exact(SINGULAR_RADIUS) for idx, profile in h.field.items()
    }


def second_derivative_growth(
    h: TruncatedH, n_values, side: int = +1
) -> list[tuple[int, float]]:
    """‖∂²h_N/∂r²(2 ± 1/N, ·)‖ along N, with the coefficient schedule of h."""
    schedule = h.schedule
    rows = []
    for n in n_values:
        r = 2.0 + side / n
        total = 0.0
        for k in range(1, n + 1):
            total += (float(schedule.value(k)) * _radial_derivatives(2 * k + 1, r, 2)) ** 2
        rows.append((n, float(np.sqrt(total))))
    return rows


def p_profile_table(radii) -> list[tuple[float, float, float]]:
    """(r, p(1/r), |p(1/r)|) for plotting."""
    return [(float(r), float(p_value(1.0 / r)), float(abs(p_value(1.0 / r)))) for r in radii]


def rotate_orders(h: TruncatedH, rule: MRule) -> TruncatedH:
    """Same radial parts, harmonics Y_{6k+3}^{m(k)} picked by another rule."""
    terms = {}
    for k in range(1, h.n_terms + 1):
        terms[HarmonicIndex(l=term_degree(k), m=term_order(k, rule))] = h.field.terms[h.term_index(k)]
    field = HarmonicField(support_radius=SUPPORT_RADIUS, terms=terms)
    return h.model_copy(update={"m_rule": rule, "field": field})
