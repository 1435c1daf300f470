from fractions import Fraction

import pytest
from pydantic import ValidationError

from unobs.counterexample import (
    CoefficientSchedule,
    _radial_derivatives,
    beltrami_partial_sum,
    build_h,
    derivative_at_2,
    divergence_certificate,
    membership_certificate,
    p_profile_table,
    perturb_term,
    radial_term,
    rotate_orders,
    second_derivative_growth,
    smoothness_diagnostics,
    term_order,
    value_at_2,
)
from unobs.errors import CertificateError, DomainError, ScheduleError
from unobs.harmonics import HarmonicIndex


def test_first_radial_term():
    """(1/r)(3/r - 4/r³)³ expands to four monomials."""
    assert radial_term(1).terms == {-4: 27, -6: -108, -8: 144, -10: -64}


def test_build_h_degrees():
    """Term k sits on Y_{6k+3}."""
    h = build_h(3)
    assert h.degrees == [9, 15, 21]
    assert h.term_index(2) == HarmonicIndex(l=15, m=0)


def test_build_h_empty():
    """N = 0 gives the zero field."""
    h = build_h(0)
    assert h.field.terms == {}
    assert value_at_2(h).beltrami_norm_sq == 0


@pytest.mark.parametrize(
    "n, schedule, beltrami, l2",
    [(1, "unit", Fraction(2025), Fraction(1, 4)), (2, "inv_k", Fraction(5625), Fraction(5, 16))],
)
def test_value_at_2(n, schedule, beltrami, l2):
    """Each term contributes a_k/2 at r = 2."""
    at_two = value_at_2(build_h(n, CoefficientSchedule(name=schedule)))
    assert at_two.beltrami_norm_sq == beltrami
    assert at_two.l2_norm_sq == l2
    assert beltrami_partial_sum(CoefficientSchedule(name=schedule), n) == beltrami


def test_derivative_at_2():
    """∂R_k/∂r(2) = -1/4 exactly, so the series of slopes is -a_k/4."""
    h = build_h(4)
    for k, (idx, value) in enumerate(sorted(derivative_at_2(h).items()), start=1):
        assert idx.l == 6 * k + 3
        assert value == Fraction(-1, 4 * k)


@pytest.mark.parametrize("n", [3, 5, 9])
def test_second_derivative_at_2(n):
    """R_n''(2) = -3n/8 + 1/4, matching the exact monomial form."""
    k = (n - 1) // 2
    exact = radial_term(k).derivative(2).evaluate_exact(2)
    assert _radial_derivatives(n, 2.0, 2) == pytest.approx(float(exact), abs=1e-12)
    assert exact == Fraction(-3 * n, 8) + Fraction(1, 4)


def test_second_derivative_grows_near_2():
    """‖∂²h_N(2 + 1/N, ·)‖ keeps growing with N."""
    rows = second_derivative_growth(build_h(1), [10, 20, 40])
    norms = [norm for _, norm in rows]
    assert norms[0] < norms[1] < norms[2]


def test_smoothness_off_the_sphere():
    """At r = 4, q = 11/16 and the tails are geometrically small."""
    rows = smoothness_diagnostics(build_h(40), radii=[4.0])
    assert rows[0].q == pytest.approx(0.6875)
    assert [row.order for row in rows] == [0, 1, 2]
    assert all(row.converged for row in rows)


@pytest.mark.parametrize("r", [1.0, 2.01, 1.97])
def test_smoothness_rejects_excluded_radii(r):
    """r <= 1 and a neighbourhood of r = 2 are excluded."""
    with pytest.raises(DomainError, match="excluded"):
        smoothness_diagnostics(build_h(2), radii=[r])


def test_divergence_inv_k():
    """S(N) doubles, grows like N³ and the L² norms are Cauchy."""
    certificate = divergence_certificate(
        CoefficientSchedule(name="inv_k"), n_values=range(5, 31), reference=60, low=30
    )
    assert certificate.doubling
    assert certificate.growth_exponent == 3
    assert certificate.growth_spread < 0.1
    assert certificate.l2_increment == pytest.approx(1 / (4 * 61**2))
    assert certificate.l2_tail_bound == pytest.approx(1 / 240)
    assert not certificate.l2_diverges


def test_divergence_unit():
    """With a_k = 1 even the L² norm at r = 2 grows like N/4."""
    certificate = divergence_certificate(
        CoefficientSchedule(name="unit"), n_values=range(5, 11), reference=20, low=10
    )
    assert certificate.growth_exponent == 5
    assert certificate.l2_diverges
    assert certificate.l2_tail_bound == float("inf")
    assert certificate.rows[9].l2 == Fraction(10, 4)


def test_fast_decaying_schedule_rejected():
    """a_k = k^{-3} makes Σ k⁴a_k² converge; the doubling test refuses it."""
    schedule = CoefficientSchedule(name="custom", values=[k**-3.0 for k in range(1, 121)])
    with pytest.raises(ScheduleError, match="S\\(2N\\) < 2 S\\(N\\)"):
        divergence_certificate(schedule, n_values=range(5, 11))


def test_custom_schedule_needs_values():
    """Empty custom schedules are invalid."""
    with pytest.raises(ValidationError, match="explicit values"):
        CoefficientSchedule(name="custom")
    with pytest.raises(ScheduleError, match="only 2 values"):
        CoefficientSchedule(name="custom", values=[1.0, 0.5]).value(3)


def test_membership_of_every_term():
    """Class, Δ^l and residual certificates hold for h_2."""
    report = membership_certificate(build_h(2))
    assert report.passed
    assert [t.degree for t in report.terms] == [9, 15]
    assert all(t.polyharmonic for t in report.terms)
    assert report.max_residual < 1e-8


def test_perturbed_term_is_caught():
    """Adding 10⁻³ r⁻³ to the first term breaks the certificates."""
    h = perturb_term(build_h(1), 1)
    report = membership_certificate(h, raise_on_failure=False)
    assert not report.passed
    assert report.max_residual > 1e-5
    assert not report.terms[0].class_ok
    with pytest.raises(CertificateError, match="k=1") as info:
        membership_certificate(h)
    assert info.value.certificate == "class"
    assert info.value.term == 1


@pytest.mark.parametrize("rule", ["top", "alternating"])
def test_orders_do_not_matter(rule):
    """Changing m keeps the norms and the certificates."""
    h = build_h(2)
    rotated = rotate_orders(h, rule)
    assert value_at_2(rotated).beltrami_norm_sq == value_at_2(h).beltrami_norm_sq
    assert membership_certificate(rotated).passed
    assert {idx.m for idx in rotated.field.terms} == {term_order(k, rule) for k in (1, 2)}


def test_p_profile_table():
    """|p(1/r)| equals 1 only at r = 2."""
    table = p_profile_table([1.5, 2.0, 3.0])
    assert table[1] == (2.0, 1.0, 1.0)
    assert all(q < 1.0 for r, _, q in table if r != 2.0)
