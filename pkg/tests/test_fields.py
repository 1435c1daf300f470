from fractions import Fraction

import numpy as np
import pytest

from unobs.errors import NonSquareIntegrableError, UnsupportedProfileError
from unobs.fields import (
    HarmonicField,
    ProfilePiece,
    RadialMonomialSum,
    SampledRadialProfile,
    inner,
    laplacian_field,
    laplacian_symbolic,
    norm_sq,
    radial_derivative,
)
from unobs.harmonics import HarmonicIndex
from unobs.wavesim import bump_profile


def monomial_field(xi, terms, l, m=0):
    return HarmonicField(
        support_radius=xi,
        terms={HarmonicIndex(l=l, m=m): RadialMonomialSum(support_radius=xi, terms=terms)},
    )


def test_norm_sq_unit():
    """r^{-2} on r >= 1 has norm 1."""
    assert norm_sq(monomial_field(1.0, {-2: 1}, 1)) == 1.0


def test_norm_sq_shifted_support():
    """r^{-3} on r >= 2 gives ∫_2^∞ r^{-4} dr = 1/24."""
    y = monomial_field(2.0, {-3: 1}, 2)
    assert norm_sq(y) == pytest.approx(1 / 24, rel=1e-15)
    assert y.terms[HarmonicIndex(l=2)].norm_sq_exact() == Fraction(1, 24)


def test_norm_sq_zero_field():
    """Empty field has norm 0."""
    assert norm_sq(HarmonicField.zero(1.0)) == 0.0


def test_norm_sq_not_square_integrable():
    """r^{-1} has infinite norm with weight r²."""
    with pytest.raises(NonSquareIntegrableError):
        norm_sq(monomial_field(1.0, {-1: 1}, 1))


def test_norm_additive_over_disjoint_indices():
    """Disjoint harmonic sets are orthogonal."""
    a = monomial_field(1.0, {-2: 1, -4: 3}, 1)
    b = monomial_field(1.0, {-3: 2}, 2, 1)
    assert norm_sq(a.plus(b)) == pytest.approx(norm_sq(a) + norm_sq(b), abs=1e-12)
    assert inner(a, b) == 0.0


def test_sampled_norm_matches_monomial():
    """Adaptive quadrature on the sampled form agrees with the closed form."""
    mono = RadialMonomialSum(support_radius=1.0, terms={-2: 1, -3: -0.5})
    sampled = mono.to_sampled(4.0)
    assert sampled.norm_sq() == pytest.approx(mono.norm_sq(), rel=1e-10)


def test_evaluate_vanishes_inside_ball():
    """Points with |x| < ξ evaluate to exactly 0."""
    y = monomial_field(1.5, {-2: 1}, 1)
    rng = np.random.default_rng(0)
    points = rng.normal(size=(50, 3))
    points *= (rng.uniform(0.0, 1.49, 50) / np.linalg.norm(points, axis=1))[:, None]
    assert np.all(y.evaluate(points) == 0.0)


@pytest.mark.parametrize(
    "coefficient, a, l, expected",
    [(1, -2, 1, (0, -4)), (1, -2, 3, (-10, -4)), (2, -4, 3, (0, -6)), (1, 2, 0, (6, 0))],
)
def test_laplacian_symbolic(coefficient, a, l, expected):
    """Δ(c r^a Y_l) = c[a(a+1) - l(l+1)] r^{a-2} Y_l."""
    assert laplacian_symbolic(coefficient, a, l) == [expected]


def test_laplacian_harmonic_exponent():
    """r^{-l-1} Y_l is harmonic for every l."""
    for l in range(8):
        ((c, _),) = laplacian_symbolic(1, -l - 1, l)
        assert c == 0


def _fd_laplacian(y, x, h=1e-3):
    total = -6.0 * y.evaluate(x[None, :])[0]
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        total += y.evaluate((x + step)[None, :])[0] + y.evaluate((x - step)[None, :])[0]
    return total / h**2


def test_laplacian_matches_finite_differences():
    """Symbolic Laplacian agrees with the 7-point stencil on random terms."""
    rng = np.random.default_rng(7)
    for _ in range(20):
        l = int(rng.integers(0, 5))
        m = int(rng.integers(-l, l + 1))
        a = -int(rng.integers(1, 6))
        y = monomial_field(0.5, {a: 1}, l, m)
        lap = laplacian_field(y)
        x = rng.normal(size=3)
        x *= rng.uniform(1.5, 2.5) / np.linalg.norm(x)
        expected = lap.evaluate(x[None, :])[0]
        assert _fd_laplacian(y, x) == pytest.approx(expected, abs=1e-4 * max(1.0, abs(expected)))


def test_radial_derivative_monomial():
    """d/dr r^{-2} = -2 r^{-3}."""
    y = monomial_field(1.0, {-2: 1}, 1)
    dy = radial_derivative(y).terms[HarmonicIndex(l=1)]
    assert dy.terms == {-3: Fraction(-2)}


def test_radial_derivative_of_cubed_polynomial_at_two():
    """(1/r)p(1/r)³ has slope -1/4 on both sides of r = 2."""
    # (3/r - 4/r³)³ / r expanded
    profile = RadialMonomialSum(support_radius=1.0, terms={-4: 27, -6: -108, -8: 144, -10: -64})
    slope = profile.derivative(1)
    assert slope.evaluate_exact(2) == Fraction(-1, 4)
    left, right = slope.one_sided(2.0)
    assert left == pytest.approx(-0.25, abs=1e-14)
    assert right == pytest.approx(-0.25, abs=1e-14)


def test_radial_derivative_order_three_unsupported():
    """Only orders 1 and 2 exist."""
    with pytest.raises(UnsupportedProfileError, match="order 3"):
        radial_derivative(monomial_field(1.0, {-2: 1}, 1), 3)


def test_one_sided_values_at_jump():
    """A piece starting at ξ0 has left value 0 and right value g(ξ0⁺)."""
    profile = bump_profile(1.0, 2.0, power=1).scaled(2.0)
    left, right = profile.one_sided(1.5)
    assert left == pytest.approx(right)
    sampled = SampledRadialProfile.from_polynomials([1.0, 2.0], [[3.0]])
    assert sampled.one_sided(1.0) == (0.0, 3.0)


def test_sampled_derivative_without_callback():
    """Derivatives of a piece without callbacks are rejected."""
    piece = ProfilePiece(start=0.0, end=1.0, value=lambda r: r)
    with pytest.raises(UnsupportedProfileError, match="no derivative"):
        piece.derivative()


def test_monomial_terms_accept_pairs():
    """Terms may be given as (c, a) pairs or {"c", "a"} dicts; zeros are dropped."""
    a = RadialMonomialSum(support_radius=1.0, terms=[(3, -2), (0, -5)])
    b = RadialMonomialSum(support_radius=1.0, terms=[{"c": 3, "a": -2}])
    assert a == b
    assert a.terms == {-2: Fraction(3)}


def test_field_json_round_trip():
    """HarmonicField JSON keeps ξ, indices and monomials."""
    y = monomial_field(1.0, {-2: 3, -4: -4}, 3, -1)
    data = y.to_json_dict()
    assert data["xi"] == 1.0
    assert data["terms"][0]["profile"] == {
        "kind": "monomial",
        "xi": 1.0,
        "terms": [{"c": 3.0, "a": -2}, {"c": -4.0, "a": -4}],
    }
    assert HarmonicField.from_json_dict(data) == y


def test_profile_support_validated():
    """Profiles may not reach inside the excluded ball."""
    with pytest.raises(ValueError, match="inside"):
        HarmonicField(
            support_radius=2.0,
            terms={HarmonicIndex(l=0): RadialMonomialSum(support_radius=1.0, terms={-2: 1})},
        )
