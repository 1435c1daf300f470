from math import pi, sqrt

import numpy as np
import pytest
from pydantic import ValidationError

from unobs.errors import BandLimitError, DomainError
from unobs.harmonics import (
    AngularExpansion,
    AngularGrid,
    HarmonicIndex,
    analyze,
    beltrami_apply,
    eval_harmonic,
    eval_legendre,
    eval_legendre_derivative,
    legendre_coefficients,
    real_harmonics,
    rotation_to,
    synthesize,
)


@pytest.mark.parametrize(
    "l, x, expected", [(1, 0.5, 0.5), (2, 1.0, 1.0), (3, 0.5, -0.4375), (7, -1.0, -1.0)]
)
def test_eval_legendre_values(l, x, expected):
    """P_l at known points."""
    assert eval_legendre(l, x) == pytest.approx(expected, abs=1e-15)


def test_eval_legendre_matches_closed_forms():
    """Recurrence agrees with closed forms for l <= 5."""
    x = np.linspace(-1.0, 1.0, 100)
    closed = [
        np.ones_like(x),
        x,
        (3 * x**2 - 1) / 2,
        (5 * x**3 - 3 * x) / 2,
        (35 * x**4 - 30 * x**2 + 3) / 8,
        (63 * x**5 - 70 * x**3 + 15 * x) / 8,
    ]
    for l, values in enumerate(closed):
        assert np.max(np.abs(eval_legendre(l, x) - values)) < 1e-13


def test_eval_legendre_outside_interval():
    """Arguments beyond [-1, 1] are rejected."""
    with pytest.raises(DomainError, match="outside"):
        eval_legendre(2, 1.1)


def test_legendre_derivative_and_coefficients():
    """P_3' = (15x² - 3)/2 and P_3 = (5x³ - 3x)/2 exactly."""
    x = np.linspace(-1.0, 1.0, 11)
    assert np.allclose(eval_legendre_derivative(3, x), (15 * x**2 - 3) / 2, atol=1e-14)
    assert legendre_coefficients(3) == (0, -1.5, 0, 2.5)


def test_harmonic_index_order_bound():
    """|m| <= l is enforced."""
    with pytest.raises(ValidationError, match="exceeds degree"):
        HarmonicIndex(l=2, m=3)


def test_y00_is_constant():
    """Y_0^0 = 1/√(4π)."""
    for theta, phi in [(0.0, 0.0), (1.0, 2.0), (pi, -1.0)]:
        assert eval_harmonic(HarmonicIndex(l=0), theta, phi) == pytest.approx(1 / sqrt(4 * pi))


@pytest.mark.parametrize(
    "a, b, expected",
    [((3, 1), (3, 1), 1.0), ((3, 1), (5, -2), 0.0), ((4, -4), (4, -4), 1.0), ((2, 0), (6, 0), 0.0)],
)
def test_orthonormality_on_grid(a, b, expected):
    """Discrete inner products reproduce δ_ll'δ_mm'."""
    grid = AngularGrid.gauss(6)
    ya = eval_harmonic(HarmonicIndex(l=a[0], m=a[1]), grid.theta, grid.phi)
    yb = eval_harmonic(HarmonicIndex(l=b[0], m=b[1]), grid.theta, grid.phi)
    assert grid.integrate(ya * yb) == pytest.approx(expected, abs=1e-10)


def test_grid_weights_sum_to_four_pi():
    """Weights integrate the constant 1 to the area of the sphere."""
    assert AngularGrid.gauss(10).weights.sum() == pytest.approx(4 * pi, abs=1e-12)


def test_full_gram_matrix():
    """All harmonics up to L = 8 are orthonormal under the grid rule."""
    grid = AngularGrid.gauss(8)
    table = real_harmonics(8, grid.theta, grid.phi)
    gram = (table * grid.weights) @ table.T
    assert np.max(np.abs(gram - np.eye(81))) < 1e-10


def test_round_trip_single():
    """synthesize then analyze returns {Y_6^2: 1}."""
    grid = AngularGrid.gauss(6)
    expansion = AngularExpansion.single(6, 2)
    back = analyze(synthesize(expansion, grid), grid, 6, cutoff=1e-12)
    assert back.indices() == [HarmonicIndex(l=6, m=2)]
    assert back.coefficient(6, 2) == pytest.approx(1.0, abs=1e-10)


def test_round_trip_random():
    """Random expansion with L = 12 survives the round trip."""
    rng = np.random.default_rng(3)
    coefficients = {
        HarmonicIndex(l=l, m=m): float(rng.normal()) for l in range(13) for m in range(-l, l + 1)
    }
    expansion = AngularExpansion(band_limit=12, coefficients=coefficients)
    grid = AngularGrid.gauss(12)
    back = analyze(synthesize(expansion, grid), grid, 12)
    for idx, c in coefficients.items():
        assert back.coefficients[idx] == pytest.approx(c, abs=1e-10)


def test_zero_expansion_synthesizes_to_zero():
    """Empty expansion gives zero samples."""
    grid = AngularGrid.gauss(3)
    assert np.all(synthesize(AngularExpansion(band_limit=3), grid) == 0.0)


def test_band_limit_errors():
    """Indices above L and grids below L are rejected."""
    # validators surface as ValidationError
    with pytest.raises(ValidationError, match="exceeds band limit"):
        AngularExpansion(band_limit=2, coefficients={HarmonicIndex(l=3): 1.0})
    with pytest.raises(BandLimitError):
        analyze(np.zeros(AngularGrid.gauss(2).size), AngularGrid.gauss(2), 4)
    with pytest.raises(BandLimitError):
        synthesize(AngularExpansion.single(5), AngularGrid.gauss(4))


@pytest.mark.parametrize(
    "l, m, value, expected", [(6, 2, 1.0, -42.0), (0, 0, 3.0, 0.0), (9, 0, 2.0, -180.0)]
)
def test_beltrami_apply(l, m, value, expected):
    """Coefficients scale by -l(l+1)."""
    out = beltrami_apply(AngularExpansion.single(l, m, value))
    assert out.coefficient(l, m) == expected


def test_beltrami_twice():
    """Applying twice multiplies by l²(l+1)²."""
    e = AngularExpansion(
        band_limit=4, coefficients={HarmonicIndex(l=2, m=1): 1.5, HarmonicIndex(l=4, m=-3): -2.0}
    )
    twice = beltrami_apply(beltrami_apply(e))
    assert twice.coefficient(2, 1) == 36 * 1.5
    assert twice.coefficient(4, -3) == 400 * -2.0


def test_high_degree_harmonics_stay_finite():
    """Normalized recurrence is stable around l = 300."""
    theta = np.linspace(0.01, pi - 0.01, 50)
    values = eval_harmonic(HarmonicIndex(l=303, m=5), theta, 0.3)
    assert np.all(np.isfinite(values))
    assert np.max(np.abs(values)) < 10.0


def test_rotation_to_is_orthonormal():
    """Frame is orthonormal and ends with the requested direction."""
    frame = rotation_to([1.0, 2.0, -2.0])
    assert np.allclose(frame.T @ frame, np.eye(3))
    assert np.allclose(frame[:, 2], np.array([1.0, 2.0, -2.0]) / 3.0)


def test_aligned_grid_keeps_exactness():
    """A rotated grid still integrates harmonic products exactly."""
    grid = AngularGrid.gauss(5).aligned_with([0.3, -0.4, 0.8])
    y = eval_harmonic(HarmonicIndex(l=3, m=-2), grid.theta, grid.phi)
    assert grid.integrate(y * y) == pytest.approx(1.0, abs=1e-10)


def test_expansion_json_round_trip():
    """JSON layout {"L", "coeffs": [{l, m, c}]} is read back unchanged."""
    e = AngularExpansion(band_limit=3, coefficients={HarmonicIndex(l=3, m=-1): 0.25})
    data = e.to_json_dict()
    assert data == {"L": 3, "coeffs": [{"l": 3, "m": -1, "c": 0.25}]}
    assert AngularExpansion.from_json_dict(data) == e
