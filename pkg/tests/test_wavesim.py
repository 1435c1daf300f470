from math import pi, sqrt

import numpy as np
import pytest

from unobs.checks import JUMP_ALPHA
from unobs.dspace import PolyClassP, basis_element
from unobs.errors import DomainError
from unobs.fields import HarmonicField
from unobs.harmonics import AngularExpansion, HarmonicIndex
from unobs.radon import observation_at
from unobs.wavesim import (
    bump_profile,
    cone_radius,
    convergence_order,
    extract_jump_vr,
    field_kirchhoff,
    jump_field,
    kirchhoff_eval,
    kirchhoff_harmonic,
    limit_observation,
    mean_value_limit,
    observed_jump,
    predicted_jump,
    radial_dalembert,
)

ALPHA = AngularExpansion(
    band_limit=2, coefficients={HarmonicIndex(l=0): 1.0, HarmonicIndex(l=2, m=1): 0.5}
)


def bump_field(l=0, m=0):
    return HarmonicField(support_radius=1.0, terms={HarmonicIndex(l=l, m=m): bump_profile(1.0, 2.0)})


def test_negative_time_required():
    """The dual system only runs for t < 0."""
    with pytest.raises(DomainError, match="negative"):
        kirchhoff_harmonic(bump_profile(1.0, 2.0), 0, 1.5, 0.0)


def test_mean_value_limit():
    """v(x, t)/t tends to y(x)."""
    y = bump_field()
    x = np.array([0.0, 0.0, 1.5])
    assert mean_value_limit(y, x, -1e-3) == pytest.approx(1.0 / sqrt(4.0 * pi), rel=1e-5)


def test_radial_kirchhoff_matches_sphere_quadrature():
    """Per-harmonic reduction agrees with direct averaging over the sphere."""
    y = bump_field(2, 1)
    x = np.array([0.6, -1.2, 1.1])
    assert field_kirchhoff(y, x, -0.5) == pytest.approx(kirchhoff_eval(y, x, -0.5), abs=1e-8)


@pytest.mark.parametrize(
    "x, t",
    [([0.0, 0.0, 0.2], -0.3), ([0.3, -0.4, 5.0], -1.0), ([0.0, 1.5, 0.0], -6.0)],
)
def test_huygens_support(x, t):
    """v vanishes when the sphere |γ - x| = |t| misses 1 <= |γ| <= 2."""
    y = bump_field(2, -1)
    assert field_kirchhoff(y, x, t) == 0.0
    assert kirchhoff_eval(y, x, t) == 0.0


@pytest.mark.parametrize("r, t", [(1.5, -0.3), (0.8, -1.0), (2.5, -2.0)])
def test_degree_zero_matches_dalembert(r, t):
    """For l = 0 Kirchhoff reduces to the odd-extension d'Alembert formula."""
    profile = bump_profile(1.0, 2.0, power=4)
    assert kirchhoff_harmonic(profile, 0, r, t) == pytest.approx(radial_dalembert(profile, r, t), abs=1e-5)


@pytest.mark.parametrize("xi0", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("t", [-0.5, -1.0, -2.0, -4.0])
def test_jump_on_outgoing_cone(xi0, t):
    """∂v/∂r jumps by ξ0α/(2(ξ0 - t)) across r = ξ0 - t for Y_1^0, Y_2^1 and Y_5^3."""
    records = extract_jump_vr(jump_field(xi0, JUMP_ALPHA), xi0, t)
    assert len(records) == 3
    for record in records:
        assert not record.inconclusive
        assert record.ratio == pytest.approx(1.0, abs=1e-2)
        assert record.literal_ratio == pytest.approx(-0.5, abs=1e-2)


@pytest.mark.parametrize("t", [-0.5, -2.0])
def test_jump_on_incoming_cone(t):
    """Across r = |t + ξ0| the sign depends on the side of the focus."""
    records = extract_jump_vr(jump_field(1.0, ALPHA), 1.0, t, cone="C2")
    for record in records:
        assert record.ratio == pytest.approx(1.0, abs=2e-2)
        assert record.literal_ratio is None


def test_predicted_jump_branches():
    """C2 flips sign with (-1)^l after the focus."""
    assert predicted_jump(1.0, -0.5, 1.0, 0, "C2") == pytest.approx(-1.0)
    assert predicted_jump(1.0, -3.0, 1.0, 1, "C2") == pytest.approx(-0.25)
    assert predicted_jump(1.0, -3.0, 1.0, 2, "C2") == pytest.approx(0.25)
    assert predicted_jump(2.0, -2.0, 1.0, 0, "C1") == pytest.approx(0.25)


def test_cone_through_origin():
    """The incoming cone hits r = 0 at t = -ξ0."""
    with pytest.raises(DomainError, match="origin"):
        cone_radius(1.0, -1.0, "C2")


def test_observed_jump_rules_out_membership():
    """A jump of y by α at ξ0 makes Oy jump by ξ0α, so y is observable."""
    y = jump_field(1.0, AngularExpansion.single(2, 1, 0.5))
    result = observed_jump(y, xi=0.5, xi0=1.0)
    (record,) = result.records
    assert record.ratio == pytest.approx(1.0, abs=1e-8)
    assert record.literal_prediction == pytest.approx(-0.5)
    assert result.not_in_D
    assert result.verdict == "y ∉ D^0.5"


def test_observed_jump_silent_on_members():
    """Members of D^ξ show no jump."""
    y = basis_element(0.5, PolyClassP.monomial(2), AngularExpansion.single(2))
    result = observed_jump(y, xi=0.5, xi0=1.0)
    assert not result.not_in_D
    assert result.verdict == "no jump observed"


def test_observed_jump_needs_outer_radius():
    """ξ must lie below ξ0."""
    with pytest.raises(DomainError):
        observed_jump(jump_field(1.0, ALPHA), xi=1.0, xi0=1.0)


def test_limit_definition_converges_at_first_order():
    """s·[v_t + v_r] along incoming rays tends to Oy like 1/s."""
    y = HarmonicField(support_radius=1.0, terms={HarmonicIndex(l=1): bump_profile(1.0, 2.0, power=4)})
    omega = [0.0, 0.0, 1.0]
    scales = [10.0, 20.0, 40.0]
    target = observation_at(y, 1.5, omega)
    values = [limit_observation(y, 1.5, omega, s) for s in scales]
    assert abs(values[-1] - target) < abs(values[0] - target)
    assert convergence_order(values, target, scales) > 0.9


def test_convergence_order_of_exact_sequence():
    """Errors 1/s² give order 2."""
    scales = [1.0, 2.0, 4.0, 8.0]
    values = [3.0 + 1.0 / s**2 for s in scales]
    assert convergence_order(values, 3.0, scales) == pytest.approx(2.0)
