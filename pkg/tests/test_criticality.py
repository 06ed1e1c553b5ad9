import math

import numpy as np
import pytest

from model.criticality import (
    QTP_AMPLITUDE,
    Side,
    critical_slope,
    determinant_scaling,
    entropy_divergence,
    entropy_resonance,
    gap_entropy_relation,
    gap_scaling,
    make_approach,
    normal_direction,
    order_parameter_amplitude,
    order_parameter_scaling,
    perpendicular_foot,
    resonance_offset,
    second_order_target,
    tricritical_target,
)
from model.errors import DomainError
from model.meanfield import TransitionOrder, first_order_boundary
from model.params import X_TRICRITICAL

EXPONENT_TOL = 0.005
AMPLITUDE_RTOL = 0.01
BETA_RTOL = 0.02
RESIDUAL_TOL = 0.01
LAMBDAS = (0.1, 1.0, 10.0)


@pytest.mark.parametrize("x_c", [0.0, 0.2, 0.3, 0.44])
def test_normal_direction_is_perpendicular(x_c):
    for side in Side:
        dx, dy = normal_direction(x_c, side)
        assert math.hypot(dx, dy) == pytest.approx(1.0)
        assert dx + critical_slope(x_c) * dy == pytest.approx(0.0, abs=1e-10)


def test_perpendicular_foot_round_trip():
    target = second_order_target(0.3)
    dx, dy = normal_direction(0.3, Side.SUPERRADIANT)
    foot, n = perpendicular_foot(0.3 + 1e-4 * dx, target.y_c + 1e-4 * dy)
    assert foot.x_c == pytest.approx(0.3, abs=1e-8)
    assert n == pytest.approx(1e-4, rel=1e-6)


def test_perpendicular_foot_at_tricritical_point():
    dx, dy = normal_direction(X_TRICRITICAL, Side.SUPERRADIANT)
    foot, n = perpendicular_foot(X_TRICRITICAL + 1e-3 * dx, 1.25 + 1e-3 * dy)
    assert foot.x_c == pytest.approx(X_TRICRITICAL, abs=1e-8)
    assert n == pytest.approx(1e-3, rel=1e-6)


def test_perpendicular_foot_rejects_far_points():
    with pytest.raises(DomainError):
        perpendicular_foot(0.3, 3.0)


def test_make_approach_rejects_first_order_target():
    with pytest.raises(DomainError):
        make_approach(first_order_boundary(0.6), Side.SUPERRADIANT)


def test_make_approach_rejects_non_positive_distance():
    with pytest.raises(DomainError):
        make_approach(second_order_target(0.3), Side.NORMAL, [0.0, 1e-6])


def test_second_order_target_at_tricritical_abscissa():
    assert second_order_target(X_TRICRITICAL).order == TransitionOrder.TRICRITICAL


def test_generic_order_parameter_exponent():
    fit = order_parameter_scaling(make_approach(second_order_target(0.3), Side.SUPERRADIANT))
    assert fit.exponent == pytest.approx(0.5, abs=EXPONENT_TOL)
    assert fit.amplitude == pytest.approx(fit.reference, rel=AMPLITUDE_RTOL)
    assert fit.r_squared > 0.999
    assert fit.window[1] / fit.window[0] >= 1e3


def test_tricritical_order_parameter_exponent():
    fit = order_parameter_scaling(make_approach(tricritical_target(), Side.SUPERRADIANT))
    assert fit.exponent == pytest.approx(0.25, abs=EXPONENT_TOL)
    assert fit.amplitude == pytest.approx(5.0 * math.sqrt(21.0) / 6.0, rel=AMPLITUDE_RTOL)
    assert fit.reference == QTP_AMPLITUDE


def test_order_parameter_needs_superradiant_side():
    with pytest.raises(DomainError):
        order_parameter_scaling(make_approach(second_order_target(0.3), Side.NORMAL))


def test_generic_amplitude_closed_form():
    target = second_order_target(0.3)
    y_c = 1.0 / 0.91
    expected = 2.0 * math.sqrt(y_c ** -2 + 4.0 * 0.09 * y_c ** 2) / (1.0 - 0.45)
    assert order_parameter_amplitude(target) == pytest.approx(expected)


@pytest.mark.parametrize("target, side, beta", [
    (second_order_target(0.3), Side.NORMAL, 1.0),
    (second_order_target(0.3), Side.SUPERRADIANT, 2.0),
    (tricritical_target(), Side.SUPERRADIANT, 4.0),
])
def test_determinant_beta(target, side, beta):
    fit = determinant_scaling(make_approach(target, side), 1.0)
    assert fit.beta == pytest.approx(beta, rel=BETA_RTOL)
    assert fit.reference == beta
    assert fit.exponent == pytest.approx(1.0, abs=0.01)


@pytest.mark.parametrize("lam", LAMBDAS)
@pytest.mark.parametrize("target, side", [
    (second_order_target(0.3), Side.NORMAL),
    (second_order_target(0.3), Side.SUPERRADIANT),
    (tricritical_target(), Side.SUPERRADIANT),
])
def test_universal_gap_entropy_relation(target, side, lam):
    app = make_approach(target, side, [1e-8])
    x, y = app.point(1e-8)
    residual = gap_entropy_relation(x, y, lam)
    assert residual is not None
    assert abs(residual) < RESIDUAL_TOL


def test_universal_relation_residual_shrinks():
    app = make_approach(second_order_target(0.3), Side.NORMAL, [1e-5, 1e-6, 1e-7, 1e-8])
    residuals = [abs(gap_entropy_relation(*app.point(n), 1.0)) for n in sorted(app.distances, reverse=True)]
    assert all(b <= 1.1 * a for a, b in zip(residuals, residuals[1:]))


def test_relation_has_no_residual_on_the_line():
    assert gap_entropy_relation(0.3, 1.0 / 0.91, 1.0) is None


def test_entropy_resonance_peaks_at_unit_ratio():
    lambdas = np.geomspace(0.01, 100.0, 41)
    best, profile = entropy_resonance(second_order_target(0.3), 1e-8, lambdas)
    assert abs(math.log10(best)) <= 0.1 + 1e-9
    offsets = resonance_offset(profile)
    assert max(offsets) - min(offsets) < 0.02


GAP_TARGETS = [
    (second_order_target(0.0), Side.NORMAL),
    (second_order_target(0.0), Side.SUPERRADIANT),
    (second_order_target(0.3), Side.NORMAL),
    (second_order_target(0.3), Side.SUPERRADIANT),
    (tricritical_target(), Side.NORMAL),
    (tricritical_target(), Side.SUPERRADIANT),
]


@pytest.mark.parametrize("target, side", GAP_TARGETS)
def test_gap_exponent(target, side):
    fit = gap_scaling(make_approach(target, side), 1.0)
    assert fit.exponent == pytest.approx(0.5, abs=EXPONENT_TOL)
    assert fit.reference == 0.5


@pytest.mark.parametrize("target, side", GAP_TARGETS)
def test_gap_exponent_is_stable_under_window_halving(target, side):
    full = gap_scaling(make_approach(target, side, np.geomspace(1e-9, 1e-5, 17)), 1.0)
    half = gap_scaling(make_approach(target, side, np.geomspace(1e-9, 1e-7, 9)), 1.0)
    assert abs(full.exponent - half.exponent) < 0.002


def test_entropy_resonance_drop_at_large_ratio():
    _, profile = entropy_resonance(second_order_target(0.2), 1e-8, [1.0, 10.0])
    (_, s_one), (_, s_ten) = profile
    assert s_one - s_ten == pytest.approx(0.5 * math.log(10.1 / 2.0), abs=0.005)


@pytest.mark.parametrize("against, slope", [("distance", 0.25), ("gap", 0.5)])
def test_entropy_divergence_slopes(against, slope):
    app = make_approach(second_order_target(0.3), Side.NORMAL)
    fit = entropy_divergence(app, 1.0, against)
    assert fit.exponent == pytest.approx(slope, abs=0.01)
    assert fit.reference == slope


def test_entropy_divergence_rejects_unknown_abscissa():
    with pytest.raises(DomainError):
        entropy_divergence(make_approach(second_order_target(0.3), Side.NORMAL), 1.0, "coupling")
