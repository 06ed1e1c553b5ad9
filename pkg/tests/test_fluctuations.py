import math

import numpy as np
import pytest

from model.errors import InstabilityError
from model.fluctuations import (
    analyze,
    build_omega_squared,
    determinant_sq,
    dressed_frequencies,
    entropy_from_determinant,
    entropy_from_gamma,
    gap_from_determinant,
    matrix_sqrt,
    spectrum,
    stationarity_residual,
    zero_point_shift,
)
from model.meanfield import Phase, critical_line, first_order_boundary, minimize_f
from model.params import ModelParams

SPECTRUM_TOL = 1e-8
LAMBDAS = (0.1, 1.0, 10.0)


def test_dressed_frequencies_undressed_atoms():
    d = dressed_frequencies(0.0, 0.0)
    assert (d.omega2, d.omega3, d.theta2, d.theta3) == (1.0, 1.0, 0.0, 0.0)


def test_dressed_frequencies_normal_phase_angles():
    d = dressed_frequencies(0.3, 0.0)
    assert d.omega2 == pytest.approx(1.0) and d.omega3 == pytest.approx(1.0)
    assert d.theta2 == pytest.approx(math.atan(0.3 / math.sqrt(0.91)))
    assert d.theta3 == pytest.approx(-d.theta2)


def test_dressed_frequencies_plain_dicke_minimum():
    d = dressed_frequencies(0.0, math.sqrt(3.0))
    assert d.omega2 == pytest.approx(2.0) and d.omega3 == pytest.approx(2.0)
    assert math.cos(d.theta2) == pytest.approx(0.5)


def test_omega_squared_couplings_at_plain_dicke_minimum():
    fr = build_omega_squared(ModelParams(0.0, 2.0, 1.0), math.sqrt(3.0))
    assert fr.omega_sq[0, 1] == pytest.approx(math.sqrt(2.0) / 2.0)
    assert fr.omega_sq[0, 2] == pytest.approx(math.sqrt(2.0) / 2.0)
    assert fr.omega_sq[1, 2] == 0.0 and fr.omega_sq[2, 1] == 0.0
    assert np.array_equal(fr.omega_sq, fr.omega_sq.T)


def test_determinant_identity_at_origin():
    lam = 1.3
    fr = build_omega_squared(ModelParams(0.3, 0.8, lam), 0.0)
    assert determinant_sq(fr) / lam ** 2 == pytest.approx(1.0 - 0.8 * 0.91, rel=1e-12)


def test_decoupled_limit():
    fr = analyze(ModelParams(0.0, 0.0, 0.7))
    assert np.allclose(np.diag(fr.omega_sq), [0.49, 1.0, 1.0])
    assert fr.gap == pytest.approx(0.7)
    assert np.allclose(fr.omega_sqrt, np.diag([0.7, 1.0, 1.0]))
    assert math.isinf(fr.gamma)
    assert fr.entropy == 0.0
    assert zero_point_shift(fr) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("lam", LAMBDAS)
@pytest.mark.parametrize("x_c", np.linspace(0.0, 0.44, 20))
def test_critical_line_spectrum(x_c, lam):
    x_c = float(x_c)
    fr = spectrum(build_omega_squared(ModelParams(x_c, critical_line(x_c), lam), 0.0))
    roots = np.sqrt(fr.eigenvalues_sq)
    expected = sorted([0.0, 1.0, math.sqrt(1.0 + lam * lam)])
    assert roots == pytest.approx(expected, abs=SPECTRUM_TOL)
    assert fr.gap == pytest.approx(0.0, abs=SPECTRUM_TOL)


def test_critical_line_entropy_is_flagged_divergent():
    fr = analyze(ModelParams(0.3, critical_line(0.3), 1.0), 0.0)
    assert fr.divergent
    assert math.isfinite(fr.entropy) and fr.entropy > 5.0


@pytest.mark.parametrize("lam", LAMBDAS)
def test_plain_dicke_normal_gap(lam):
    y = 0.5
    fr = analyze(ModelParams(0.0, y, lam))
    expected = 0.5 * (lam ** 2 + 1.0) - 0.5 * math.sqrt((lam ** 2 - 1.0) ** 2 + 4.0 * y * lam ** 2)
    assert fr.gap ** 2 == pytest.approx(expected, rel=1e-10)


def test_metastable_origin_is_unstable():
    with pytest.raises(InstabilityError):
        spectrum(build_omega_squared(ModelParams(0.0, 2.0, 1.0), 0.0))


def test_matrix_square_root_reproduces_matrix():
    fr = matrix_sqrt(spectrum(build_omega_squared(ModelParams(0.3, 0.8, 1.0), 0.0)))
    assert np.allclose(fr.omega_sqrt @ fr.omega_sqrt, fr.omega_sq, atol=1e-10)
    assert np.all(np.linalg.eigvalsh(fr.omega_sqrt) > 0.0)


@pytest.mark.parametrize("x, y, lam", [
    (0.3, 0.5, 1.0),
    (0.3, 2.0, 0.1),
    (0.0, 2.0, 10.0),
    (0.7, 2.5, 1.0),
])
def test_gaussian_state_invariants(x, y, lam):
    fr = analyze(ModelParams(x, y, lam))
    assert not fr.divergent
    assert fr.a_plus > fr.a_minus > 0.0
    assert fr.gamma > 0.0
    assert fr.entropy > 0.0
    assert np.all(fr.eigenvalues_sq > 0.0)
    assert list(fr.eigenvalues_sq) == sorted(fr.eigenvalues_sq)


def test_entropy_from_gamma_values():
    assert entropy_from_gamma(math.inf) == 0.0
    assert entropy_from_gamma(1.0) == pytest.approx(1.0406518, abs=1e-6)
    gammas = np.geomspace(1e-6, 20.0, 200)
    entropies = [entropy_from_gamma(g) for g in gammas]
    assert all(a > b for a, b in zip(entropies, entropies[1:]))


def test_small_gamma_limit():
    for gamma in (1e-3, 1e-5):
        assert entropy_from_gamma(gamma) - (1.0 - math.log(gamma)) == pytest.approx(0.0, abs=1e-3)


def test_near_critical_entropy_follows_determinant():
    p = ModelParams(0.3, critical_line(0.3) * (1.0 - 1e-8), 1.0)
    fr = analyze(p, 0.0)
    assert fr.entropy == pytest.approx(entropy_from_determinant(fr), abs=0.01)
    assert fr.gap == pytest.approx(gap_from_determinant(fr), rel=1e-3)


def test_stationarity_at_superradiant_minima():
    checked = 0
    for x in np.linspace(0.0, 0.9, 10):
        for y in np.linspace(1.2, 4.0, 10):
            p = ModelParams(float(x), float(y))
            solution = minimize_f(p)
            if solution.phase != Phase.SUPERRADIANT:
                continue
            assert abs(stationarity_residual(solution.z, p)) < 1e-9
            checked += 1
    assert checked > 50


def test_stable_at_global_minimum():
    for x in (0.0, 0.3, 0.6, 0.9):
        for y in (0.3, 0.9, 1.4, 3.0):
            for lam in LAMBDAS:
                fr = spectrum(build_omega_squared(ModelParams(x, y, lam), minimize_f(ModelParams(x, y)).z))
                assert fr.eigenvalues_sq[0] >= -1e-10


def test_finite_jumps_across_first_order_boundary():
    point = first_order_boundary(0.6)
    p = ModelParams(point.x_c, point.y_c, 1.0)
    normal = analyze(p, 0.0)
    superradiant = analyze(p, point.z_jump)
    assert abs(normal.gap - superradiant.gap) > 0.01
    assert abs(normal.entropy - superradiant.entropy) > 0.01
    for fr in (normal, superradiant):
        assert math.isfinite(fr.gap) and fr.gap > 0.0
        assert math.isfinite(fr.entropy)
