import math

import numpy as np
import pytest

from heckebench.acceptance import calibrated_basis
from heckebench.eigen import eigenbasis
from heckebench.observables import (
    DEFAULT_LEVEL,
    JNearForm,
    a0_main_term,
    gram_matrix,
    huang_xu_ratio,
    incomplete_eisenstein_coeff_contour,
    incomplete_eisenstein_coeffs,
    incomplete_eisenstein_coeffs_direct,
    inner_product,
    mass_observable,
    mellin_gamma_identity,
    norm_rule,
    petersson_norm_calibrate,
    poincare_folded_lhs,
    poincare_strip_lhs,
    sym_square_crosscheck,
    unfold_poincare_rhs,
)
from heckebench.windows import RadialWindow, TestFunction


@pytest.fixture(scope="module")
def window():
    return RadialWindow.for_scale(1.0)


def test_calibration_remeasured_on_a_finer_rule(delta_form):
    est = inner_product(None, delta_form, delta_form, norm_rule(12, DEFAULT_LEVEL + 1))
    assert est.value == pytest.approx(1.0, abs=1e-6)


def test_distinct_forms_are_orthogonal(basis24):
    G = gram_matrix(basis24, norm_rule(24, DEFAULT_LEVEL + 1))
    assert abs(G.value[0, 1]) < 1e-6
    assert np.max(np.abs(G.value - np.eye(2))) < 1e-6


def test_calibration_against_symmetric_square_series():
    B = eigenbasis(12, 200_000)
    petersson_norm_calibrate(B)
    chk = sym_square_crosscheck(B[0], X=1e4)
    assert chk.relative_deviation < 0.02


def test_forms_of_different_weight_do_not_pair(delta_form, basis24):
    with pytest.raises(ValueError):
        inner_product(None, delta_form, basis24[0])


@pytest.mark.parametrize("m", [1, 2, -1])
def test_poincare_unfolding(m, window, delta_form):
    rhs = unfold_poincare_rhs(m, window, delta_form, delta_form)
    strip = poincare_strip_lhs(m, window, delta_form, delta_form).value
    assert abs(strip - rhs) < 1e-6 * abs(rhs)


def test_poincare_folded_side(window, basis24):
    f, g = basis24[0], basis24[1]
    rhs = unfold_poincare_rhs(1, window, f, g)
    folded = poincare_folded_lhs(1, window, f, g).value
    assert abs(folded - rhs) < 1e-6 * max(abs(rhs), 1e-3)


def test_unfolding_needs_nonzero_shift(window, delta_form):
    with pytest.raises(ValueError):
        unfold_poincare_rhs(0, window, delta_form, delta_form)


@pytest.mark.parametrize("n,m,k", [(1, 1, 28), (2, 1, 12), (1, 0, 40)])
def test_mellin_gamma_identity(n, m, k, window):
    direct, contour = mellin_gamma_identity(window, n, m, k)
    assert abs(contour - direct) < 1e-8 * abs(direct)


def test_incomplete_eisenstein_coefficients(window):
    y = 1.3
    direct = incomplete_eisenstein_coeffs_direct(window, y)
    for ell in (0, 1, -2):
        c = incomplete_eisenstein_coeff_contour(window, ell, y)
        assert abs(c.value - direct[ell]) < 1e-8
        assert c.truncation < 1e-10
    assert direct[2] == pytest.approx(direct[-2], abs=1e-14)
    assert incomplete_eisenstein_coeffs(window, 1, y, "direct") == pytest.approx(direct[1])
    with pytest.raises(ValueError):
        incomplete_eisenstein_coeffs(window, 1, y, "guess")


def test_zero_coefficient_cancels_above_the_support(window):
    # at y = 30 no coset reaches supp Psi, so the residue term must be cancelled
    # exactly by the integral along the half line
    c = incomplete_eisenstein_coeff_contour(window, 0, 30.0).value
    assert a0_main_term(window) > 0.1
    assert abs(c) < 1e-9


def test_j_near_form_validation():
    with pytest.raises(ValueError):
        JNearForm(24, [(1, 1.0), (1, 0.0)])
    with pytest.raises(ValueError):
        JNearForm(24, [(1, 1.0), (2, 1.0)])
    F = JNearForm.from_json(24, [{"index": 1, "re": 3.0}, {"index": 2, "im": 4.0}])
    assert F.J == 2
    assert sum(abs(c) ** 2 for _, c in F.components) == pytest.approx(1.0)


def test_mass_observable_two_routes(basis24):
    psi = TestFunction.default(1.0)
    F = JNearForm.normalized(24, [(1, 1.0), (2, 1j)])
    obs = mass_observable(F, psi, basis24)
    assert obs.route_gap < 1e-9
    assert obs.psi_mass > 0 and math.isfinite(obs.discrepancy)


def test_single_form_mass_matches_inner_product(basis24):
    psi = TestFunction.default(1.0)
    F = JNearForm(24, [(2, 1.0)])
    obs = mass_observable(F, psi, basis24)
    direct = inner_product(psi, basis24[1], basis24[1]).value
    assert obs.direct.value == pytest.approx(direct, rel=1e-12)


def test_huang_xu_ratio_is_reported():
    r = huang_xu_ratio(2.0)
    assert math.isfinite(r) and r > 0


def test_smoothed_probe_zero_mode_two_routes(delta_form, window):
    from heckebench.observables import smoothed_eisenstein_probe
    from heckebench.windows import h_window
    probe = smoothed_eisenstein_probe(2.0, h_window(), window, delta_form, delta_form, L=8)
    assert abs(probe.i0_from_s - probe.modes[0]) < 1e-8 * abs(probe.modes[0])
    assert probe.relative_deviation < 1e-6
    # modes beyond |l| = 8 are negligible: the outermost ones are already tiny
    assert abs(probe.modes[8]) < 1e-6 * abs(probe.series)


def test_rankin_selberg_diagonal_weight12():
    from heckebench.observables import rankin_selberg_check
    f = calibrated_basis(12, 20000)[0]
    chk = rankin_selberg_check(f, f)
    assert chk.relative_deviation < 1e-6
    assert 0 < chk.tail_estimate < 1e-3 * chk.series
