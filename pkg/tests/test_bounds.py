import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckebench.arith import primes_up_to
from heckebench.bounds import (
    DELTA1_PRESETS,
    decay_fit,
    exponent_objective,
    hecke_square_relation_check,
    mertens_check,
    optimize_exponent,
    parse_weights,
    prime_product_holo,
    prime_product_sound,
    shifted_convolution,
    watson_prefactor,
)
from heckebench.eigen import eigenbasis
from conftest import TAU

PRIMES_TO_12 = (2, 3, 5, 7, 11)


def tau_lambda(n):
    return TAU[n - 1] / n ** 5.5


def test_sound_product_delta_oracle(delta_form):
    expected = 1.0
    for p in PRIMES_TO_12:
        expected *= 1 - (tau_lambda(p) ** 2 - 1) / p
    r = prime_product_sound(delta_form, delta_form, 12, 0.0)
    assert r.value == pytest.approx(expected, rel=1e-12)
    assert r.path_gap < 1e-12 and not r.flagged


def test_holo_product_delta_oracle(delta_form):
    expected = 1.0
    for p in PRIMES_TO_12:
        expected *= 1 - 0.5 * (abs(tau_lambda(p)) - 1) ** 2 / p
    assert prime_product_holo(delta_form, delta_form, 12).value == pytest.approx(expected, rel=1e-12)


def test_trivial_products():
    # lambda(p^2) = 0 means lambda(p) = 1
    one = lambda p: 1.0
    assert prime_product_sound(one, one, 1000, 0.0).value == 1.0
    assert prime_product_holo(one, one, 1000).value == 1.0


def test_nonpositive_factor_is_floored_and_flagged():
    two = lambda p: 2.0
    r = prime_product_sound(two, two, 12, 0.5)        # factor at 2 is 1 - 3.5/2 < 0
    assert r.floored == [2, 3] and r.flagged
    assert r.value > 0


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 0.9), st.floats(0.01, 0.1))
@settings(max_examples=50, deadline=None)
def test_sound_product_decreases_in_delta1(a, b, d, step):
    f = lambda p: a if p % 4 == 1 else b
    g = lambda p: b
    lo = prime_product_sound(f, g, 200, d + step)
    hi = prime_product_sound(f, g, 200, d)
    if not (lo.flagged or hi.flagged):
        assert lo.value < hi.value


@given(st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=50, deadline=None)
def test_holo_product_lower_bound(a, b):
    f = lambda p: a
    g = lambda p: b if p % 3 else -b
    floor = math.prod(1 - 2 / p for p in primes_up_to(300) if p > 2)
    r = prime_product_holo(f, g, 300)
    assert 0 < r.value <= 1 + 1e-15
    # the p = 2 factor can reach 0; compare the odd part with prod (1 - 2/p)
    assert r.value / (1 - (0.25 * (abs(a) - 1) ** 2 + 0.25 * (abs(b) - 1) ** 2) / 2) >= floor * (1 - 1e-12)


@pytest.mark.parametrize("k", [24, 60, 100])
def test_log_and_direct_paths_agree(k):
    B = eigenbasis(k, 200)
    f, g = B[0], B[-1]
    for r in (prime_product_sound(f, g, k, 1e-3), prime_product_holo(f, g, k)):
        assert r.path_gap < 1e-12


def test_shifted_convolution_brute_force(delta_form):
    expected = sum(abs(tau_lambda(n) * tau_lambda(n + 1)) for n in range(1, 11))
    r = shifted_convolution(delta_form, delta_form, 1, 10)
    assert r.value == pytest.approx(expected, rel=1e-12)
    assert r.ratio > 0 and math.isfinite(r.ratio)
    diag = shifted_convolution(delta_form, delta_form, 0, 50)
    assert diag.value >= 1.0


def test_watson_prefactor():
    k = 30
    h0 = watson_prefactor(k, 0.0)
    assert h0 == pytest.approx(math.pi ** 3 * math.gamma(k - 0.5) ** 2 / (2 * math.gamma(k) ** 2), rel=1e-12)
    assert watson_prefactor(k, 7.5) == pytest.approx(watson_prefactor(k, -7.5), rel=1e-15)
    assert 2 * 200 * watson_prefactor(200, 0.0) / math.pi ** 3 == pytest.approx(1.0, rel=0.01)
    with pytest.raises(ValueError):
        watson_prefactor(2, 0.0)


def test_optimize_grc():
    r = optimize_exponent("grc")
    with mpmath.workprec(256):
        assert abs(r.L - (2 * mpmath.sqrt(3) - mpmath.mpf(7) / 2)) < mpmath.mpf(10) ** -70
    assert r.alpha_star == pytest.approx(math.sqrt(4 / 3) - 1, rel=1e-15)
    assert r.grid_ok and r.series_order == 0


def test_optimize_small_delta1_uses_series():
    r = optimize_exponent(DELTA1_PRESETS["soundararajan-thorner"])
    assert r.series_order >= 2
    assert -float(r.L) == pytest.approx(1.19209e-41, rel=1e-5)
    assert r.route_gap < 1e-30
    d = 9.765625e-21
    assert float(r.L) == pytest.approx(-d * d / 8 - d ** 3 / 32, rel=1e-15)
    assert r.grid_ok


def test_series_coefficients_against_extended_precision():
    d = mpmath.mpf("1e-9")
    with mpmath.workprec(400):
        exact = 2 * mpmath.sqrt(2 * (2 - d)) - 4 + d
        series = -d ** 2 / 8 - d ** 3 / 32 - 5 * d ** 4 / 512
        assert abs(exact - series) < d ** 5
        # a -d^3/16 cubic term would be off at order d^3
        assert abs(exact - (series - d ** 3 / 32)) > d ** 3 / 64


def test_optimize_zero_and_bounds():
    r = optimize_exponent(0)
    assert r.L == 0 and r.alpha_star == 0
    with pytest.raises(ValueError):
        optimize_exponent("1.5")
    with pytest.raises(ValueError):
        optimize_exponent("0.5", bits=64)


@given(st.floats(0, 1))
@settings(max_examples=25, deadline=None)
def test_alpha_star_range_and_sign(d):
    r = optimize_exponent(repr(d), bits=128)
    assert 0 <= r.alpha_star <= math.sqrt(2) - 1 + 1e-15
    assert r.L <= 0


def test_brute_force_inner_maximizer():
    # the completed square puts the inner max at (1 - alpha)/(1 + alpha)
    for alpha in (0.0, 0.2, 0.7):
        lam = np.linspace(0, 2, 2001)
        vals = exponent_objective(alpha, lam, (1 - alpha) / (1 + alpha), 0.5)
        assert lam[np.argmax(vals)] == pytest.approx((1 - alpha) / (1 + alpha), abs=1e-3)


def test_hecke_square_relation(delta_form):
    assert hecke_square_relation_check(delta_form, 23) < 1e-10
    zero = lambda p: 0.0
    assert hecke_square_relation_check(zero, 50, square=lambda p: -1.0) == 0.0
    two = lambda p: 2.0
    assert hecke_square_relation_check(two, 50, square=lambda p: 3.0) == 0.0
    assert hecke_square_relation_check(two, 50, square=lambda p: 2.0) == 1.0


def test_mertens_trivial_and_third_theorem():
    r0 = mertens_check(0.0)
    np.testing.assert_array_equal(r0.ratios, 1.0)
    r1 = mertens_check(1.0)
    assert r1.ratios[-1] == pytest.approx(math.exp(-np.euler_gamma), rel=0.02)
    assert r1.bounded


def test_mertens_negative_delta():
    # prod (1 + 1/p) / log x -> e^gamma * 6/pi^2 by the Euler product of zeta(2)
    r = mertens_check(-1.0)
    assert r.ratios[-1] == pytest.approx(6 * math.exp(np.euler_gamma) / math.pi ** 2, rel=0.01)
    assert r.bounded


def test_mertens_edge_cases():
    assert mertens_check(2.0).degenerate
    with pytest.raises(ValueError):
        mertens_check(2.5)
    with pytest.raises(ValueError):
        mertens_check(1.0, [1e8])


def test_decay_fit_exact_models():
    ks = [24, 28, 32, 36, 40, 44]
    assert decay_fit([(k, 3.0) for k in ks]).slope == pytest.approx(0.0, abs=1e-12)
    fit = decay_fit([(k, 1 / math.log(k)) for k in ks])
    assert fit.slope == pytest.approx(-1.0, abs=1e-6)
    assert np.max(np.abs(fit.residuals)) < 1e-12


def test_decay_fit_rejects_degenerate_scans():
    with pytest.raises(ValueError):
        decay_fit([(24, 1.0)] * 4)
    with pytest.raises(ValueError):
        decay_fit([(24, 1.0)] * 6)
    with pytest.raises(ValueError):
        decay_fit([(24, 1.0), (28, 0.0), (32, 1.0), (36, 1.0), (40, 1.0)])


def test_parse_weights():
    assert parse_weights("24:36:4") == [24, 28, 32, 36]
    assert parse_weights("12,24") == [12, 24]
    with pytest.raises(ValueError):
        parse_weights("36:24:4")
