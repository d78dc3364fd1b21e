import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from heckebench.arith import divisor_count, divisors
from heckebench.specfun import (
    PoleError,
    bessel_k,
    bessel_k_imag,
    bessel_k_scaled,
    divisor_tau,
    divisor_tau_array,
    divisor_tau_complex,
    log_gamma,
    log_theta,
    scattering,
    theta_factor,
    zeta,
)


def test_log_gamma_real_axis():
    for x in (0.3, 1.0, 5.5, 40.0):
        assert log_gamma(x).real == pytest.approx(math.lgamma(x), rel=1e-14)


def test_log_gamma_critical_line_modulus():
    for t in (0.5, 10.0, 200.0):
        lhs = 2 * log_gamma(0.5 + 1j * t).real
        assert lhs == pytest.approx(math.log(math.pi) - math.log(math.cosh(math.pi * t)), rel=1e-12)


def test_log_gamma_pole():
    with pytest.raises(PoleError):
        log_gamma(-3.0)


def test_zeta_special_values():
    assert zeta(2).real == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert zeta(4).real == pytest.approx(math.pi ** 4 / 90, rel=1e-14)
    assert zeta(0.5).real == pytest.approx(-1.4603545088095868, rel=1e-12)


def test_zeta_first_zero():
    assert abs(zeta(0.5 + 14.134725141734693j)) < 1e-10


@pytest.mark.parametrize("s", [0.5 + 200j, 0.75 - 57.3j, 2 + 100j, 0.5 + 1e-3j])
def test_zeta_against_mpmath(s):
    ref = complex(mpmath.zeta(s))
    assert abs(zeta(s) - ref) <= 1e-10 * abs(ref)


def test_zeta_pole():
    with pytest.raises(PoleError):
        zeta(1.0)


def test_theta_values_and_symmetry():
    assert theta_factor(1.0).real == pytest.approx(math.pi / 6, rel=1e-13)
    assert theta_factor(2.0).real == pytest.approx(math.pi ** 2 / 90, rel=1e-13)
    s = 0.3 + 4.1j
    assert log_theta(s) == pytest.approx(log_theta(0.5 - s), abs=1e-12)


def test_scattering_unitarity():
    t = np.array([0.3, 5.0, 40.0])
    assert np.abs(scattering(0.5 + 1j * t)) == pytest.approx(np.ones(3), rel=1e-12)
    s = 0.8 + 2.0j
    assert scattering(s) * scattering(1 - s) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("nu,u", [(0.0, 1.0), (0.5, 2.0), (1.5, 0.3), (3.25, 40.0), (0.0, 700.0)])
def test_bessel_real_order(nu, u):
    assert bessel_k(nu, u).real == pytest.approx(special.kv(nu, u), rel=1e-12)


@pytest.mark.parametrize("t,u", [(0.5, 1.0), (10.0, 3.0), (40.0, 20.0), (60.0, 90.0), (5.0, 0.05), (30.0, 300.0)])
def test_bessel_imaginary_order_against_mpmath(t, u):
    ref = float(mpmath.besselk(1j * t, u).real)
    assert bessel_k_imag(t, u) == pytest.approx(ref, rel=1e-9, abs=1e-12 * abs(ref) + 1e-300)


def test_bessel_complex_order():
    nu = 0.7 + 3.3j
    ref = complex(mpmath.besselk(nu, 2.5))
    assert abs(bessel_k(nu, 2.5) - ref) < 1e-11 * abs(ref)


def test_bessel_underflow_is_flagged():
    val, under = bessel_k(0.0, 2000.0, return_flag=True)
    assert under and val == 0
    r = bessel_k_scaled(0.0, 2000.0)
    assert r.log_scale < -1900 and r.mantissa != 0


@given(st.floats(0.0, 50.0), st.floats(0.1, 100.0))
@settings(max_examples=30, deadline=None)
def test_imaginary_order_is_even_in_t(t, u):
    a, b = bessel_k_imag(t, u), bessel_k_imag(-t, u)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_divisor_sums():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    for n in (1, 6, 12, 97, 360):
        assert divisor_tau(0.0, n) == pytest.approx(divisor_count(n))
        sigma = sum(divisors(n))
        assert divisor_tau_complex(0.5, n).real == pytest.approx(sigma / math.sqrt(n), rel=1e-13)
    assert divisor_tau(1.0, 4) == pytest.approx(1 + 2 * math.cos(math.log(4)), rel=1e-14)
    ts = np.array([0.0, 1.0, 7.5])
    assert divisor_tau_array(ts, 30) == pytest.approx([divisor_tau(t, 30) for t in ts])
