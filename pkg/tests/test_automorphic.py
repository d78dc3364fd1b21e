import math

import numpy as np
import pytest

from heckebench.automorphic import (
    DilatedWindow,
    PoleProximityError,
    eisenstein_coset_sum,
    eval_eisenstein,
    eval_F,
    evaluate_forms,
    incomplete_eisenstein,
    incomplete_poincare,
)
from heckebench.specfun import scattering
from heckebench.windows import RadialWindow, TestFunction, h_window


def test_delta_at_i_closed_form(delta_form):
    # Delta(i) = Gamma(1/4)^24 / (2^24 pi^18), with a(1) = 1
    ev = evaluate_forms([delta_form], [0.0], [1.0], log_a1=[0.0])[0]
    expected = math.gamma(0.25) ** 24 / (2 ** 24 * math.pi ** 18)
    assert ev.value[0].real == pytest.approx(expected, rel=1e-13)
    assert abs(ev.value[0].imag) < 1e-16


def test_modulus_is_invariant(basis24):
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.5, 0.5, 20)
    y = rng.uniform(0.9, 3.0, 20)
    z = x + 1j * y
    w = (2 * z + 1) / (5 * z + 3)      # det 1
    for f in basis24:
        a = eval_F(f, x, y)
        b = eval_F(f, w.real, w.imag)
        np.testing.assert_allclose(b.log_abs, a.log_abs, rtol=0, atol=1e-9)


def test_weight_k_phase_under_inversion(delta_form):
    z = complex(0.2, 1.3)
    w = -1 / z
    a = eval_F(delta_form, [z.real], [z.imag]).value[0]
    b = eval_F(delta_form, [w.real], [w.imag]).value[0]
    # f(-1/z) = z^k f(z), so F(-1/z) = F(z) (z/|z|)^k
    assert b == pytest.approx(a * (z / abs(z)) ** 12, rel=1e-9)


def test_far_up_the_cusp_is_negligible(delta_form):
    ev = eval_F(delta_form, [0.0], [40.0])
    assert ev.value[0] != 0 and abs(ev.value[0]) < 1e-30
    assert np.all(ev.tail_bound < 1e-15 * np.exp(ev.log_abs))


def test_eisenstein_fourier_vs_coset_sum():
    four = eval_eisenstein([0.0], [1.0], 2.0)[0]
    coset = eisenstein_coset_sum(0.0, 1.0, 2.0, radius=3000.0)
    assert four == pytest.approx(coset, rel=1e-6)


def test_eisenstein_automorphy_and_functional_equation():
    z = complex(0.13, 1.1)
    w = (z - 3) / (z - 2)           # [[1, -3], [1, -2]]
    for s in (2.0, 0.5 + 7j, 0.8 + 1.5j):
        a = eval_eisenstein([z.real], [z.imag], s)[0]
        b = eval_eisenstein([w.real], [w.imag], s)[0]
        assert abs(a - b) < 1e-9 * max(1, abs(a))
    for t in (0.7, 7.0):
        s = 0.5 + 1j * t
        lhs = eval_eisenstein([z.real], [z.imag], s)[0]
        rhs = scattering(s) * eval_eisenstein([z.real], [z.imag], 1 - s)[0]
        assert abs(lhs - rhs) < 1e-10 * max(1, abs(lhs))


def test_eisenstein_pole_guard():
    with pytest.raises(PoleProximityError):
        eval_eisenstein([0.0], [1.0], 1.0005)


def test_identity_coset_only_high_in_the_cusp():
    w = RadialWindow.for_scale(1.0)
    x, y = 0.3, 2.5        # every other coset has Im gz <= y/(1 + y^2) < 1/2
    val = incomplete_poincare(2, w, [x], [y])[0]
    assert val == pytest.approx(np.exp(4j * np.pi * x) * w(y), rel=1e-14)


def test_incomplete_poincare_is_invariant():
    w = RadialWindow.for_scale(1.0)
    z = complex(0.21, 0.9)
    g = (3 * z + 1) / (5 * z + 2)
    a = incomplete_poincare(1, w, [z.real], [z.imag])[0]
    b = incomplete_poincare(1, w, [g.real], [g.imag])[0]
    assert abs(a - b) < 1e-12


def test_incomplete_eisenstein_equals_mellin_contour():
    w = RadialWindow.for_scale(1.0)
    z = complex(0.1, 1.3)
    direct = incomplete_eisenstein(w, [z.real], [z.imag])[0]
    step = 0.1
    t = np.arange(-40.0, 40.0 + step / 2, step)
    s = 2.0 + 1j * t
    vals = np.array([w.mellin(-si) * eval_eisenstein([z.real], [z.imag], si)[0] for si in s])
    contour = (np.sum(vals) * step / (2 * np.pi)).real
    assert contour == pytest.approx(direct, abs=1e-5)


def test_slices_rebuild_psi_through_poincare_series():
    psi = TestFunction.default(1.0)
    z0 = complex(0.1, 2.05)
    z = -1 / z0
    m0 = psi.mode_cutoff(1e-12)
    total = sum(incomplete_poincare(m, psi.slice_window(m), [z.real], [z.imag])[0]
                for m in range(-m0, m0 + 1))
    assert abs(total - psi(z0.real, z0.imag)) < 1e-6


def test_dilated_window():
    h = h_window()
    d = DilatedWindow(h, 2.0)
    assert (d.lo, d.hi) == (0.5, 1.0)
    assert d(0.75) == pytest.approx(h(1.5))
