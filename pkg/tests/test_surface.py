import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckebench.surface import (
    GroupElement,
    QuadratureNotConverged,
    SurfacePoint,
    act,
    quadrature_box,
    quadrature_fd,
    quadrature_strip,
    reduce,
    reduce_arrays,
    reduce_with_factor,
    richardson,
)

points = st.tuples(st.floats(-50, 50), st.floats(1e-3, 20))


@given(points)
@settings(max_examples=100, deadline=None)
def test_reduction_lands_in_f_and_returns_the_map(p):
    z = SurfacePoint(*p)
    w, g = reduce(z)
    assert w.in_fundamental_domain(1e-9)
    img = act(g, z)
    assert img.x == pytest.approx(w.x, abs=1e-9 * max(1, abs(w.x)))
    assert img.y == pytest.approx(w.y, rel=1e-9)


def test_group_law():
    S, T = GroupElement.inversion(), GroupElement.translation(1)
    assert S @ S == GroupElement(-1, 0, 0, -1)
    ST = S @ T
    assert ST @ ST @ ST == GroupElement(-1, 0, 0, -1)
    g = GroupElement(7, 3, 2, 1)
    assert g @ g.inverse() == GroupElement.identity()
    with pytest.raises(ValueError):
        GroupElement(1, 1, 1, 1)
    with pytest.raises(ValueError):
        SurfacePoint(0.0, -1.0)


def test_invariance_in_extended_precision():
    with mpmath.workdps(50):
        z = SurfacePoint(mpmath.mpf("0.1234"), mpmath.mpf("1.7"))
        g = GroupElement.identity()
        for n in (3, -7, 11, 250, -999, 1234):
            g = GroupElement.translation(n) @ GroupElement.inversion() @ g
        assert g.det == 1 and max(abs(g.a), abs(g.c)) > 10 ** 6
        w = act(g, z)
        back, h = reduce(w)
        # the round trip loses about log10 |cz + d|^2 digits of the 50 carried
        assert abs(back.x - z.x) < mpmath.mpf(10) ** -25
        assert abs(back.y - z.y) < mpmath.mpf(10) ** -25
        gi = g.inverse()
        assert h in (gi, GroupElement(-gi.a, -gi.b, -gi.c, -gi.d))


def test_vectorized_reduction_matches_scalar():
    rng = np.random.default_rng(3)
    x = rng.uniform(-3, 3, 200)
    y = rng.uniform(0.01, 2, 200)
    xr, yr = reduce_arrays(x, y)
    xf, yf, _ = reduce_with_factor(x, y)
    for i in range(0, 200, 17):
        w, _ = reduce(SurfacePoint(float(x[i]), float(y[i])))
        assert (xr[i], yr[i]) == pytest.approx((w.x, w.y), abs=1e-10)
    np.testing.assert_allclose(xr, xf, atol=1e-14)


def test_automorphy_factor_is_cz_plus_d():
    # z = i/2 maps to 2i under S, with cz + d = i/2
    x, y, cz = reduce_with_factor(np.array([0.0]), np.array([0.5]))
    assert (x[0], y[0]) == pytest.approx((0.0, 2.0))
    assert cz[0] == pytest.approx(0.5j)


@pytest.mark.parametrize("level", [0, 1, 2])
def test_fundamental_domain_area(level):
    r = quadrature_fd(40.0, level)
    exact = math.pi / 3 - 1 / 40.0
    assert r.area == pytest.approx(exact, rel=1e-13)
    assert np.all(r.x ** 2 + r.y ** 2 >= 1 - 1e-12) and np.all(np.abs(r.x) <= 0.5)


def test_odd_integrand_vanishes():
    r = quadrature_fd(10.0, 1)
    assert abs(r.integrate(r.x * np.exp(-r.y))) < 1e-15


def test_strip_and_box_areas():
    s = quadrature_strip(0.5, 4.0, 1)
    assert s.area == pytest.approx(1 / 0.5 - 1 / 4.0, rel=1e-13)
    b = quadrature_box(-0.25, 0.25, 1.5, 2.5, 1)
    assert b.area == pytest.approx(0.5 * (1 / 1.5 - 1 / 2.5), rel=1e-3)


def test_richardson_converges_and_refuses():
    r = quadrature_fd(10.0, 2)
    est = richardson(lambda q: q.integrate(np.exp(-q.y)), r)
    assert est.error < 1e-12 and est.levels == (0, 1, 2)

    def stubborn(q):
        return float(q.level % 2)     # oscillates, never contracts

    with pytest.raises(QuadratureNotConverged):
        richardson(stubborn, r)
    est = richardson(stubborn, r, refuse=False)
    assert est.ratio == pytest.approx(1.0)
