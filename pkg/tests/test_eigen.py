import json
import math

import mpmath
import numpy as np
import pytest

from heckebench.eigen import (
    DeligneViolation,
    EigenBasis,
    EigenError,
    HeckeEigenform,
    MissingEigenvalueError,
    NormalizationError,
    check_deligne,
    eigenbasis,
    hecke_relation_residual,
    hecke_square_residual,
    lambda_of,
    simultaneous_eigenvectors,
)
from conftest import TAU


@pytest.fixture(scope="module")
def b12():
    return eigenbasis(12, 600)


def test_delta_eigenvalues_match_tau(b12):
    f = b12[0]
    for n in range(1, 13):
        assert f(n) == pytest.approx(TAU[n - 1] / n ** 5.5, rel=1e-12)
    assert f(2) == pytest.approx(-0.530330085889911, abs=1e-12)


def test_weight24_t2_eigenvalues():
    # T_2 on S_24 has eigenvalues 540 -+ 12 sqrt(144169)
    B = eigenbasis(24, 100)
    expected = sorted((540 + s * 12 * math.sqrt(144169)) / 2 ** 11.5 for s in (-1, 1))
    assert [f(2) for f in B] == pytest.approx(expected, rel=1e-12)
    assert B.dim == 2 and [f.index for f in B] == [1, 2]


@pytest.mark.parametrize("k", [36, 48, 60])
def test_deligne_and_hecke_relations(k):
    B = eigenbasis(k, 500)
    assert B.diagnostics["offdiag_relative"][3] < 1e-20
    for f in B:
        assert check_deligne(f, 500) <= 2 + 1e-9
        assert hecke_relation_residual(f, 22) < 1e-9
        assert hecke_square_residual(f, 22) < 1e-9
        assert f.coefficient_residual < 1e-9


def test_direct_coefficients_are_multiplicative(b12):
    f = b12[0]
    d = f.lam_direct
    for m, n in [(2, 3), (4, 9), (5, 7), (8, 25), (11, 13)]:
        assert d[m * n] == pytest.approx(d[m] * d[n], rel=1e-10, abs=1e-12)


def test_lambda_beyond_table_and_missing_primes(b12):
    f = b12[0]
    assert lambda_of(f, 2 * 599) == pytest.approx(f(2) * f(599), rel=1e-12)
    with pytest.raises(MissingEigenvalueError):
        lambda_of(f, 601 * 2)
    with pytest.raises(ValueError):
        lambda_of(f, 0)


def test_log_a1_lifecycle():
    f = eigenbasis(12, 50)[0]
    with pytest.raises(NormalizationError):
        f.log_a1
    f.assign_log_a1(-3.0)
    assert f.log_a1 == -3.0
    with pytest.raises(NormalizationError):
        f.assign_log_a1(-2.0)


def test_json_round_trip():
    B = eigenbasis(24, 60)
    B[0].assign_log_a1(-12.5)
    doc = json.loads(B.dumps())
    assert set(doc) == {"weight", "separatingPrime", "forms"}
    C = EigenBasis.from_json(doc)
    assert C.weight == 24 and C.dim == 2
    for f, g in zip(B, C):
        np.testing.assert_array_equal(f.lam[1:], g.lam[1:])
    assert C[0].log_a1 == -12.5 and not C[1].is_calibrated


def _rotated(diagonal, Q):
    return Q * mpmath.diag(diagonal) * Q.T


@mpmath.workdps(60)
def test_degenerate_first_operator_is_split_by_the_next():
    Q = mpmath.matrix([[1, 1, 1], [1, -1, 1], [1, 0, -2]])   # orthogonal columns
    for j in range(3):
        col = Q[:, j]
        Q[:, j] = col / mpmath.norm(col)
    A = _rotated([1, 1, 2], Q)
    B = _rotated([3, 5, 7], Q)
    cols, depth = simultaneous_eigenvectors([A, B])
    assert depth == 1 and len(cols) == 3
    for v in cols:
        for M in (A, B):
            w = M * v
            mu = (v.T * w)[0] / (v.T * v)[0]
            assert mpmath.norm(w - mu * v) < 1e-30


def test_inseparable_spectrum_raises():
    A = mpmath.diag([1, 1])
    with pytest.raises(EigenError):
        simultaneous_eigenvectors([A])


def test_deligne_violation_detected():
    lam = np.array([np.nan, 1.0, 2.5, 0.1])
    f = HeckeEigenform(12, 1, lam, {2: 2.5, 3: 0.1}, np.array([1.0]))
    with pytest.raises(DeligneViolation):
        check_deligne(f, 3)
