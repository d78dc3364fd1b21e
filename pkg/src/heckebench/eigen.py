"""Hecke eigenbases of S_k (level 1) with normalized real eigenvalues.

The exact Miller-basis matrix of T_2 is diagonalized in extended precision;
ties are broken on the degenerate subspace by T_3, T_5, ..., T_13.  The
resulting eigenvectors are applied to the exact q-expansions, which gives
lambda_f(n) = a_f(n) / (a_f(1) n^((k-1)/2)) directly; the stored table is the
multiplicative extension of the prime values, and the deviation between the
two routes is kept as a diagnostic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .arith import primes_up_to, smallest_prime_factor, factorize, divisors
from .qexpansion import (
    MillerBasis,
    cusp_dimension,
    default_truncation,
    hecke_operator_matrix,
    miller_basis,
)

SEPARATING_PRIMES = (2, 3, 5, 7, 11, 13)
DELIGNE_TOL = 1e-9
_DPS = 60


class EigenError(RuntimeError):
    """Eigen-decomposition could not separate the Hecke eigenforms."""


class DeligneViolation(AssertionError):
    pass


class NormalizationError(RuntimeError):
    """Raised when a form's Petersson normalization is used before it is set."""


class MissingEigenvalueError(KeyError):
    pass


@dataclass
class HeckeEigenform:
    """A normalized Hecke eigenform f = a_f(1) sum lambda(n) n^((k-1)/2) q^n."""

    weight: int
    index: int
    lam: np.ndarray                      # lam[n], 1 <= n <= n_max; lam[0] unused
    prime_lambda: dict[int, float]
    miller: np.ndarray                   # coordinates of the a(1)=1 form in the Miller basis
    coefficient_residual: float = 0.0    # max |multiplicative - direct| over n <= n_max
    lam_direct: np.ndarray | None = field(default=None, repr=False)   # read off a(n) itself
    _log_a1: float = field(default=float("nan"), repr=False)

    @property
    def n_max(self) -> int:
        return len(self.lam) - 1

    @property
    def log_a1(self) -> float:
        if math.isnan(self._log_a1):
            raise NormalizationError(
                f"log a_f(1) of form {self.index} (k={self.weight}) is unset; "
                "run petersson_norm_calibrate first")
        return self._log_a1

    @property
    def is_calibrated(self) -> bool:
        return not math.isnan(self._log_a1)

    def assign_log_a1(self, value: float) -> None:
        if self.is_calibrated:
            raise NormalizationError("log a_f(1) is assigned once")
        if not math.isfinite(value):
            raise ValueError("log a_f(1) must be finite")
        self._log_a1 = float(value)

    def __call__(self, n: int) -> float:
        return lambda_of(self, n)


@dataclass
class EigenBasis:
    weight: int
    forms: list[HeckeEigenform]
    separating_prime: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.forms)

    def __iter__(self):
        return iter(self.forms)

    def __getitem__(self, i: int) -> HeckeEigenform:
        return self.forms[i]

    @property
    def is_calibrated(self) -> bool:
        return all(f.is_calibrated for f in self.forms)

    # JSON cache ---------------------------------------------------------

    def to_json(self, n_max: int | None = None) -> dict:
        forms = []
        for f in self.forms:
            top = f.n_max if n_max is None else min(n_max, f.n_max)
            forms.append({
                "index": f.index,
                "lambda": {str(n): float(f.lam[n]) for n in range(1, top + 1)},
                "miller": [float(c) for c in f.miller],
                "logA1": None if not f.is_calibrated else f.log_a1,
            })
        return {"weight": self.weight, "separatingPrime": self.separating_prime,
                "forms": forms}

    @classmethod
    def from_json(cls, doc: dict) -> "EigenBasis":
        k = int(doc["weight"])
        forms = []
        for entry in doc["forms"]:
            table = {int(n): float(v) for n, v in entry["lambda"].items()}
            n_max = max(table)
            lam = np.full(n_max + 1, np.nan)
            for n, v in table.items():
                lam[n] = v
            primes = {int(p): lam[p] for p in primes_up_to(n_max)}
            form = HeckeEigenform(k, int(entry["index"]), lam, primes,
                                  np.asarray(entry["miller"], dtype=float))
            if entry.get("logA1") is not None:
                form.assign_log_a1(float(entry["logA1"]))
            forms.append(form)
        return cls(k, forms, int(doc.get("separatingPrime", 2)))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# linear algebra in extended precision


def _to_mp(A: Sequence[Sequence[Fraction]]) -> mpmath.matrix:
    return mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in A])


def working_dps(mats: Sequence[Sequence[Sequence[Fraction]]]) -> int:
    """Decimal digits that keep eigenvectors accurate despite huge Miller entries."""
    digits = max(len(str(abs(x.numerator))) + len(str(x.denominator))
                 for A in mats for row in A for x in row)
    return _DPS + 2 * digits


def simultaneous_eigenvectors(mats: Sequence[mpmath.matrix], tol: float = 1e-6):
    """Common eigenvectors of commuting real matrices.

    Diagonalizes ``mats[0]``; every cluster of eigenvalues closer than
    ``tol * ||mats[0]||`` is re-split by the next matrix restricted to the
    cluster's eigenspace.  Returns (columns, index of the matrix that made the
    final split).  Raises EigenError if the list runs out.
    """
    A = mats[0]
    n = A.rows
    with mpmath.workdps(max(mpmath.mp.dps, _DPS)):
        ev, V = mpmath.eig(A)
        # The Miller-basis entries are not comparable to the eigenvalues, so the
        # operator scale is the spectral radius (the Petersson-normal 2-norm).
        scale = max(abs(e) for e in ev)
        for e in ev:
            if abs(mpmath.im(e)) > mpmath.mpf(10) ** -10 * max(scale, 1):
                raise EigenError(f"non-real Hecke eigenvalue {e}")
        ev = [mpmath.re(e) for e in ev]
        order = sorted(range(n), key=lambda i: ev[i])
        clusters: list[list[int]] = []
        for i in order:
            if clusters and abs(ev[i] - ev[clusters[-1][-1]]) <= tol * scale:
                clusters[-1].append(i)
            else:
                clusters.append([i])
        cols = []
        used = 0
        for cl in clusters:
            if len(cl) == 1:
                cols.append(mpmath.matrix([mpmath.re(V[r, cl[0]]) for r in range(n)]))
                continue
            if len(mats) == 1:
                raise EigenError("degenerate eigenvalues could not be separated")
            # eigenspace basis from the kernel of (A - mu I)
            mu = sum(ev[i] for i in cl) / len(cl)
            W = _null_space(A - mu * mpmath.eye(n), len(cl))
            # restrict next operator: B W = W C
            B = mats[1]
            C = _lstsq(W, B * W)
            sub, depth = simultaneous_eigenvectors([C] + [_lstsq(W, M * W) for M in mats[2:]], tol)
            used = max(used, depth + 1)
            for c in sub:
                cols.append(W * c)
        return cols, used


def _null_space(A: mpmath.matrix, dim: int) -> mpmath.matrix:
    U, S, Vt = mpmath.svd_r(A)
    n = A.cols
    W = mpmath.matrix(n, dim)
    for j in range(dim):
        for r in range(n):
            W[r, j] = Vt[n - dim + j, r]
    return W


def _lstsq(W: mpmath.matrix, Y: mpmath.matrix) -> mpmath.matrix:
    Wt = W.T
    return mpmath.lu_solve(Wt * W, Wt * Y) if Y.cols == 1 else \
        mpmath.inverse(Wt * W) * (Wt * Y)


# ---------------------------------------------------------------------------


def _multiplicative_table(prime_lambda: dict[int, float], n_max: int) -> np.ndarray:
    """lambda(n) for n <= n_max from prime values via the Hecke recursion."""
    lam = np.full(n_max + 1, np.nan)
    lam[1] = 1.0
    spf = smallest_prime_factor(max(n_max, 2))
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        if m > 1:
            lam[n] = lam[m] * lam[n // m]
        elif e == 1:
            lam[n] = prime_lambda[p]
        else:
            lam[n] = prime_lambda[p] * lam[n // p] - lam[n // (p * p)]
    return lam


def _direct_lambda(basis: MillerBasis, coords: Sequence[mpmath.mpf], n_max: int) -> np.ndarray:
    """lambda(n) read off the exact q-expansion of sum coords_i f_i."""
    k = basis.weight
    shift = int(mpmath.mp.prec) + 32
    V = [int(mpmath.nint(c * mpmath.mpf(2) ** shift)) for c in coords]
    out = np.full(n_max + 1, np.nan)
    els = basis.elements
    dens = [e.den for e in els]
    common = math.lcm(*dens)
    scale = [common // d for d in dens]
    for n in range(1, n_max + 1):
        s = 0
        for vi, e, sc in zip(V, els, scale):
            s += vi * e.nums[n] * sc
        # s / (2^shift * common * n^((k-1)/2)) in log space to avoid overflow
        if s == 0:
            out[n] = 0.0
            continue
        sign = 1.0 if s > 0 else -1.0
        la = math.log(abs(s)) - shift * math.log(2) - math.log(common) - 0.5 * (k - 1) * math.log(n)
        out[n] = sign * math.exp(la)
    return out


def eigenbasis(k: int, n_max: int = 1000) -> EigenBasis:
    """Hecke eigenbasis of S_k with lambda_f(n) for n <= n_max."""
    d = cusp_dimension(k)
    if d == 0:
        from .qexpansion import EmptySpaceError
        raise EmptySpaceError(f"S_{k} = {{0}} at level 1")
    N = max(n_max, default_truncation(k, SEPARATING_PRIMES[-1]))
    basis = miller_basis(k, N)
    exact = [hecke_operator_matrix(basis, p) for p in SEPARATING_PRIMES]
    with mpmath.workdps(working_dps(exact)):
        mats = [_to_mp(T) for T in exact]
        cols, depth = simultaneous_eigenvectors(mats)
        forms = []
        residues = {}
        for c in cols:
            c = [c[i] / c[0] for i in range(d)]   # a(f, 1) = first Miller coordinate
            direct = _direct_lambda(basis, c, n_max)
            primes = {int(p): float(direct[p]) for p in primes_up_to(n_max)}
            lam = _multiplicative_table(primes, n_max)
            resid = float(np.nanmax(np.abs(lam[1:] - direct[1:]))) if n_max > 1 else 0.0
            forms.append(HeckeEigenform(k, 0, lam, primes,
                                        np.array([float(x) for x in c]), resid, direct))
        # simultaneous diagonalization residual for T_3, T_5
        V = mpmath.matrix(d, d)
        for j, f in enumerate(forms):
            for i in range(d):
                V[i, j] = mpmath.mpf(f.miller[i])
        for p_idx, p in ((1, 3), (2, 5)):
            if d == 1:
                residues[p] = 0.0
                continue
            Vm = mpmath.matrix(cols[0].rows, len(cols))
            for j, c in enumerate(cols):
                for i in range(d):
                    Vm[i, j] = c[i]
            D = mpmath.inverse(Vm) * mats[p_idx] * Vm
            off = max(abs(D[i, j]) for i in range(d) for j in range(d) if i != j)
            residues[p] = float(off / max(abs(D[i, i]) for i in range(d)))
    forms.sort(key=lambda f: (f.lam[2] if n_max >= 2 else 0.0,
                              f.lam[3] if n_max >= 3 else 0.0))
    for i, f in enumerate(forms, start=1):
        f.index = i
    return EigenBasis(k, forms, SEPARATING_PRIMES[depth],
                      {"offdiag_relative": residues,
                       "max_coefficient_residual": max(f.coefficient_residual for f in forms)})


def lambda_of(form: HeckeEigenform, n: int) -> float:
    """Multiplicative extension of the stored prime eigenvalues."""
    if n < 1:
        raise ValueError("n must be positive")
    if n <= form.n_max and not math.isnan(form.lam[n]):
        return float(form.lam[n])
    out = 1.0
    for p, e in factorize(n):
        if p not in form.prime_lambda:
            raise MissingEigenvalueError(f"no eigenvalue stored for p={p}")
        lp = form.prime_lambda[p]
        prev, cur = 1.0, lp
        for _ in range(e - 1):
            prev, cur = cur, lp * cur - prev
        out *= cur
    return out


def check_deligne(form: HeckeEigenform, P: int) -> float:
    """max |lambda(p)| over primes p <= P; raises if any exceeds 2 + 1e-9."""
    worst = 0.0
    for p in primes_up_to(P):
        p = int(p)
        v = abs(lambda_of(form, p))
        if v > 2.0 + DELIGNE_TOL:
            raise DeligneViolation(f"|lambda({p})| = {v} > 2 for k={form.weight}, form {form.index}")
        worst = max(worst, v)
    return worst


def _direct(form: HeckeEigenform, n: int) -> float:
    if form.lam_direct is not None and n < len(form.lam_direct):
        return float(form.lam_direct[n])
    return lambda_of(form, n)


def hecke_relation_residual(form: HeckeEigenform, bound: int = 50) -> float:
    """max over m, n <= bound of |lambda(m)lambda(n) - sum_{d|(m,n)} lambda(mn/d^2)|.

    Uses the coefficients read directly off the q-expansion when available,
    so the multiplicative table is not checked against itself.
    """
    bound = min(bound, math.isqrt(form.n_max))
    worst = 0.0
    for m in range(1, bound + 1):
        lm = _direct(form, m)
        for n in range(m, bound + 1):
            g = math.gcd(m, n)
            rhs = sum(_direct(form, m * n // (e * e)) for e in divisors(g))
            worst = max(worst, abs(lm * _direct(form, n) - rhs))
    return worst


def hecke_square_residual(form: HeckeEigenform, P: int) -> float:
    """max_p |lambda(p^2) - (lambda(p)^2 - 1)| using the directly read lambda(p^2)."""
    worst = 0.0
    for p in primes_up_to(int(math.isqrt(form.n_max))):
        if p > P:
            break
        p = int(p)
        worst = max(worst, abs(_direct(form, p * p) - (_direct(form, p) ** 2 - 1.0)))
    return worst
