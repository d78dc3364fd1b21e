"""Evaluators for automorphic objects on the upper half-plane.

F(z) = y^(k/2) f(z) for Hecke eigenforms (log-space, vectorized over points
and over all forms of one weight), the real-analytic Eisenstein series
E(z, s) with a coset-sum oracle, and incomplete Poincare series
P_m(z, Psi) = sum over Gamma_inf \\ Gamma of e(m Re gz) Psi(Im gz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
from scipy import special

from .eigen import HeckeEigenform
from .specfun import bessel_k, divisor_tau_complex, log_theta
from .surface import reduce_arrays, reduce_with_factor

TWO_PI = 2.0 * math.pi
TERM_CUTOFF = math.log(1e18)
CHUNK = 8192


class Window(Protocol):
    lo: float
    hi: float

    def __call__(self, y): ...


@dataclass(frozen=True)
class DilatedWindow:
    """y -> h(Y y), supported on [lo / Y, hi / Y]."""

    base: Window
    Y: float

    @property
    def lo(self) -> float:
        return self.base.lo / self.Y

    @property
    def hi(self) -> float:
        return self.base.hi / self.Y

    def __call__(self, y):
        return self.base(np.asarray(y, dtype=float) * self.Y)


# ---------------------------------------------------------------------------
# holomorphic forms


@dataclass
class FormEvaluation:
    """F(z) = exp(log_abs) * phase at each point, plus truncation data."""

    log_abs: np.ndarray
    phase: np.ndarray
    terms_used: int
    tail_bound: np.ndarray      # absolute bound on the discarded tail of F

    @property
    def value(self) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_abs) * self.phase


def _term_count(k: int, y_min: float, n_avail: int) -> tuple[int, float]:
    """Number of q-terms so the rest is below 1e-18 of the largest term.

    Returns (T, log of the relative tail bound).
    """
    n = np.arange(1, n_avail + 1, dtype=float)
    g = 0.5 * (k - 1) * np.log(n) - TWO_PI * n * y_min + np.log(2 * np.sqrt(n))
    top = g.max()
    keep = np.flatnonzero(g >= top - TERM_CUTOFF)
    T = int(keep[-1]) + 1
    peak = int(np.argmax(g)) + 1
    T = max(T, peak + 1)
    if T >= n_avail:
        raise ValueError(f"need more than {n_avail} eigenvalues at y = {y_min:.3g} for k = {k}")
    # geometric tail from n = T + 1 on
    ratio = math.exp(0.5 * (k - 1) * math.log((T + 2) / (T + 1)) - TWO_PI * y_min)
    tail = g[T] - top - math.log1p(-min(ratio, 0.999999))
    return T, tail


def evaluate_forms(forms: Sequence[HeckeEigenform], x, y, log_a1: Sequence[float] | None = None
                   ) -> list[FormEvaluation]:
    """F for several forms of one weight at the same points.

    Points with y < 1/2 are first moved into F using
    F(z) = F(gz) (|cz + d|/(cz + d))^k.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    k = forms[0].weight
    if any(f.weight != k for f in forms):
        raise ValueError("all forms must share one weight")
    if log_a1 is None:
        log_a1 = [f.log_a1 for f in forms]
    factor = None
    if np.any(y < 0.5):
        x, y, cz_d = reduce_with_factor(x, y)
        factor = (np.abs(cz_d) / cz_d) ** k
    n_avail = min(f.n_max for f in forms)
    T, log_tail = _term_count(k, float(y.min()), n_avail)
    n = np.arange(1, T + 1, dtype=float)
    lam = np.stack([f.lam[1:T + 1] for f in forms], axis=1)      # T x d
    cn = 0.5 * (k - 1) * np.log(n)
    P = len(x)
    sums = np.empty((P, len(forms)), dtype=complex)
    shift = np.empty(P)
    for lo in range(0, P, CHUNK):
        hi = min(P, lo + CHUNK)
        xs, ys = x[lo:hi], y[lo:hi]
        expo = np.multiply.outer(TWO_PI * (1j * xs - ys), n) + cn
        mx = expo.real.max(axis=1)
        mat = np.exp(expo - mx[:, None])
        sums[lo:hi] = mat @ lam
        shift[lo:hi] = mx
    out = []
    base = 0.5 * k * np.log(y) + shift
    for j, f in enumerate(forms):
        s = sums[:, j]
        mag = np.abs(s)
        with np.errstate(divide="ignore"):
            la = base + log_a1[j] + np.log(mag)
        ph = np.where(mag > 0, s / np.where(mag > 0, mag, 1.0), 1.0)
        if factor is not None:
            ph = ph * factor
        tail = np.exp(base + log_a1[j] + log_tail)
        out.append(FormEvaluation(la, ph, T, tail))
    return out


def eval_F(form: HeckeEigenform, x, y) -> FormEvaluation:
    """F(z) = y^(k/2) a_f(1) sum lambda(n) n^((k-1)/2) e(nz); needs log a_f(1)."""
    return evaluate_forms([form], x, y)[0]


# ---------------------------------------------------------------------------
# Eisenstein series


class PoleProximityError(ValueError):
    pass


def eisenstein_terms(s: complex, y_min: float) -> int:
    t = abs(complex(s).imag)
    return int(math.ceil((t + 45.0) / (TWO_PI * y_min))) + 2


def eval_eisenstein(x, y, s: complex, n_max: int | None = None) -> np.ndarray:
    """E(z, s) by its Fourier expansion after reducing z into F."""
    s = complex(s)
    if abs(s - 1) < 1e-3:
        raise PoleProximityError("s too close to the pole at s = 1")
    if not 0.5 <= s.real <= 3.0:
        raise ValueError("Re s must lie in [1/2, 3]")
    x, y = reduce_arrays(np.atleast_1d(x), np.atleast_1d(y))
    N = n_max or eisenstein_terms(s, float(y.min()))
    nu = s - 0.5
    lt = log_theta(s)
    phi = np.exp(log_theta(1 - s) - lt)
    out = np.exp(s * np.log(y)) + phi * np.exp((1 - s) * np.log(y))
    pref = 4.0 * np.sqrt(y) * np.exp(-lt)
    acc = np.zeros(len(x), dtype=complex)
    for n in range(1, N + 1):
        u = TWO_PI * n * y
        if nu.imag == 0:
            kv = special.kv(nu.real, u)
        else:
            kv = np.array([bessel_k(nu, float(ui)) for ui in u])
        acc += divisor_tau_complex(nu, n) * kv * np.cos(TWO_PI * n * x)
    out = out + pref * acc
    if s.imag == 0:
        return out.real
    return out


def eisenstein_coset_sum(x: float, y: float, s: float, radius: float = 2000.0,
                         tail_correct: bool = True) -> float:
    """sum over coprime (c, d), c > 0 or (0, 1), with |cz + d| <= radius, of
    (y/|cz + d|^2)^s, plus the mean-density estimate of the remainder."""
    if s <= 1:
        raise ValueError("the coset sum converges only for s > 1")
    total = y ** s
    c_max = int(radius / y)
    for c in range(1, c_max + 1):
        r = math.sqrt(max(radius * radius - (c * y) ** 2, 0.0))
        d = np.arange(math.ceil(-c * x - r), math.floor(-c * x + r) + 1)
        d = d[np.gcd(d, c) == 1]
        q = (c * x + d) ** 2 + (c * y) ** 2
        total += float(np.sum((y / q) ** s))
    if tail_correct:
        total += (6.0 / math.pi) * y ** (s - 1) * radius ** (2 - 2 * s) / (2 * s - 2)
    return total


# ---------------------------------------------------------------------------
# incomplete Poincare / Eisenstein series


def coset_layers(y_min: float, lo: float) -> int:
    """Largest c with a coset representative reaching Im gz >= lo."""
    return int(math.floor(math.sqrt(1.0 / (lo * y_min)) + 1e-12))


def incomplete_poincare(m: int, window: Window, x, y) -> np.ndarray:
    """P_m(z, Psi) as a finite sum over the cosets with Im gz in supp Psi."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo, hi = window.lo, window.hi
    out = np.exp(2j * math.pi * m * x) * np.asarray(window(y))
    c_max = coset_layers(float(y.min()), lo)
    for c in range(1, c_max + 1):
        r = np.sqrt(np.maximum(y / lo - (c * y) ** 2, 0.0))
        active = r > 0
        if not active.any():
            continue
        d_lo = int(math.floor(np.min((-c * x - r)[active])))
        d_hi = int(math.ceil(np.max((-c * x + r)[active])))
        for d in range(d_lo, d_hi + 1):
            if math.gcd(c, d) != 1:
                continue
            cx_d = c * x + d
            q = cx_d * cx_d + (c * y) ** 2
            im = y / q
            sel = (im >= lo) & (im <= hi)
            if not sel.any():
                continue
            a = pow(d, -1, c) if c > 1 else 0
            re = a / c - cx_d[sel] / (c * q[sel])
            out[sel] += np.exp(2j * math.pi * m * re) * np.asarray(window(im[sel]))
    return out


def incomplete_eisenstein(window: Window, x, y) -> np.ndarray:
    """E(z | Psi) = P_0(z, Psi); real for real Psi."""
    out = incomplete_poincare(0, window, x, y)
    return out.real if np.isrealobj(window(np.array([0.5 * (window.lo + window.hi)]))) else out
