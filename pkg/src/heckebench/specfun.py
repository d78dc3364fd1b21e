"""Special functions: log-Gamma, zeta on vertical lines, the completed factor
theta(s) = pi^-s Gamma(s) zeta(2s), K-Bessel of complex order, divisor sums."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special

from .arith import divisors


class PoleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Gamma


def log_gamma(s):
    """Principal-branch log Gamma(s) for complex s (scalar or array)."""
    arr = np.asarray(s, dtype=complex)
    bad = (arr.real <= 0) & (arr.imag == 0) & (arr.real == np.round(arr.real))
    if np.any(bad):
        raise PoleError(f"Gamma has a pole at {arr[bad].ravel()[0].real:g}")
    out = special.loggamma(arr)
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# zeta


@lru_cache(maxsize=1)
def _bernoulli_even(order: int) -> tuple[float, ...]:
    """B_{2j}/(2j)! for j = 1..order."""
    from .qexpansion import bernoulli
    return tuple(float(Fraction(bernoulli(2 * j)) / math.factorial(2 * j))
                 for j in range(1, order + 1))


def zeta(s, terms: int | None = None, order: int = 8):
    """Riemann zeta for Re s > 0 by Euler-Maclaurin.

    The direct-sum length defaults to max(50, 2|s|) so the Bernoulli tail
    stays below double precision for |Im s| up to a few hundred.
    """
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(np.abs(arr - 1) < 1e-14):
        raise PoleError("zeta has a pole at s = 1")
    out = np.empty(arr.shape, dtype=complex)
    bern = _bernoulli_even(order)
    for idx, sv in np.ndenumerate(arr):
        N = terms if terms is not None else max(50, int(2 * abs(sv)) + 10)
        n = np.arange(1, N, dtype=float)
        acc = np.sum(np.exp(-sv * np.log(n)))
        Ns = cmath.exp(-sv * math.log(N))
        acc += N * Ns / (sv - 1) + 0.5 * Ns
        rising = sv            # s (s+1) ... (s+2j-2)
        power = Ns / N         # N^(-s-1)
        for j, b in enumerate(bern, start=1):
            acc += b * rising * power
            rising *= (sv + 2 * j - 1) * (sv + 2 * j)
            power /= N * N
        out[idx] = acc
    if np.ndim(s) == 0:
        return complex(out[0])
    return out.reshape(np.shape(s))


# ---------------------------------------------------------------------------
# theta(s) = pi^-s Gamma(s) zeta(2s) = xi(2s), with xi(w) = xi(1-w)


def log_theta(s):
    """log theta(s), continued to Re s < 1/4 through theta(s) = theta(1/2 - s)."""
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    w = np.where(arr.real < 0.25, 0.5 - arr, arr)
    out = -w * math.log(math.pi) + log_gamma(w) + np.log(zeta(2 * w))
    if np.ndim(s) == 0:
        return complex(out[0])
    return out.reshape(np.shape(s))


def theta_factor(s):
    """theta(s) = pi^-s Gamma(s) zeta(2s) through a log-space product."""
    out = np.exp(log_theta(s))
    return complex(out) if np.ndim(out) == 0 else out


def scattering(s):
    """phi(s) = theta(1 - s)/theta(s), the constant-term coefficient of E(z, s)."""
    s = np.asarray(s, dtype=complex)
    out = np.exp(log_theta(1 - s) - log_theta(s))
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# K-Bessel of complex order


@dataclass(frozen=True)
class BesselValue:
    mantissa: complex
    log_scale: float      # value = mantissa * exp(log_scale)
    underflow: bool

    @property
    def value(self) -> complex:
        if self.underflow:
            return 0j
        return self.mantissa * math.exp(self.log_scale)


_TAIL = 40.0


def bessel_k_scaled(nu: complex, u: float) -> BesselValue:
    """K_nu(u) = 1/2 int exp(-u cosh v + nu v) dv on a shifted contour.

    For nu = sigma + it the line Im v = 0 is moved to Im v = alpha, close to
    the saddle i*arcsin(t/u) (capped below pi/2).  The integrand then has no
    exp(pi t/2) cancellation, so the result is accurate relative to its own
    size, which matters when it is later divided by theta(1/2 + it).
    """
    if u <= 0:
        raise ValueError("u must be positive")
    nu = complex(nu)
    conj = nu.imag < 0
    if conj:
        nu = nu.conjugate()
    if nu.real < 0:
        nu = -nu.conjugate()   # K_{-nu} = K_nu, keeping Im nu >= 0
    sigma, t = nu.real, nu.imag
    delta = min(1.0, 3.0 / (1.0 + t))
    alpha = min(math.asin(min(t / u, 1.0)), math.pi / 2 - delta)
    ca = math.cos(alpha)
    uc = u * ca
    # peak of the real part of the exponent along the shifted line
    w0 = math.asinh(sigma / uc) if sigma > 0 else 0.0

    def re_exp(w):
        return -uc * math.cosh(w) + sigma * w - t * alpha

    peak = re_exp(w0)
    lo, hi = w0, w0
    step = 0.5
    while re_exp(hi) > peak - _TAIL:
        hi += step
        step *= 1.5
    step = 0.5
    while re_exp(lo) > peak - _TAIL:
        lo -= step
        step *= 1.5
    d = 0.9 * min(math.pi / 2 - alpha, 1.0)
    # strip-width limit, and resolution of the Gaussian core of width uc^-1/2
    h = min(2 * math.pi * d / 45.0, 0.25, math.pi * math.sqrt(2.0 / (45.0 * max(uc, 1e-300))))
    n = int(math.ceil((hi - lo) / h))
    w = np.linspace(lo, hi, n + 1)
    v = w + 1j * alpha
    e = -u * np.cosh(v) + nu * v - peak
    m = 0.5 * (w[1] - w[0]) * np.sum(np.exp(e))
    if conj:
        m = m.conjugate()
    mag = abs(m)
    under = mag == 0 or peak + math.log(mag) < -745.0
    return BesselValue(complex(m), float(peak), bool(under))


def bessel_k(nu: complex, u: float, return_flag: bool = False):
    """K_nu(u) for complex order; underflow gives 0 (flag with return_flag)."""
    r = bessel_k_scaled(nu, u)
    val = r.value
    nu = complex(nu)
    if nu.imag == 0 or nu.real == 0:
        val = complex(val.real, 0.0)     # real for real or purely imaginary order
    return (val, r.underflow) if return_flag else val


def bessel_k_imag(t: float, u: float, return_flag: bool = False):
    """K_{it}(u), real for real t and u > 0."""
    r = bessel_k_scaled(1j * t, u)
    val = r.value.real
    return (val, r.underflow) if return_flag else val


def log_bessel_k_imag(t: float, u: float) -> tuple[float, float]:
    """(sign-carrying mantissa, log scale) for K_{it}(u); never underflows."""
    r = bessel_k_scaled(1j * t, u)
    return r.mantissa.real, r.log_scale


# ---------------------------------------------------------------------------
# divisor sums


def divisor_tau(t: float, n: int) -> float:
    """tau_{it}(n) = sum_{ab=n} (a/b)^{it} = sum_{d|n} cos(t log(d^2/n))."""
    if n < 1:
        raise ValueError("n must be positive")
    ds = np.array(divisors(n), dtype=float)
    return float(np.sum(np.cos(t * np.log(ds * ds / n))))


def divisor_tau_complex(nu: complex, n: int) -> complex:
    """tau_nu(n) = sum_{d|n} (d^2/n)^nu for complex nu."""
    if n < 1:
        raise ValueError("n must be positive")
    ds = np.array(divisors(n), dtype=float)
    return complex(np.sum(np.exp(nu * np.log(ds * ds / n))))


def divisor_tau_array(ts: np.ndarray, n: int) -> np.ndarray:
    ds = np.array(divisors(n), dtype=float)
    logs = np.log(ds * ds / n)
    return np.cos(np.multiply.outer(np.asarray(ts, dtype=float), logs)).sum(axis=-1)
