"""Bound ingredients for decorrelation: prime products over p <= k, shifted
convolution sums, the Watson prefactor, Mertens normalization, and the
min-max exponent optimization behind the power-of-log savings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import mpmath
import numpy as np
from scipy import stats

from .arith import primes_up_to
from .eigen import HeckeEigenform, lambda_of

DELTA1_PRESETS = {
    "soundararajan-thorner": "9.765625e-21",
    "grc": "0.5",
}
FACTOR_FLOOR = 1e-9
GRID_STEP = 1e-3
SERIES_SWITCH = 1e-8
MERTENS_CAP = 10 ** 7

Eigenvalues = Union[HeckeEigenform, Callable[[int], float]]


def _at_primes(f: Eigenvalues) -> Callable[[int], float]:
    if isinstance(f, HeckeEigenform):
        return lambda p: lambda_of(f, p)
    return f


# ---------------------------------------------------------------------------
# prime products


@dataclass
class PrimeProduct:
    """A product over p <= k from two code paths, with floored factors listed."""

    value: float              # exp of the log-space sum
    direct: float             # plain running product
    floored: list[int] = field(default_factory=list)

    @property
    def log(self) -> float:
        return math.log(self.value)

    @property
    def path_gap(self) -> float:
        return abs(self.value - self.direct) / abs(self.value)

    @property
    def flagged(self) -> bool:
        return bool(self.floored)


def _product(numerators: np.ndarray, primes: np.ndarray) -> PrimeProduct:
    factors = 1.0 - numerators / primes
    bad = factors <= 0
    floored = [int(p) for p in primes[bad]]
    factors = np.where(bad, FACTOR_FLOOR, factors)
    log_sum = math.fsum(np.log(factors))
    direct = 1.0
    for fac in factors:
        direct *= float(fac)
    return PrimeProduct(math.exp(log_sum), direct, floored)


def prime_product_sound(f: Eigenvalues, g: Eigenvalues, k: int, delta1: float = 0.0) -> PrimeProduct:
    """prod_{p <= k} (1 - (lambda_f(p^2)/2 + lambda_g(p^2)/2 + delta1)/p).

    lambda(p^2) is taken as lambda(p)^2 - 1.  Nonpositive factors (only
    possible at p = 2, 3) are floored at 1e-9 and reported.
    """
    lf, lg = _at_primes(f), _at_primes(g)
    ps = primes_up_to(int(k))
    sq_f = np.array([lf(int(p)) ** 2 - 1.0 for p in ps])
    sq_g = np.array([lg(int(p)) ** 2 - 1.0 for p in ps])
    return _product(0.5 * sq_f + 0.5 * sq_g + float(delta1), ps.astype(float))


def prime_product_holo(f: Eigenvalues, g: Eigenvalues, k: int) -> PrimeProduct:
    """prod_{p <= k} (1 - ((|lambda_f(p)| - 1)^2/4 + (|lambda_g(p)| - 1)^2/4)/p)."""
    lf, lg = _at_primes(f), _at_primes(g)
    ps = primes_up_to(int(k))
    a = np.array([(abs(lf(int(p))) - 1.0) ** 2 for p in ps])
    b = np.array([(abs(lg(int(p))) - 1.0) ** 2 for p in ps])
    return _product(0.25 * a + 0.25 * b, ps.astype(float))


@dataclass
class ShiftedSum:
    m: int
    x: float
    value: float
    ratio: float        # value / (x (log x)^eps prod (1 + (|lf(p)| - 1)/p)(1 + (|lg(p)| - 1)/p))


def shifted_convolution(f: Eigenvalues, g: Eigenvalues, m: int, x: float, eps: float = 0.0) -> ShiftedSum:
    """sum_{n <= x} |lambda_f(n) lambda_g(n + m)| by direct summation."""
    N = int(math.floor(x))
    if N < 1:
        raise ValueError("x must be at least 1")
    lf, lg = _table(f, N + abs(m)), _table(g, N + abs(m))
    n = np.arange(1, N + 1)
    shifted = n + m
    ok = shifted >= 1
    value = math.fsum(np.abs(lf[n[ok]] * lg[shifted[ok]]))
    ps = primes_up_to(N).astype(float)
    pf = np.array([abs(_at_primes(f)(int(p))) for p in ps])
    pg = np.array([abs(_at_primes(g)(int(p))) for p in ps])
    log_env = math.log(N) + (eps * math.log(math.log(N)) if N > 2 else 0.0)
    log_env += math.fsum(np.log1p((pf - 1) / ps)) + math.fsum(np.log1p((pg - 1) / ps))
    return ShiftedSum(m, float(x), value, value / math.exp(log_env))


def _table(f: Eigenvalues, n_max: int) -> np.ndarray:
    if isinstance(f, HeckeEigenform) and f.n_max >= n_max and not np.isnan(f.lam[1:n_max + 1]).any():
        return f.lam[:n_max + 1]
    fn = (lambda n: lambda_of(f, n)) if isinstance(f, HeckeEigenform) else f
    out = np.empty(n_max + 1)
    out[0] = 0.0
    for n in range(1, n_max + 1):
        out[n] = fn(n)
    return out


# ---------------------------------------------------------------------------
# archimedean factor


def watson_prefactor(k: float, t: float) -> float:
    """pi^3 |Gamma(k - 1/2 + it)|^2 / (2 Gamma(k)^2) via log-Gamma."""
    from .specfun import log_gamma
    if k < 4:
        raise ValueError("k must be at least 4")
    lg = log_gamma(complex(k - 0.5, t)).real
    return math.exp(2 * lg - 2 * math.lgamma(k)) * math.pi ** 3 / 2


# ---------------------------------------------------------------------------
# the min-max exponent


def exponent_objective(alpha, lam1, lam2, delta1: float):
    """L(alpha, l1, l2) = -alpha d - (1+alpha)/4 (l1^2 + l2^2) + (1-alpha)/2 (l1 + l2) - (1-3alpha)/2."""
    q = lambda lam: -(1 + alpha) / 4 * lam * lam + (1 - alpha) / 2 * lam
    return -alpha * delta1 + q(lam1) + q(lam2) - (1 - 3 * alpha) / 2


@dataclass
class OptimizerResult:
    delta1: mpmath.mpf
    alpha_star: float
    L: mpmath.mpf
    series_order: int          # 0 when the closed form was used
    bits: int
    route_gap: float           # |closed form - series| / |L| (nan when L = 0)
    grid_value: float          # min over alpha of max over (l1, l2) on the grid
    grid_bound: float          # discretization bound for the grid value
    argmax_gap: float          # max over alpha of |grid argmax - (1 - alpha)/(1 + alpha)|

    @property
    def grid_ok(self) -> bool:
        return (abs(self.grid_value - float(self.L)) < 3 * self.grid_bound
                and self.argmax_gap <= GRID_STEP / 2 + 1e-12)

    def to_json(self) -> dict:
        digits = int(self.bits * math.log10(2))
        return {
            "delta1": mpmath.nstr(self.delta1, digits),
            "alphaStar": self.alpha_star,
            "L": mpmath.nstr(self.L, digits),
            "LFloat": float(self.L),
            "precisionBits": self.bits,
            "seriesOrder": self.series_order,
            "routeGap": self.route_gap,
            "gridValue": self.grid_value,
            "gridBound": self.grid_bound,
            "argmaxGap": self.argmax_gap,
        }


def resolve_delta1(choice: str | float) -> str:
    """Preset name or number -> decimal string."""
    if isinstance(choice, str) and choice in DELTA1_PRESETS:
        return DELTA1_PRESETS[choice]
    return str(choice)


def _closed_form(d: mpmath.mpf) -> mpmath.mpf:
    return 2 * mpmath.sqrt(2 * (2 - d)) - 4 + d


def _series(d: mpmath.mpf, eps: mpmath.mpf) -> tuple[mpmath.mpf, int]:
    """sum_{j >= 2} 4 binom(1/2, j) (-d/2)^j, the expansion of 4 sqrt(1 - d/2) - 4 + d."""
    total = mpmath.mpf(0)
    j = 2
    while True:
        term = 4 * mpmath.binomial(mpmath.mpf(1) / 2, j) * (-d / 2) ** j
        total += term
        if abs(term) <= eps * abs(total) or j > 400:
            return total, j
        j += 1


def _grid_check(delta1: float, step: float = GRID_STEP) -> tuple[float, float, float]:
    alpha = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    lam = np.linspace(0.0, 2.0, int(round(2 / step)) + 1)
    a = alpha[:, None]
    q = -(1 + a) / 4 * lam * lam + (1 - a) / 2 * lam
    best = q.argmax(axis=1)
    inner = 2 * q.max(axis=1) - alpha * delta1 - (1 - 3 * alpha) / 2
    argmax_gap = float(np.max(np.abs(lam[best] - (1 - alpha) / (1 + alpha))))
    # inner max: 2 * (1+alpha)/4 * (step/2)^2; outer min: L'' <= 4, so 2 (step/2)^2
    bound = step * step
    return float(inner.min()), bound, argmax_gap


def optimize_exponent(delta1: str | float, bits: int = 256) -> OptimizerResult:
    """min over alpha in [0, 1] of max over l1, l2 in [0, 2] of L(alpha, l1, l2).

    The closed form 2 sqrt(2 (2 - d)) - 4 + d cancels catastrophically for
    tiny d, so it is evaluated with `bits` of working precision; below 1e-8
    the series in d is the primary route and the closed form cross-checks it.
    """
    if bits < 128:
        raise ValueError("at least 128 bits are required")
    with mpmath.workprec(bits + 32):
        d = mpmath.mpf(resolve_delta1(delta1))
        if not 0 <= d <= 1:
            raise ValueError("delta1 must lie in [0, 1]")
        closed = _closed_form(d)
        alpha = mpmath.sqrt(2 / (2 - d)) - 1
        if d == 0:
            L, order, gap = mpmath.mpf(0), 0, float("nan")
        else:
            ser, j = _series(d, mpmath.mpf(2) ** (-bits))
            gap = float(abs(closed - ser) / abs(ser))
            if d < SERIES_SWITCH:
                L, order = ser, j
            else:
                L, order = closed, 0
        grid, bound, agap = _grid_check(float(d))
        L = +L
    with mpmath.workprec(bits):
        L = +L
        d = +d
    return OptimizerResult(d, float(alpha), L, order, bits, gap, grid, bound, agap)


# ---------------------------------------------------------------------------
# Hecke relation at p^2


def hecke_square_relation_check(f: Eigenvalues, P: int, square: Callable[[int], float] | None = None) -> float:
    """max_{p <= P} |lambda(p^2) - (lambda(p)^2 - 1)|.

    For an eigenform lambda(p^2) comes from its q-expansion coefficient, the
    eigenvalue of T_{p^2}; for a callable pass the p^2 values as `square`.
    """
    from .eigen import hecke_square_residual
    if isinstance(f, HeckeEigenform) and square is None:
        return hecke_square_residual(f, P)
    lp = _at_primes(f)
    sq = square or (lambda p: lp(p * p))
    return max((abs(sq(int(p)) - (lp(int(p)) ** 2 - 1.0)) for p in primes_up_to(P)), default=0.0)


# ---------------------------------------------------------------------------
# Mertens normalization


@dataclass
class MertensResult:
    delta: float
    x: np.ndarray
    ratios: np.ndarray        # prod_{p <= x}(1 - delta/p) (log x)^delta
    degenerate: bool          # a factor vanished (delta = 2 at p = 2)

    @property
    def median(self) -> float:
        return float(np.median(self.ratios))

    @property
    def bounded(self) -> bool:
        """Whether all ratios with 1e3 <= x <= 1e7 lie within a factor 3 of their median."""
        if self.degenerate:
            return False
        sel = (self.x >= 1e3) & (self.x <= 1e7)
        r = self.ratios[sel]
        if r.size == 0:
            return True
        med = float(np.median(r))
        return bool(np.all(r <= 3 * med) and np.all(r >= med / 3))

    def to_json(self) -> dict:
        return {"delta": self.delta, "x": [float(v) for v in self.x],
                "ratios": [float(v) for v in self.ratios], "degenerate": self.degenerate,
                "bounded": self.bounded}


def default_mertens_grid() -> np.ndarray:
    return np.logspace(3, 7, 9)


def mertens_check(delta: float, x_grid: Sequence[float] | None = None) -> MertensResult:
    """prod_{p <= x}(1 - delta/p) (log x)^delta over a grid of x, in log space."""
    if not -2 <= delta <= 2:
        raise ValueError("delta must lie in [-2, 2]")
    x = np.asarray(default_mertens_grid() if x_grid is None else x_grid, dtype=float)
    if np.any(x < 2) or np.any(x > MERTENS_CAP):
        raise ValueError(f"x must lie in [2, {MERTENS_CAP:.0e}]")
    ps = primes_up_to(int(x.max())).astype(float)
    factors = 1.0 - delta / ps
    if np.any(factors <= 0):
        return MertensResult(float(delta), x, np.zeros_like(x), True)
    cum = np.cumsum(np.log(factors))
    count = np.searchsorted(ps, x, side="right")
    logs = np.where(count > 0, cum[np.maximum(count - 1, 0)], 0.0) + delta * np.log(np.log(x))
    return MertensResult(float(delta), x, np.exp(logs), False)


# ---------------------------------------------------------------------------
# exploratory decay fit


@dataclass
class DecayFit:
    """Least-squares slope of log|<psi F, G>| against log log k; exploratory only."""

    slope: float
    intercept: float
    stderr: float
    ci95: tuple[float, float]
    residuals: np.ndarray
    n: int

    def to_json(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "stderr": self.stderr,
                "ci95": list(self.ci95), "residuals": [float(r) for r in self.residuals],
                "points": self.n, "label": "exploratory: asymptotic rates are not checked"}


def decay_fit(scan: Sequence[tuple[float, float]]) -> DecayFit:
    """Fit log|value| = slope * log log k + c over (k, value) pairs."""
    if len(scan) < 5:
        raise ValueError("degenerate scan: need at least 5 weights")
    k = np.array([float(a) for a, _ in scan])
    v = np.array([abs(complex(b)) for _, b in scan])
    if np.any(k <= math.e) or np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("degenerate scan: weights must exceed e and values be finite and nonzero")
    X = np.log(np.log(k))
    if np.ptp(X) == 0:
        raise ValueError("degenerate scan: all weights coincide")
    Y = np.log(v)
    fit = stats.linregress(X, Y)
    tq = stats.t.ppf(0.975, len(X) - 2)
    half = tq * fit.stderr
    resid = Y - (fit.slope * X + fit.intercept)
    return DecayFit(float(fit.slope), float(fit.intercept), float(fit.stderr),
                    (float(fit.slope - half), float(fit.slope + half)), resid, len(X))


# ---------------------------------------------------------------------------
# report


@dataclass
class BoundReport:
    weight: int
    pair: tuple[int, int]
    sound_product: PrimeProduct
    holo_product: PrimeProduct
    shifted_sums: dict[int, ShiftedSum]
    observed_inner: complex
    quad_error: float
    optimizer: OptimizerResult
    M: float = 1.0

    @property
    def envelopes(self) -> dict[str, float]:
        """The two bound shapes with constants and (log k)^eps dropped."""
        s = self.sound_product.value * self.M ** 1.5
        h = self.holo_product.value * self.M ** (5.0 / 3.0)
        return {"sound": s, "holo": h, "min": min(s, h)}

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "pair": list(self.pair),
            "soundProduct": self.sound_product.value,
            "soundProductFloored": self.sound_product.floored,
            "holoProduct": self.holo_product.value,
            "shiftedSums": {str(m): {"value": s.value, "ratio": s.ratio}
                            for m, s in sorted(self.shifted_sums.items())},
            "observedInner": {"re": self.observed_inner.real, "im": self.observed_inner.imag,
                              "abs": abs(self.observed_inner)},
            "quadErr": self.quad_error,
            "envelopes": self.envelopes,
            "optimizer": {"alphaStar": self.optimizer.alpha_star, "L": float(self.optimizer.L)},
        }


def bound_report(basis, i: int, j: int, psi, x: float = 1e5, shifts: Sequence[int] = (1, 2, 3),
                 delta1: str = "soundararajan-thorner") -> BoundReport:
    """Bound ingredients for the pair (F_i, F_j) (1-based) next to <psi F_i, F_j>."""
    from .observables import inner_product
    f, g = basis[i - 1], basis[j - 1]
    k = basis.weight
    opt = optimize_exponent(delta1)
    sound = prime_product_sound(f, g, k, float(opt.delta1))
    holo = prime_product_holo(f, g, k)
    sums = {m: shifted_convolution(f, g, m, x) for m in shifts}
    est = inner_product(psi, f, g)
    return BoundReport(k, (i, j), sound, holo, sums, complex(est.value), float(est.error), opt,
                       float(psi.M))


# ---------------------------------------------------------------------------
# decorrelation scan over weights

SCAN_COLUMNS = ("k", "i", "j", "reInner", "imInner", "absInner", "soundProduct", "holoProduct", "quadErr")


@dataclass
class ScanRow:
    k: int
    i: int
    j: int
    inner: complex
    quad_error: float
    sound_product: float
    holo_product: float

    @property
    def abs_inner(self) -> float:
        return abs(self.inner)

    def as_tuple(self) -> tuple:
        return (self.k, self.i, self.j, self.inner.real, self.inner.imag, self.abs_inner,
                self.sound_product, self.holo_product, self.quad_error)


@dataclass
class DecorScan:
    rows: list[ScanRow]

    def max_pair(self) -> list[tuple[int, float]]:
        """(k, max over pairs of |<psi F_i, F_j>|) for each weight."""
        best: dict[int, float] = {}
        for r in self.rows:
            best[r.k] = max(best.get(r.k, 0.0), r.abs_inner)
        return sorted(best.items())

    @property
    def fit(self) -> DecayFit:
        return decay_fit(self.max_pair())


def parse_weights(text: str) -> list[int]:
    """'24:60:4' -> [24, 28, ..., 60]; '12,24' -> [12, 24]."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad weight range {text!r}")
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 2
        if step <= 0 or lo > hi:
            raise ValueError(f"bad weight range {text!r}")
        return list(range(lo, hi + 1, step))
    return [int(p) for p in text.split(",") if p.strip()]


def _scan_weight(k: int, psi_doc: dict, delta1: float) -> list[ScanRow]:
    from .eigen import eigenbasis
    from .observables import inner_product, petersson_norm_calibrate
    from .qexpansion import cusp_dimension
    from .windows import TestFunction
    if cusp_dimension(k) < 2:
        return []
    psi = TestFunction.from_json(psi_doc)
    B = eigenbasis(k, 1000)
    petersson_norm_calibrate(B)
    rows = []
    for a in range(B.dim):
        for b in range(a + 1, B.dim):
            f, g = B[a], B[b]
            est = inner_product(psi, f, g)
            rows.append(ScanRow(k, a + 1, b + 1, complex(est.value), float(est.error),
                                prime_product_sound(f, g, k, delta1).value,
                                prime_product_holo(f, g, k).value))
    return rows


def decor_scan(weights: Sequence[int], psi, delta1: str = "soundararajan-thorner",
               workers: int = 1) -> DecorScan:
    """<psi F_i, F_j> for all pairs i < j at each weight, with both prime products.

    Weights with fewer than two eigenforms are skipped.  With workers > 1 the
    weights run in separate processes; rows come back in weight order either way.
    """
    d1 = float(mpmath.mpf(resolve_delta1(delta1)))
    doc = psi.to_json()
    ks = list(weights)
    if workers > 1 and len(ks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_weight, ks, [doc] * len(ks), [d1] * len(ks)))
    else:
        parts = [_scan_weight(k, doc, d1) for k in ks]
    return DecorScan([r for part in parts for r in part])
