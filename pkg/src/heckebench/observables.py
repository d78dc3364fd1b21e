"""Inner products on the modular surface and the unfolding identities behind
them: Petersson calibration, <w F, G> for several weights w, incomplete
Poincare and Eisenstein unfoldings, Rankin-Selberg at s = 2, the smoothed
Eisenstein decomposition I(Y) = sum_l I_l(Y), mass and L^4 observables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .automorphic import (
    DilatedWindow,
    Window,
    eval_eisenstein,
    evaluate_forms,
    incomplete_eisenstein,
    incomplete_poincare,
)
from .eigen import EigenBasis, HeckeEigenform, lambda_of
from .specfun import divisor_tau_array, log_bessel_k_imag, log_gamma, log_theta
from .surface import (
    QuadEstimate,
    QuadratureRule,
    default_y_max,
    quadrature_box,
    quadrature_fd,
    quadrature_strip,
    richardson,
)
from .windows import RadialWindow, TestFunction, B_CEILING

DEFAULT_LEVEL = 2
TWO_PI = 2.0 * math.pi


def norm_rule(k: int, level: int = DEFAULT_LEVEL) -> QuadratureRule:
    return quadrature_fd(default_y_max(k), level)


def _forms(basis_or_forms) -> list[HeckeEigenform]:
    return list(basis_or_forms.forms if isinstance(basis_or_forms, EigenBasis) else basis_or_forms)


# ---------------------------------------------------------------------------
# calibration and plain inner products


@dataclass
class Calibration:
    log_a1: list[float]
    norm_integrals: QuadEstimate     # provisional int y^k |f|^2 dmu, scaled by exp(-2 shift)
    shift: float


def petersson_norm_calibrate(basis: EigenBasis, rule: QuadratureRule | None = None) -> Calibration:
    """Set log a_f(1) = -1/2 log int_F y^k |f|^2 dmu (with a_f(1) = 1)."""
    forms = _forms(basis)
    k = forms[0].weight
    rule = rule or norm_rule(k)
    zeros = [0.0] * len(forms)
    probe = evaluate_forms(forms, rule.x, rule.y, zeros)
    shift = float(max(np.max(e.log_abs) for e in probe))

    def evaluate(r: QuadratureRule):
        evs = evaluate_forms(forms, r.x, r.y, zeros)
        return np.array([r.integrate(np.exp(2 * (e.log_abs - shift))) for e in evs])

    est = richardson(evaluate, rule)
    logs = [-shift - 0.5 * math.log(float(np.real(v))) for v in est.value]
    for f, la in zip(forms, logs):
        f.assign_log_a1(la)
    return Calibration(logs, est, shift)


def _weight_on(w, x, y):
    if w is None:
        return 1.0
    return w(x, y)


def gram_matrix(basis: EigenBasis, rule: QuadratureRule | None = None,
                weight: Callable | None = None) -> QuadEstimate:
    """Matrix of <w F_i, F_j> with a Richardson error per entry."""
    forms = _forms(basis)
    k = forms[0].weight
    rule = rule or norm_rule(k)

    def evaluate(r: QuadratureRule):
        vals = np.stack([e.value for e in evaluate_forms(forms, r.x, r.y)], axis=1)
        wv = r.w * _weight_on(weight, r.x, r.y)
        return (vals * wv[:, None]).T @ vals.conj()

    return richardson(evaluate, rule)


def _default_rule_for(weight, k: int) -> QuadratureRule:
    if isinstance(weight, TestFunction):
        (x0, x1), (y0, y1) = weight.x_support, weight.y_support
        return quadrature_box(x0, x1, y0, y1, level=2)
    return norm_rule(k)


def inner_product(weight, f: HeckeEigenform, g: HeckeEigenform,
                  rule: QuadratureRule | None = None) -> QuadEstimate:
    """<w F, G> = int_F w F conj(G) dmu with a Richardson error estimate.

    weight is None (the constant 1) or a callable w(x, y) on F.  For a
    TestFunction the rule defaults to its support rectangle.
    """
    if f.weight != g.weight:
        raise ValueError("forms must share one weight")
    rule = rule or _default_rule_for(weight, f.weight)
    same = f is g

    def evaluate(r: QuadratureRule):
        ev = evaluate_forms([f] if same else [f, g], r.x, r.y)
        F = ev[0].value
        G = F if same else ev[1].value
        # max|w| times the norms rides along, so roundoff is judged against
        # the Cauchy-Schwarz scale rather than a cross term near zero
        return np.array([r.integrate(_weight_on(weight, r.x, r.y) * F * G.conj()),
                         w_max * r.integrate(np.abs(F) ** 2), w_max * r.integrate(np.abs(G) ** 2)])

    fine = rule if rule.level >= 2 else rule.refine(2 - rule.level)
    w_max = float(np.max(np.abs(_weight_on(weight, fine.x, fine.y)), initial=0.0))
    est = richardson(evaluate, rule)
    return QuadEstimate(complex(est.value[0]), float(est.error[0]), float(est.ratio[0]), est.levels)


class PairCache:
    """Write-once cache of <psi F_i, F_j> per (weight, psi)."""

    def __init__(self):
        self._store: dict = {}

    def get(self, psi: TestFunction, basis: EigenBasis, i: int, j: int) -> QuadEstimate:
        key = (basis.weight, tuple(sorted(psi.to_json().items(), key=str)).__repr__(), i, j)
        if key not in self._store:
            self._store[key] = inner_product(psi, basis[i], basis[j])
        return self._store[key]


# ---------------------------------------------------------------------------
# incomplete Poincare series


def _window_nodes(window, n: int = 512):
    if hasattr(window, "nodes"):
        return window.nodes(n)
    lo, hi = window.lo, window.hi
    y = np.linspace(lo, hi, n + 1)[1:-1]
    return y, (hi - lo) / n * np.asarray(window(y))


def unfold_poincare_rhs(m: int, window, f: HeckeEigenform, g: HeckeEigenform,
                        n_max: int | None = None) -> complex:
    """a_f(1) a_g(1) sum_n lambda_f(n) lambda_g(n+m) (n(n+m))^((k-1)/2)
    int y^(k-2) e^(-2 pi (2n+m) y) Psi(y) dy, in log space."""
    if m == 0:
        raise ValueError("m must be nonzero")
    k = f.weight
    M = window.hi / B_CEILING
    y, w = _window_nodes(window)
    n_max = n_max or max(int(math.ceil(k * B_CEILING * M / math.pi)),
                         series_length(k, float(y.min()), abs(m)))
    n = np.arange(max(1, 1 - m), n_max + 1)
    lf = np.array([lambda_of(f, int(v)) for v in n])
    lg = np.array([lambda_of(g, int(v + m)) for v in n])
    ex = (0.5 * (k - 1) * np.log(n * (n + m).astype(float))[:, None]
          + (k - 2) * np.log(y)[None, :] - TWO_PI * np.multiply.outer(2 * n + m, y)
          + f.log_a1 + g.log_a1)
    return complex(np.sum((lf * lg)[:, None] * np.exp(ex) * w[None, :]))


def poincare_strip_lhs(m: int, window, f: HeckeEigenform, g: HeckeEigenform,
                       level: int = 2) -> QuadEstimate:
    """Unfolded side: int over [-1/2,1/2] x supp Psi of e(mx) Psi(y) F conj(G) dmu."""
    rule = quadrature_strip(window.lo, window.hi, level)

    def evaluate(r: QuadratureRule):
        ev = evaluate_forms([f, g], r.x, r.y)
        wv = np.exp(2j * math.pi * m * r.x) * np.asarray(window(r.y))
        return r.integrate(wv * ev[0].value * ev[1].value.conj())

    return richardson(evaluate, rule)


def poincare_folded_lhs(m: int, window, f: HeckeEigenform, g: HeckeEigenform,
                        level: int = DEFAULT_LEVEL) -> QuadEstimate:
    """Folded side: <P_m(., Psi) F, G> over F with the coset-sum P_m."""
    return inner_product(lambda x, y: incomplete_poincare(m, window, x, y), f, g,
                         norm_rule(f.weight, level))


def mellin_gamma_identity(window: RadialWindow, n: int, m: int, k: int, sigma: float = 2.0,
                          t_max: float | None = None, step: float = 0.05) -> tuple[float, complex]:
    """Both sides of int y^(k-2) e^(-2 pi (2n+m) y) Psi(y) dy
    = (1/2 pi i) int_(sigma) Psi~(-s) Gamma(s+k-1) (2 pi (2n+m))^-(s+k-1) ds."""
    a = TWO_PI * (2 * n + m)
    y, w = _window_nodes(window, 2048)
    direct = float(np.sum(w * np.exp((k - 2) * np.log(y) - a * y)))
    M = window.hi / B_CEILING
    T = t_max or 60.0 * M
    t = -T + (np.arange(int(round(2 * T / step))) + 0.5) * step
    s = sigma + 1j * t
    vals = window.mellin(-s) * np.exp(log_gamma(s + k - 1) - (s + k - 1) * math.log(a))
    contour = complex(np.sum(vals) * step / TWO_PI)
    return direct, contour


# ---------------------------------------------------------------------------
# Rankin-Selberg at s = 2


@dataclass
class RankinSelbergCheck:
    quadrature: QuadEstimate
    series: float
    tail_estimate: float
    terms: int

    @property
    def relative_deviation(self) -> float:
        return abs(self.quadrature.value - self.series) / abs(self.series)


def rankin_selberg_check(f: HeckeEigenform, g: HeckeEigenform, n_terms: int | None = None,
                         level: int = DEFAULT_LEVEL) -> RankinSelbergCheck:
    """<E(., 2) F, G> by quadrature vs a_f a_g Gamma(k+1)(4 pi)^-(k+1) sum lambda_f lambda_g n^-2."""
    k = f.weight
    s = 2.0
    est = inner_product(lambda x, y: eval_eisenstein(x, y, s), f, g, norm_rule(k, level))
    N = n_terms or min(f.n_max, g.n_max)
    n = np.arange(1, N + 1, dtype=float)
    prod = f.lam[1:N + 1] * g.lam[1:N + 1]
    partial = float(np.sum(prod / n ** 2))
    tail = 0.0
    if f is g:
        # mean of lambda(n)^2 over n <= N times sum_{n > N} n^-2
        tail = float(np.mean(prod)) * (1.0 / N - 0.5 / N ** 2)
    log_pref = f.log_a1 + g.log_a1 + special.gammaln(k + 1) - (k + 1) * math.log(4 * math.pi)
    series = math.exp(log_pref) * (partial + tail)
    return RankinSelbergCheck(est, series, math.exp(log_pref) * tail, N)


# ---------------------------------------------------------------------------
# Fourier coefficients of incomplete Eisenstein series


@dataclass
class ContourResult:
    value: complex
    truncation: float       # contribution of the outer tenth, |t| in [0.9 T, T]
    t_max: float


def _t_grid(T: float, step: float) -> np.ndarray:
    """Midpoint grid on [-T, T]; it never hits the pole of theta at t = 0."""
    n = int(round(2 * T / step))
    return -T + (np.arange(n) + 0.5) * step


def incomplete_eisenstein_coeff_contour(window: RadialWindow, ell: int, y: float,
                                        t_max: float | None = None, step: float = 0.05,
                                        ) -> ContourResult:
    """a_{Psi,l}(y) from the Mellin contour shifted to Re s = 1/2."""
    M = window.hi / B_CEILING
    T = t_max or 60.0 * M
    t = _t_grid(T, step)
    mt = window.mellin(-0.5 - 1j * t)
    keep = np.abs(mt) > 1e-18 * np.max(np.abs(mt))
    vals = np.zeros(len(t), dtype=complex)
    if ell == 0:
        s = 0.5 + 1j * t
        phi = np.exp(log_theta(1 - s) - log_theta(s))
        vals = mt * (np.exp(s * math.log(y)) + phi * np.exp((1 - s) * math.log(y))) / TWO_PI
        head = 3.0 / math.pi * window.mellin(-1.0)
    else:
        u = TWO_PI * abs(ell) * y
        tau = divisor_tau_array(t, abs(ell))
        idx = np.flatnonzero(keep)
        lt = log_theta(0.5 + 1j * t[idx])
        for j, ti, l_th in zip(idx, t[idx], lt):
            mant, ls = log_bessel_k_imag(float(ti), u)
            vals[j] = mt[j] * tau[j] * mant * np.exp(ls - l_th)
        vals *= math.sqrt(y) / math.pi
        head = 0.0
    total = head + np.sum(vals) * step
    outer = np.sum(vals[np.abs(t) > 0.9 * T]) * step
    return ContourResult(complex(total), float(abs(outer)), T)


def incomplete_eisenstein_coeffs_direct(window: Window, y: float, n_x: int = 256) -> np.ndarray:
    """All a_{Psi,l}(y) at once: periodic trapezoid (one FFT) of the coset sum."""
    x = np.arange(n_x) / n_x - 0.5
    vals = incomplete_poincare(0, window, x, np.full(n_x, float(y)))
    c = np.fft.fft(vals) / n_x
    m = np.fft.fftfreq(n_x, 1.0 / n_x)
    return c * np.exp(1j * math.pi * m)           # grid starts at x = -1/2


def incomplete_eisenstein_coeffs(window: RadialWindow, ell: int, y: float,
                                 method: str = "contour") -> complex:
    if method == "contour":
        return incomplete_eisenstein_coeff_contour(window, ell, y).value
    if method == "direct":
        return complex(incomplete_eisenstein_coeffs_direct(window, y)[ell])
    raise ValueError("method must be 'contour' or 'direct'")


def a0_main_term(window: RadialWindow) -> float:
    """(3/pi) int Psi(v) v^-2 dv, the leading part of a_{Psi,0}."""
    return 3.0 / math.pi * window.mellin(-1.0).real


# ---------------------------------------------------------------------------
# smoothed incomplete Eisenstein probe


@dataclass
class SmoothedProbe:
    Y: float
    direct: QuadEstimate            # I(Y) by quadrature over F
    modes: dict[int, complex]       # I_l(Y) from the unfolded series
    i0_from_s: complex              # I_0(Y) through S(t, h_1)
    s0_h: complex                   # S(0, h)
    plain: QuadEstimate             # <E(.|Psi) F, G>

    @property
    def series(self) -> complex:
        return complex(sum(self.modes.values()))

    @property
    def relative_deviation(self) -> float:
        return abs(self.direct.value - self.series) / abs(self.direct.value)


def _mode_series(f: HeckeEigenform, g: HeckeEigenform, ell: int, y: np.ndarray, w: np.ndarray,
                 n_max: int) -> complex:
    """a_f a_g sum_n lambda_f(n) lambda_g(n+l) (n(n+l))^((k-1)/2) sum_j w_j e^(-2 pi (2n+l) y_j) y_j^(k-2)."""
    k = f.weight
    n_max = min(n_max, series_length(k, float(np.min(y)), abs(ell)))
    n = np.arange(max(1, 1 - ell), n_max + 1)
    lf = np.array([lambda_of(f, int(v)) for v in n])
    lg = np.array([lambda_of(g, int(v + ell)) for v in n])
    ex = (0.5 * (k - 1) * np.log(n * (n + ell).astype(float))[:, None]
          + (k - 2) * np.log(y)[None, :] - TWO_PI * np.multiply.outer(2 * n + ell, y)
          + f.log_a1 + g.log_a1)
    return complex(np.sum((lf * lg)[:, None] * np.exp(ex) * w[None, :]))


def series_length(k: int, y_min: float, shift: int = 0, drop: float = 45.0) -> int:
    """n beyond which n^(k-1) e^(-4 pi n y_min) has fallen e^-drop below its peak."""
    n = np.arange(1, 100_000, dtype=float)
    g = (k - 1) * np.log(n) - 2 * TWO_PI * n * y_min
    peak = int(np.argmax(g))
    below = np.flatnonzero(g[peak:] < g[peak] - drop)
    return int(peak + below[0]) + 1 + shift


def s_function(f: HeckeEigenform, g: HeckeEigenform, H: RadialWindow, Y: float, t,
               n_max: int = 400) -> np.ndarray:
    """S(t, H) = a_f a_g sum lambda_f(n) lambda_g(n) n^(k-1) int H(Yy) e^(-4 pi n y) y^(k-2+it) dy."""
    k = f.weight
    u, wu = H.nodes(512)            # int H(u) g(u) du
    y = u / Y
    w = wu / Y
    n_max = min(n_max, series_length(k, float(y.min())), f.n_max, g.n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    lam = f.lam[1:n_max + 1] * g.lam[1:n_max + 1]
    ex = ((k - 1) * np.log(n)[:, None] + (k - 2) * np.log(y)[None, :]
          - 2 * TWO_PI * np.multiply.outer(n, y) + f.log_a1 + g.log_a1)
    base = lam @ (np.exp(ex) * w[None, :])          # per y node
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.exp(1j * np.multiply.outer(t, np.log(y))) @ base
    return out


def smoothed_eisenstein_probe(Y: float, h: RadialWindow, window: RadialWindow,
                              f: HeckeEigenform, g: HeckeEigenform, L: int = 8,
                              level: int = DEFAULT_LEVEL, n_max: int = 400,
                              y_nodes: int = 256, step: float = 0.05) -> SmoothedProbe:
    k = f.weight
    hY = DilatedWindow(h, Y)

    def weight(x, y):
        return incomplete_eisenstein(hY, x, y) * incomplete_eisenstein(window, x, y)

    direct = inner_product(weight, f, g, norm_rule(k, level))
    plain = inner_product(lambda x, y: incomplete_eisenstein(window, x, y), f, g, norm_rule(k, level))
    # unfolded modes; a_{Psi,l}(y) on the y-nodes of h(Y .)
    u, wu = h.nodes(y_nodes)
    ys = u / Y
    ws = wu / Y
    coeffs = np.array([incomplete_eisenstein_coeffs_direct(window, yy) for yy in ys])   # y x freq
    modes = {}
    for ell in range(-L, L + 1):
        modes[ell] = _mode_series(f, g, ell, ys, ws * coeffs[:, ell], n_max)
    # zero mode through S(t, h_1), h_1(y) = h(y) y^(1/2)
    h1 = _TimesSqrt(h)
    M = window.hi / B_CEILING
    t = _t_grid(60.0 * M, step)
    s = 0.5 + 1j * t
    mt = window.mellin(-0.5 - 1j * t)
    phi = np.exp(log_theta(1 - s) - log_theta(s))
    S_plus = s_function(f, g, h1, Y, t, n_max)
    S_minus = s_function(f, g, h1, Y, -t, n_max)
    s0 = complex(s_function(f, g, h, Y, [0.0], n_max)[0])
    i0 = (3.0 / math.pi) * window.mellin(-1.0) * s0 + \
        np.sum(mt * (S_plus + phi * S_minus)) * step / (TWO_PI * math.sqrt(Y))
    return SmoothedProbe(Y, direct, modes, complex(i0), s0, plain)


@dataclass(frozen=True)
class _TimesSqrt:
    base: RadialWindow

    @property
    def lo(self):
        return self.base.lo

    @property
    def hi(self):
        return self.base.hi

    def __call__(self, y):
        return self.base(y) * np.sqrt(np.asarray(y, dtype=float))

    def nodes(self, n: int = 512):
        y, w = self.base.nodes(n)
        return y, w * np.sqrt(y)


# ---------------------------------------------------------------------------
# J-near forms and the mass observable


@dataclass
class JNearForm:
    weight: int
    components: list[tuple[int, complex]]

    def __post_init__(self):
        idx = [j for j, _ in self.components]
        if len(set(idx)) != len(idx):
            raise ValueError("component indices must be distinct")
        norm = sum(abs(c) ** 2 for _, c in self.components)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"coefficients must have unit l2 norm (got {norm})")

    @property
    def J(self) -> int:
        return len(self.components)

    @classmethod
    def normalized(cls, weight: int, components: Sequence[tuple[int, complex]]) -> "JNearForm":
        s = math.sqrt(sum(abs(c) ** 2 for _, c in components))
        return cls(weight, [(j, complex(c) / s) for j, c in components])

    @classmethod
    def from_json(cls, weight: int, doc) -> "JNearForm":
        comps = [(int(e["index"]), complex(e.get("re", 0.0), e.get("im", 0.0))) for e in doc]
        return cls.normalized(weight, comps)


@dataclass
class MassObservable:
    direct: QuadEstimate
    bilinear: complex
    bilinear_error: float
    psi_mass: float        # (3/pi) <psi, 1>

    @property
    def discrepancy(self) -> float:
        return float(np.real(self.direct.value)) - self.psi_mass

    @property
    def route_gap(self) -> float:
        return abs(self.direct.value - self.bilinear)


def mass_observable(F: JNearForm, psi: TestFunction, basis: EigenBasis,
                    cache: PairCache | None = None) -> MassObservable:
    """<psi, |F|^2> directly and through the bilinear sum of pair inner products."""
    cache = cache or PairCache()
    forms = [basis[j - 1] for j, _ in F.components]
    coeffs = np.array([c for _, c in F.components])
    (x0, x1), (y0, y1) = psi.x_support, psi.y_support
    rule = quadrature_box(x0, x1, y0, y1, level=2)

    def evaluate(r: QuadratureRule):
        vals = np.stack([e.value for e in evaluate_forms(forms, r.x, r.y)], axis=1)
        comb = vals @ coeffs
        return r.integrate(psi(r.x, r.y) * np.abs(comb) ** 2)

    direct = richardson(evaluate, rule)
    bil = 0j
    err = 0.0
    for a, (i, ci) in enumerate(F.components):
        for b, (j, cj) in enumerate(F.components):
            e = cache.get(psi, basis, i - 1, j - 1)
            bil += ci * np.conj(cj) * e.value
            err += abs(ci * cj) * e.error
    mass = richardson(lambda r: r.integrate(psi(r.x, r.y)), rule)
    return MassObservable(direct, complex(bil), float(err), 3.0 / math.pi * float(np.real(mass.value)))


# ---------------------------------------------------------------------------
# L^4 norm and Parseval over the weight-2k basis


@dataclass
class ParsevalRecord:
    l4: QuadEstimate
    projections: QuadEstimate        # <F^2, H> for H in the weight-2k basis
    partial_sums: np.ndarray

    @property
    def parseval_sum(self) -> float:
        return float(self.partial_sums[-1])

    @property
    def relative_deviation(self) -> float:
        return abs(float(np.real(self.l4.value)) - self.parseval_sum) / abs(float(np.real(self.l4.value)))


def l4_parseval(f: HeckeEigenform, basis2k: EigenBasis, level: int = DEFAULT_LEVEL) -> ParsevalRecord:
    k2 = basis2k.weight
    if k2 != 2 * f.weight:
        raise ValueError("the second basis must have weight 2k")
    rule = norm_rule(k2, level)
    hs = list(basis2k.forms)

    def l4(r: QuadratureRule):
        F = evaluate_forms([f], r.x, r.y)[0].value
        return r.integrate(np.abs(F) ** 4)

    def proj(r: QuadratureRule):
        F = evaluate_forms([f], r.x, r.y)[0].value
        H = np.stack([e.value for e in evaluate_forms(hs, r.x, r.y)], axis=1)
        return (r.w * F * F) @ H.conj()

    a = richardson(l4, rule)
    b = richardson(proj, rule)
    partial = np.cumsum(np.abs(b.value) ** 2)
    return ParsevalRecord(a, b, partial)


# ---------------------------------------------------------------------------
# reports


def huang_xu_ratio(t: float, y: float = 3.0, x: float = 0.0) -> float:
    """|E(z, 1/2 + it)| / sqrt(y) / (1 + |t|)^(3/8); empirical report only."""
    val = eval_eisenstein(x, y, 0.5 + 1j * t)[0]
    return float(abs(val) / math.sqrt(y) / (1 + abs(t)) ** 0.375)


@dataclass
class SymSquareCheck:
    from_norm: float        # |a_f(1)|^2 Gamma(k) / (2 pi^2 (4 pi)^(k-1))
    from_series: float      # 1 / (zeta(2) sum lambda(n^2) n^-1 e^(-n/X))
    X: float

    @property
    def relative_deviation(self) -> float:
        return abs(self.from_norm - self.from_series) / abs(self.from_series)


def sym_square_crosscheck(f: HeckeEigenform, X: float = 1e4, cutoff: float = 20.0) -> SymSquareCheck:
    k = f.weight
    from_norm = math.exp(2 * f.log_a1 + special.gammaln(k) - math.log(2 * math.pi ** 2)
                         - (k - 1) * math.log(4 * math.pi))
    N = int(cutoff * X)
    n = np.arange(1, N + 1)
    lam_sq = _lambda_of_squares(f, N)
    L = (math.pi ** 2 / 6) * float(np.sum(lam_sq / n * np.exp(-n / X)))
    return SymSquareCheck(from_norm, 1.0 / L, X)


def _lambda_of_squares(f: HeckeEigenform, N: int) -> np.ndarray:
    """lambda(n^2) for n <= N from the prime eigenvalues (multiplicative)."""
    from .arith import smallest_prime_factor
    spf = smallest_prime_factor(max(N, 2))
    out = np.empty(N + 1)
    out[1] = 1.0
    cache: dict[tuple[int, int], float] = {}
    for n in range(2, N + 1):
        p = int(spf[n])
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        key = (p, e)
        val = cache.get(key)
        if val is None:
            lp = f.prime_lambda.get(p)
            if lp is None:
                raise KeyError(f"no eigenvalue for p={p}")
            prev, cur = 1.0, lp
            for _ in range(2 * e - 1):
                prev, cur = cur, lp * cur - prev
            val = cache[key] = cur
        out[n] = val * out[m]
    return out[1:]
