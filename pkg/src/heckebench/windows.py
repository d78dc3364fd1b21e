"""Smooth compactly supported windows: radial windows Psi(y) on (0, inf) with
their Mellin transforms, and bump test functions psi on the fundamental domain
with the Fourier slices of their periodization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

B_CEILING = 4.0          # supp Psi within [1/2, B*M]
GAUSS_DAMPING = 8.0      # kappa in exp(-kappa^2 v^2 / 2)
MELLIN_NODES = 1024

PROFILES = ("plateau-bump-v1", "gauss-bump-v1")


def plateau_bump(v):
    """w(v) = exp(1 - 1/(1 - v^2)) on |v| < 1, zero outside."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    inside = np.abs(v) < 1.0
    vi = v[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - vi * vi))
    return out


def gauss_bump(v, kappa: float = GAUSS_DAMPING):
    """Plateau bump damped by a Gaussian of width 1/kappa."""
    v = np.asarray(v, dtype=float)
    return np.exp(-0.5 * kappa * kappa * v * v) * plateau_bump(v)


def _profile(name: str):
    if name == "plateau-bump-v1":
        return plateau_bump
    if name == "gauss-bump-v1":
        return gauss_bump
    raise ValueError(f"unknown profile {name!r}; expected one of {PROFILES}")


@dataclass(frozen=True)
class RadialWindow:
    """Psi(y) = scale * w((log y - c)/r) supported on [lo, hi].

    The profile acts in the variable log y so the Mellin transform is a
    Fourier transform of a smooth compactly supported function.
    """

    lo: float
    hi: float
    profile: str = "gauss-bump-v1"
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValueError("support must satisfy 0 < lo < hi")
        _profile(self.profile)

    @classmethod
    def for_scale(cls, M: float, B: float = B_CEILING, profile: str = "gauss-bump-v1") -> "RadialWindow":
        """Window supported on [1/2, B M]."""
        if M < 1:
            raise ValueError("M must be at least 1")
        return cls(0.5, B * M, profile)

    @property
    def center(self) -> float:
        return 0.5 * (math.log(self.lo) + math.log(self.hi))

    @property
    def radius(self) -> float:
        return 0.5 * (math.log(self.hi) - math.log(self.lo))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0
        v = (np.log(y[pos]) - self.center) / self.radius
        out[pos] = self.scale * _profile(self.profile)(v)
        return out if out.ndim else float(out)

    def scaled(self, factor: float) -> "RadialWindow":
        return RadialWindow(self.lo, self.hi, self.profile, self.scale * factor)

    # quadrature in u = log y; the integrand vanishes to all orders at both
    # ends, so the trapezoid rule converges spectrally

    def log_nodes(self, n: int = MELLIN_NODES) -> tuple[np.ndarray, np.ndarray]:
        u = np.linspace(math.log(self.lo), math.log(self.hi), n + 1)[1:-1]
        du = (math.log(self.hi) - math.log(self.lo)) / n
        return u, np.full(u.shape, du)

    def nodes(self, n: int = MELLIN_NODES) -> tuple[np.ndarray, np.ndarray]:
        """(y, w) with sum w g(y) = int Psi(y) g(y) dy."""
        u, du = self.log_nodes(n)
        y = np.exp(u)
        return y, du * y * self(y)

    def mellin(self, s, n: int = MELLIN_NODES):
        """Psi~(s) = int Psi(y) y^(s-1) dy, vectorized over s."""
        u, du = self.log_nodes(n)
        vals = self(np.exp(u)) * du
        s_arr = np.asarray(s, dtype=complex)
        out = np.exp(np.multiply.outer(s_arr, u)) @ vals
        return complex(out) if np.ndim(out) == 0 else out

    def to_json(self) -> dict:
        return {"support": [self.lo, self.hi], "profile": self.profile, "scale": self.scale}


def mellin(window: RadialWindow, s, n: int = MELLIN_NODES):
    return window.mellin(s, n)


def h_window(lo: float = 1.0, hi: float = 2.0, profile: str = "gauss-bump-v1") -> RadialWindow:
    """The fixed window h on [1, 2], rescaled so int h(y) y^-2 dy = pi/3."""
    base = RadialWindow(lo, hi, profile)
    m = base.mellin(-1.0).real
    return base.scaled((math.pi / 3) / m)


def mellin_inverse(window: RadialWindow, y: float, sigma: float = 2.0,
                   t_max: float = 60.0, step: float = 0.05) -> float:
    """(1/2 pi i) int_(sigma) Psi~(-s) y^s ds by the trapezoid rule in t."""
    t = np.arange(-t_max, t_max + step / 2, step)
    s = sigma + 1j * t
    vals = window.mellin(-s) * np.exp(s * math.log(y))
    return float((np.sum(vals) * step).real / (2 * math.pi))


# ---------------------------------------------------------------------------
# test functions on the fundamental domain


FFT_POINTS = 1 << 14


@dataclass(frozen=True)
class TestFunction:
    """psi(x + iy) = w(sx (x - x0)) w(sy (y - y0)), a product bump inside F."""

    __test__ = False  # not a pytest class

    M: float
    x0: float
    y0: float
    sx: float
    sy: float
    profile: str = "plateau-bump-v1"
    B: float = B_CEILING

    def __post_init__(self):
        _profile(self.profile)
        if not (self.sx > 0 and self.sy > 0):
            raise ValueError("inverse widths must be positive")
        if self.M < 1:
            raise ValueError("M must be at least 1")
        wx, wy = 1.0 / self.sx, 1.0 / self.sy
        width = min(wx, wy)
        tol = 1e-12
        # distance from the support rectangle to the boundary of F
        dist_side = 0.5 - (abs(self.x0) + wx)
        xs = np.linspace(-wx, wx, 201) + self.x0
        dist_arc = float(np.min(np.hypot(xs, self.y0 - wy))) - 1.0
        if dist_side < width - tol or dist_arc < width - tol:
            raise ValueError("support of psi must stay a full width inside the fundamental domain")
        if self.y0 + wy > self.B * self.M + tol:
            raise ValueError("support of psi must lie below y = B M")

    @classmethod
    def default(cls, M: float = 1.0, profile: str = "plateau-bump-v1") -> "TestFunction":
        return cls(M, 0.0, 2.0, 4.0 * M, 4.0 * M, profile)

    @property
    def y_support(self) -> tuple[float, float]:
        return self.y0 - 1.0 / self.sy, self.y0 + 1.0 / self.sy

    @property
    def x_support(self) -> tuple[float, float]:
        return self.x0 - 1.0 / self.sx, self.x0 + 1.0 / self.sx

    def x_part(self, x):
        return _profile(self.profile)(self.sx * (np.asarray(x, dtype=float) - self.x0))

    def y_part(self, y):
        return _profile(self.profile)(self.sy * (np.asarray(y, dtype=float) - self.y0))

    def __call__(self, x, y):
        """psi on raw coordinates (the strip representative, no reduction)."""
        out = self.x_part(x) * self.y_part(y)
        return out if np.ndim(out) else float(out)

    def on_surface(self, x, y):
        """psi as a Gamma-invariant function: reduce to F first."""
        from .surface import reduce_arrays
        xr, yr = reduce_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return self(xr, yr)

    @cached_property
    def _x_coefficients(self) -> np.ndarray:
        """int_{-1/2}^{1/2} w(sx(x - x0)) e(-m x) dx for all m via one FFT."""
        N = FFT_POINTS
        x = -0.5 + np.arange(N) / N
        c = np.fft.fft(self.x_part(x)) / N
        m = np.fft.fftfreq(N, 1.0 / N)
        return c * np.exp(1j * math.pi * m)     # shift grid origin from -1/2 to 0

    def x_coefficient(self, m: int) -> complex:
        if abs(m) >= FFT_POINTS // 4:
            raise ValueError("frequency beyond the resolved range")
        return complex(self._x_coefficients[m])

    def fourier_slice(self, m: int, y):
        """Psi_m(y) = int_{-1/2}^{1/2} psi(x + iy) e(-m x) dx."""
        out = self.x_coefficient(m) * self.y_part(y)
        return complex(out) if np.ndim(out) == 0 else out

    def slice_window(self, m: int) -> "SliceWindow":
        return SliceWindow(self, m)

    def mode_cutoff(self, tol: float = 1e-12, m_cap: int = 2000) -> int:
        """Smallest m0 with sum_{|m| > m0} |Psi_m| below tol * |Psi_0|."""
        c = np.abs(self._x_coefficients)
        pair = c[1:FFT_POINTS // 4] + c[-1:-FFT_POINTS // 4:-1]      # |m| = 1, 2, ...
        tail = np.cumsum(pair[::-1])[::-1]                            # tail[j] = sum_{|m| > j}
        above = np.flatnonzero(tail > tol * c[0])
        m0 = 0 if above.size == 0 else int(above[-1]) + 1
        return min(m0, m_cap)

    def derivative_constants(self, n: int = 201, step: float = 1e-4) -> dict[str, float]:
        """max y^(a+b) |d_x^a d_y^b psi| / M^(a+b) on a grid, for a + b <= 2."""
        xs = np.linspace(*self.x_support, n)
        ys = np.linspace(*self.y_support, n)
        X, Y = np.meshgrid(xs, ys)
        f = self
        hx = hy = step
        d = {
            "0,0": f(X, Y),
            "1,0": (f(X + hx, Y) - f(X - hx, Y)) / (2 * hx),
            "0,1": (f(X, Y + hy) - f(X, Y - hy)) / (2 * hy),
            "2,0": (f(X + hx, Y) - 2 * f(X, Y) + f(X - hx, Y)) / hx ** 2,
            "0,2": (f(X, Y + hy) - 2 * f(X, Y) + f(X, Y - hy)) / hy ** 2,
            "1,1": (f(X + hx, Y + hy) - f(X + hx, Y - hy) - f(X - hx, Y + hy)
                    + f(X - hx, Y - hy)) / (4 * hx * hy),
        }
        out = {}
        for key, arr in d.items():
            a, b = map(int, key.split(","))
            out[key] = float(np.max(np.abs(arr) * Y ** (a + b)) / self.M ** (a + b))
        return out

    def to_json(self) -> dict:
        return {"M": self.M, "center": [self.x0, self.y0], "widths": [self.sx, self.sy],
                "profile": self.profile}

    @classmethod
    def from_json(cls, doc: dict) -> "TestFunction":
        x0, y0 = doc["center"]
        sx, sy = doc["widths"]
        return cls(float(doc["M"]), float(x0), float(y0), float(sx), float(sy),
                   doc.get("profile", "plateau-bump-v1"))

    @classmethod
    def load(cls, path) -> "TestFunction":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class SliceWindow:
    """y -> Psi_m(y), the m-th Fourier slice of a test function."""

    psi: TestFunction
    m: int

    @property
    def lo(self) -> float:
        return self.psi.y_support[0]

    @property
    def hi(self) -> float:
        return self.psi.y_support[1]

    def __call__(self, y):
        return self.psi.fourier_slice(self.m, y)

    def nodes(self, n: int = 512) -> tuple[np.ndarray, np.ndarray]:
        """(y, w) with sum w g(y) = int Psi_m(y) g(y) dy (complex weights)."""
        lo, hi = self.lo, self.hi
        y = np.linspace(lo, hi, n + 1)[1:-1]
        dy = (hi - lo) / n
        return y, dy * np.asarray(self(y))
