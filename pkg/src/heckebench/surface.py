"""Geometry of SL(2, Z) acting on the upper half-plane: points, group elements,
reduction into the fundamental domain F, and quadrature rules over F, over
rectangles inside F, and over the unfolded strip."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator

import mpmath
import numpy as np

GAUSS_ORDER = 10
REFUSE_RATIO = 0.7


def _floor(v) -> int:
    if isinstance(v, mpmath.mpf):
        return int(mpmath.floor(v))
    return math.floor(v)


@dataclass(frozen=True)
class SurfacePoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("y must be positive")

    @property
    def z(self) -> complex:
        return complex(float(self.x), float(self.y))

    def in_fundamental_domain(self, tol: float = 1e-12) -> bool:
        return abs(self.x) <= 0.5 + tol and self.x * self.x + self.y * self.y >= 1 - tol


@dataclass(frozen=True)
class GroupElement:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d):
            if not isinstance(v, int):
                raise TypeError("entries must be Python integers")
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("determinant must be 1")

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(1, 0, 0, 1)

    @classmethod
    def translation(cls, n: int) -> "GroupElement":
        return cls(1, n, 0, 1)

    @classmethod
    def inversion(cls) -> "GroupElement":
        return cls(0, -1, 1, 0)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.a * other.a + self.b * other.c,
                            self.a * other.b + self.b * other.d,
                            self.c * other.a + self.d * other.c,
                            self.c * other.b + self.d * other.d)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c


def act(g: GroupElement, z: SurfacePoint) -> SurfacePoint:
    """Mobius action (az + b)/(cz + d); works for float or mpf coordinates."""
    x, y = z.x, z.y
    cx_d = g.c * x + g.d
    den = cx_d * cx_d + (g.c * y) * (g.c * y)
    re = ((g.a * x + g.b) * cx_d + g.a * g.c * y * y) / den
    return SurfacePoint(re, y / den)


def reduce(z: SurfacePoint, max_steps: int = 10_000) -> tuple[SurfacePoint, GroupElement]:
    """Return (z', g) with z' = g z in F; each inversion strictly raises y."""
    x, y = z.x, z.y
    g = GroupElement.identity()
    for _ in range(max_steps):
        n = _floor(x + 0.5)
        if n:
            x = x - n
            g = GroupElement.translation(-n) @ g
        r2 = x * x + y * y
        if r2 >= 1:
            return SurfacePoint(x, y), g
        x, y = -x / r2, y / r2
        g = GroupElement.inversion() @ g
    raise RuntimeError("reduction did not terminate")


def reduce_arrays(x: np.ndarray, y: np.ndarray, max_steps: int = 200):
    """Vectorized float reduction; returns reduced (x, y)."""
    x = np.array(x, dtype=float, copy=True)
    y = np.array(y, dtype=float, copy=True)
    for _ in range(max_steps):
        x -= np.floor(x + 0.5)
        r2 = x * x + y * y
        bad = r2 < 1.0
        if not bad.any():
            return x, y
        x[bad], y[bad] = -x[bad] / r2[bad], y[bad] / r2[bad]
    raise RuntimeError("reduction did not terminate")


def reduce_with_factor(x: np.ndarray, y: np.ndarray, max_steps: int = 200):
    """Vectorized reduction returning (x', y', cz + d) with x' + iy' = g z.

    Needed for weight-k automorphy: f(z) = (cz + d)^-k f(gz).
    """
    x = np.array(x, dtype=float, copy=True)
    y = np.array(y, dtype=float, copy=True)
    z0 = x + 1j * y
    a, b = np.ones(x.shape), np.zeros(x.shape)
    c, d = np.zeros(x.shape), np.ones(x.shape)
    for _ in range(max_steps):
        n = np.floor(x + 0.5)
        x -= n
        a, b = a - n * c, b - n * d
        r2 = x * x + y * y
        bad = r2 < 1.0
        if not bad.any():
            return x, y, c * z0 + d
        a[bad], b[bad], c[bad], d[bad] = -c[bad], -d[bad], a[bad], b[bad]
        x[bad], y[bad] = -x[bad] / r2[bad], y[bad] / r2[bad]
    raise RuntimeError("reduction did not terminate")


# ---------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=32)
def _gauss(q: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (t + 1.0), 0.5 * w          # on [0, 1]


def _panels(edges: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = _gauss(q)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + h[:, None] * t[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (x, y) with weights that already include dmu = dx dy / y^2."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    region: str
    params: dict = field(default_factory=dict)
    level: int = 0

    def __len__(self) -> int:
        return len(self.w)

    def points(self) -> Iterator[tuple[SurfacePoint, float]]:
        for xi, yi, wi in zip(self.x, self.y, self.w):
            yield SurfacePoint(float(xi), float(yi)), float(wi)

    def integrate(self, values: np.ndarray):
        """Fixed-order summation of values * weights."""
        return np.dot(self.w, values)

    def apply(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]):
        return self.integrate(fn(self.x, self.y))

    def refine(self, delta: int = 1) -> "QuadratureRule":
        return _REBUILD[self.region](**self.params, level=self.level + delta)

    @property
    def area(self) -> float:
        return float(np.sum(self.w))

    def describe(self) -> dict:
        return {"region": self.region, "level": self.level, "nodes": len(self), **self.params}


def default_y_max(k: int) -> float:
    """y-cutoff for weight-k norms: peak k/(4 pi) of y^k e^(-4 pi y) plus a safe margin."""
    return k / (2 * math.pi) + 12 * math.sqrt(k) / (2 * math.pi)


def quadrature_fd(y_max: float, level: int = 0, x_panels: int | None = None,
                  q: int = GAUSS_ORDER) -> QuadratureRule:
    """Gauss rule on {z in F : y <= y_max}, fitted to the arc |z| = 1.

    Below y = 1 the region sqrt(1 - x^2) <= y <= 1 is mapped onto a rectangle,
    so no cell straddles the boundary.  Above y = 1 panels are geometric in y.
    """
    if y_max < 2:
        raise ValueError("y_max must be at least 2")
    if level < 0:
        raise ValueError("level must be nonnegative")
    if x_panels is None:
        x_panels = max(4, int(math.ceil(y_max / 2)))
    nx = x_panels * 2 ** level
    xs, wx = _panels(np.linspace(-0.5, 0.5, nx + 1), q)
    # cap region: y = b(x) + (1 - b(x)) s, s in [0, 1]
    ns = 2 ** level
    ss, ws = _panels(np.linspace(0.0, 1.0, ns + 1), q)
    b = np.sqrt(1.0 - xs * xs)
    X1 = np.repeat(xs, len(ss))
    S1 = np.tile(ss, len(xs))
    B1 = np.repeat(b, len(ss))
    Y1 = B1 + (1.0 - B1) * S1
    W1 = np.repeat(wx * (1.0 - b), len(ss)) * np.tile(ws, len(xs)) / Y1 ** 2
    # upper region, geometric panels in y
    ny = max(8, int(math.ceil(4 * math.log(y_max)))) * 2 ** level
    ys, wy = _panels(np.geomspace(1.0, y_max, ny + 1), q)
    X2 = np.repeat(xs, len(ys))
    Y2 = np.tile(ys, len(xs))
    W2 = np.repeat(wx, len(ys)) * np.tile(wy, len(xs)) / Y2 ** 2
    return QuadratureRule(np.concatenate([X1, X2]), np.concatenate([Y1, Y2]),
                          np.concatenate([W1, W2]), "fundamental_domain",
                          {"y_max": float(y_max), "x_panels": x_panels, "q": q}, level)


def quadrature_strip(y_min: float, y_max: float, level: int = 0, x_nodes: int = 64,
                     q: int = GAUSS_ORDER) -> QuadratureRule:
    """Tensor rule on [-1/2, 1/2] x [y_min, y_max]: periodic trapezoid in x,
    geometric Gauss panels in y."""
    if not 0 < y_min < y_max:
        raise ValueError("need 0 < y_min < y_max")
    nx = x_nodes * 2 ** level
    xs = -0.5 + (np.arange(nx) + 0.5) / nx
    wx = np.full(nx, 1.0 / nx)
    ny = max(8, int(math.ceil(4 * math.log(y_max / y_min)))) * 2 ** level
    ys, wy = _panels(np.geomspace(y_min, y_max, ny + 1), q)
    X = np.repeat(xs, len(ys))
    Y = np.tile(ys, len(xs))
    W = np.repeat(wx, len(ys)) * np.tile(wy, len(xs)) / Y ** 2
    return QuadratureRule(X, Y, W, "strip",
                          {"y_min": float(y_min), "y_max": float(y_max), "x_nodes": x_nodes, "q": q},
                          level)


def quadrature_box(x_lo: float, x_hi: float, y_lo: float, y_hi: float, level: int = 0,
                   nodes: int = 48) -> QuadratureRule:
    """Midpoint-trapezoid tensor rule on a rectangle inside F.

    Meant for integrands that vanish to all orders on the rectangle's edges
    (bump test functions), where the rule converges spectrally.
    """
    n = nodes * 2 ** level
    xs = x_lo + (np.arange(n) + 0.5) * (x_hi - x_lo) / n
    ys = y_lo + (np.arange(n) + 0.5) * (y_hi - y_lo) / n
    X = np.repeat(xs, n)
    Y = np.tile(ys, n)
    W = np.full(n * n, (x_hi - x_lo) * (y_hi - y_lo) / (n * n)) / Y ** 2
    return QuadratureRule(X, Y, W, "box",
                          {"x_lo": x_lo, "x_hi": x_hi, "y_lo": y_lo, "y_hi": y_hi, "nodes": nodes},
                          level)


_REBUILD = {
    "fundamental_domain": quadrature_fd,
    "strip": quadrature_strip,
    "box": quadrature_box,
}


class QuadratureNotConverged(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadEstimate:
    value: complex | np.ndarray
    error: float | np.ndarray
    ratio: float | np.ndarray   # |Q_l - Q_{l-1}| / |Q_{l-1} - Q_{l-2}|
    levels: tuple


def richardson(evaluate: Callable[[QuadratureRule], complex], rule: QuadratureRule,
               refuse: bool = True, floor: float = 1e-12) -> QuadEstimate:
    """Evaluate on rule and two coarser levels; error = last difference.

    Works for scalar or array-valued evaluate.  A contraction ratio above 0.7
    counts as non-convergence unless the differences are already at roundoff
    (floor relative to the largest value).
    """
    if rule.level < 2:
        rule = rule.refine(2 - rule.level)
    q0 = np.asarray(evaluate(rule.refine(-2)))
    q1 = np.asarray(evaluate(rule.refine(-1)))
    q2 = np.asarray(evaluate(rule))
    d1, d2 = np.abs(q1 - q0), np.abs(q2 - q1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d1 > 0, d2 / np.where(d1 > 0, d1, 1.0), 0.0)
    scale = max(float(np.max(np.abs(q2))), 1e-300)
    live = (d2 > floor * scale) & (d1 > floor * scale)
    if refuse and np.any(live & (ratio > REFUSE_RATIO)):
        worst = float(np.max(np.where(live, ratio, 0.0)))
        raise QuadratureNotConverged(
            f"quadrature did not converge: ratio {worst:.3g}, last difference {float(np.max(d2)):.3g}")
    if q2.ndim == 0:
        return QuadEstimate(complex(q2), float(d2), float(ratio), (rule.level - 2, rule.level - 1, rule.level))
    return QuadEstimate(q2, d2, ratio, (rule.level - 2, rule.level - 1, rule.level))
