"""Exact truncated q-expansions for level-1 modular forms.

Series are stored as integer numerators over a common positive denominator,
so every identity (E4^3 - E6^2 = 1728 Delta, Hecke relations) can be checked
bit-exactly.  Products go through Kronecker substitution on GMP integers,
which keeps expansions to ~10^5 terms cheap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import gmpy2


class EmptySpaceError(ValueError):
    """Raised when S_k = {0}."""


class TruncationError(ValueError):
    """Raised when a series has too few terms for the requested operation."""


# --------------------------------------------------------------------------
# Kronecker substitution helpers


def _pack(nums: Sequence[int], bits: int) -> gmpy2.mpz:
    """Evaluate sum nums[i] * 2^(bits*i) for signed integers in linear time."""
    nbytes = bits // 8
    pos = bytearray(nbytes * len(nums))
    neg = bytearray(nbytes * len(nums))
    any_neg = False
    for i, c in enumerate(nums):
        if c > 0:
            pos[i * nbytes:(i + 1) * nbytes] = int(c).to_bytes(nbytes, "little")
        elif c < 0:
            any_neg = True
            neg[i * nbytes:(i + 1) * nbytes] = int(-c).to_bytes(nbytes, "little")
    value = gmpy2.from_binary(b"\x01\x01" + bytes(pos)) if any(pos) else gmpy2.mpz(0)
    if any_neg:
        value -= gmpy2.from_binary(b"\x01\x01" + bytes(neg))
    return value


def _unpack(value: gmpy2.mpz, bits: int, count: int) -> list[int]:
    """Inverse of _pack for the first ``count`` signed digits."""
    nbytes = bits // 8
    half = gmpy2.mpz(1) << (bits - 1)
    # Adding half to every digit makes all digits non-negative; reducing
    # mod 2^(bits*count) discards the high digits.
    shifted = gmpy2.f_mod_2exp(value + _offset(bits, count), bits * count)
    raw = int(shifted).to_bytes(nbytes * count, "little", signed=False)
    h = int(half)
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - h
            for i in range(count)]


@lru_cache(maxsize=64)
def _offset(bits: int, count: int) -> gmpy2.mpz:
    nbytes = bits // 8
    digit = (1 << (bits - 1)).to_bytes(nbytes, "little")
    return gmpy2.from_binary(b"\x01\x01" + digit * count)


def _max_bits(nums: Sequence[int]) -> int:
    return max((abs(c).bit_length() for c in nums), default=0)


def int_convolve(a: Sequence[int], b: Sequence[int], n_terms: int) -> list[int]:
    """First ``n_terms`` coefficients of the product of two integer series."""
    a = a[:n_terms]
    b = b[:n_terms]
    if not a or not b:
        return [0] * n_terms
    if min(len(a), len(b)) <= 24:
        out = [0] * n_terms
        if len(a) > len(b):
            a, b = b, a
        for i, ai in enumerate(a):
            if ai:
                for j in range(min(len(b), n_terms - i)):
                    out[i + j] += ai * b[j]
        return out
    guard = max(len(a), len(b)).bit_length() + 2
    bits = _max_bits(a) + _max_bits(b) + guard
    bits = 8 * ((bits + 7) // 8)
    prod = _pack(a, bits) * _pack(b, bits)
    out = _unpack(prod, bits, n_terms)
    return out


# --------------------------------------------------------------------------
# QSeries


@dataclass(frozen=True)
class QSeries:
    """Truncated power series sum_{n<=N} c_n q^n with exact rational c_n.

    Coefficients are held as integer numerators over one positive common
    denominator; ``coeffs`` exposes them as ``Fraction`` objects.
    """

    nums: tuple[int, ...]
    den: int = 1
    weight: int = 0
    _normalized: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.nums) < 2:
            raise TruncationError("truncation must be >= 1")
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        if not self._normalized:
            g = self.den
            for c in self.nums:
                if g == 1:
                    break
                g = math.gcd(g, c)
            if g > 1:
                object.__setattr__(self, "nums", tuple(c // g for c in self.nums))
                object.__setattr__(self, "den", self.den // g)
            object.__setattr__(self, "_normalized", True)

    @classmethod
    def from_coeffs(cls, coeffs: Iterable, weight: int = 0) -> "QSeries":
        fr = [Fraction(c) for c in coeffs]
        den = 1
        for c in fr:
            den = den * c.denominator // math.gcd(den, c.denominator)
        return cls(tuple(int(c * den) for c in fr), den, weight)

    @property
    def truncation(self) -> int:
        return len(self.nums) - 1

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.den) for c in self.nums)

    def __getitem__(self, n: int) -> Fraction:
        if n < 0 or n > self.truncation:
            raise TruncationError(f"coefficient {n} beyond truncation {self.truncation}")
        return Fraction(self.nums[n], self.den)

    def __len__(self) -> int:
        return len(self.nums)

    def truncate(self, N: int) -> "QSeries":
        if N > self.truncation:
            raise TruncationError(f"cannot extend truncation {self.truncation} to {N}")
        return QSeries(self.nums[:N + 1], self.den, self.weight)

    def _combine_weight(self, other: "QSeries", op: str) -> int:
        if op == "mul":
            return self.weight + other.weight if self.weight and other.weight else 0
        return self.weight if self.weight == other.weight else 0

    def __add__(self, other):
        if not isinstance(other, QSeries):
            return self + QSeries.constant(other, self.truncation)
        N = min(self.truncation, other.truncation)
        den = self.den * other.den // math.gcd(self.den, other.den)
        sa, sb = den // self.den, den // other.den
        nums = tuple(a * sa + b * sb for a, b in zip(self.nums[:N + 1], other.nums[:N + 1]))
        return QSeries(nums, den, self._combine_weight(other, "add"))

    __radd__ = __add__

    def __neg__(self):
        return QSeries(tuple(-c for c in self.nums), self.den, self.weight, True)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QSeries):
            N = min(self.truncation, other.truncation)
            nums = int_convolve(self.nums, other.nums, N + 1)
            return QSeries(tuple(nums), self.den * other.den,
                           self._combine_weight(other, "mul"))
        c = Fraction(other)
        return QSeries(tuple(x * c.numerator for x in self.nums),
                       self.den * c.denominator, self.weight)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        c = Fraction(scalar)
        if c == 0:
            raise ZeroDivisionError("division of a series by zero")
        sign = 1 if c > 0 else -1
        return QSeries(tuple(sign * x * c.denominator for x in self.nums),
                       self.den * abs(c.numerator), self.weight)

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not supported")
        result = QSeries.constant(1, self.truncation)
        base = self
        n = e
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result.with_weight(self.weight * e)

    def with_weight(self, weight: int) -> "QSeries":
        return QSeries(self.nums, self.den, weight, True)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return self.nums == other.nums and self.den == other.den

    def __hash__(self):
        return hash((self.nums, self.den))

    @classmethod
    def constant(cls, c, N: int) -> "QSeries":
        c = Fraction(c)
        return cls((c.numerator,) + (0,) * N, c.denominator)

    def is_cuspidal(self) -> bool:
        return self.nums[0] == 0

    def valuation(self) -> int:
        for i, c in enumerate(self.nums):
            if c:
                return i
        return self.truncation + 1

    # serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "truncation": self.truncation,
            "coeffs": [[str(c.numerator), str(c.denominator)] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "QSeries":
        coeffs = [Fraction(int(n), int(d)) for n, d in doc["coeffs"]]
        if len(coeffs) != int(doc["truncation"]) + 1:
            raise ValueError("coefficient count does not match truncation")
        return cls.from_coeffs(coeffs, int(doc["weight"]))

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self.coeffs[:6])
        return f"QSeries(weight={self.weight}, N={self.truncation}, [{head}, ...])"


# --------------------------------------------------------------------------
# Classical forms


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2 convention irrelevant: n even here)."""
    return _bernoulli_table(n)[n]


@lru_cache(maxsize=8)
def _bernoulli_table(n: int) -> tuple[Fraction, ...]:
    B = [Fraction(0)] * (n + 1)
    B[0] = Fraction(1)
    for m in range(1, n + 1):
        B[m] = -sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1)
    return tuple(B)


def divisor_power_sums(r: int, N: int) -> list[int]:
    """sigma_r(n) for 0 <= n <= N (entry 0 is 0)."""
    sig = [0] * (N + 1)
    for d in range(1, N + 1):
        p = d ** r
        for m in range(d, N + 1, d):
            sig[m] += p
    return sig


def eisenstein_series(k: int, N: int) -> QSeries:
    """E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n, for k in {4, 6}."""
    if k not in (4, 6):
        raise ValueError(f"unsupported Eisenstein weight {k}; expected 4 or 6")
    if N < 0:
        raise TruncationError("N must be >= 0")
    const = -Fraction(2 * k) / bernoulli(k)
    assert const.denominator == 1
    c = const.numerator
    sig = divisor_power_sums(k - 1, max(N, 1))
    nums = [1] + [c * s for s in sig[1:]]
    return QSeries(tuple(nums[:max(N, 1) + 1]), 1, k)


def _euler_product(N: int) -> list[int]:
    """Coefficients of prod_{n>=1}(1 - q^n) up to q^N (pentagonal numbers)."""
    out = [0] * (N + 1)
    out[0] = 1
    j = 1
    while True:
        sign = -1 if j % 2 else 1
        g1 = j * (3 * j - 1) // 2
        g2 = j * (3 * j + 1) // 2
        if g1 > N:
            break
        out[g1] += sign
        if g2 <= N:
            out[g2] += sign
        j += 1
    return out


def delta_series(N: int, verify: bool = True) -> QSeries:
    """Delta = q prod (1-q^n)^24, truncated at q^N.

    With ``verify`` the first coefficients are cross-checked against
    (E4^3 - E6^2)/1728; a mismatch is a hard error.
    """
    if N < 1:
        raise TruncationError("N must be >= 1")
    P = _euler_product(N)
    P2 = int_convolve(P, P, N)
    P4 = int_convolve(P2, P2, N)
    P8 = int_convolve(P4, P4, N)
    P16 = int_convolve(P8, P8, N)
    P24 = int_convolve(P16, P8, N)
    delta = QSeries(tuple([0] + P24[:N]), 1, 12)
    if verify:
        M = min(N, 60)
        other = delta_from_eisenstein(M)
        if other.nums != delta.nums[:M + 1]:
            raise ArithmeticError("eta-product and Eisenstein constructions of Delta disagree")
    return delta


def delta_from_eisenstein(N: int) -> QSeries:
    E4 = eisenstein_series(4, N)
    E6 = eisenstein_series(6, N)
    return ((E4 * E4 * E4 - E6 * E6) / 1728).with_weight(12)


def cusp_dimension(k: int) -> int:
    """dim S_k for level 1."""
    if k % 2 or k < 0:
        return 0
    if k < 12:
        return 0
    return k // 12 - (1 if k % 12 == 2 else 0)


def _monomial_exponents(k: int) -> list[tuple[int, int, int]]:
    out = []
    for j in range(1, k // 12 + 1):
        rest = k - 12 * j
        for b in range(rest // 6 + 1):
            if (rest - 6 * b) % 4 == 0:
                out.append((j, (rest - 6 * b) // 4, b))
    return out


class _Powers:
    """Cache of E4^a, E6^b, Delta^j at one truncation."""

    def __init__(self, N: int):
        self.N = N
        self.base = {"E4": eisenstein_series(4, N), "E6": eisenstein_series(6, N),
                     "D": delta_series(N)}
        self.cache: dict[tuple[str, int], QSeries] = {}

    def get(self, name: str, e: int) -> QSeries:
        if e == 0:
            return QSeries.constant(1, self.N)
        key = (name, e)
        if key not in self.cache:
            if e == 1:
                self.cache[key] = self.base[name]
            else:
                h = e // 2
                s = self.get(name, h) * self.get(name, e - h)
                self.cache[key] = s
        return self.cache[key]


@dataclass(frozen=True)
class MillerBasis:
    weight: int
    elements: tuple[QSeries, ...]

    @property
    def dim(self) -> int:
        return len(self.elements)

    @property
    def truncation(self) -> int:
        return self.elements[0].truncation

    def to_json(self) -> dict:
        return {"weight": self.weight, "truncation": self.truncation,
                "elements": [e.to_json() for e in self.elements]}

    @classmethod
    def from_json(cls, doc: dict) -> "MillerBasis":
        return cls(int(doc["weight"]), tuple(QSeries.from_json(e) for e in doc["elements"]))


def _rank(rows: list[list[Fraction]]) -> int:
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pv = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / pv
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def default_truncation(k: int, p_max: int = 2) -> int:
    d = max(cusp_dimension(k), 1)
    return max(2 * d * p_max, 4 * k)


def miller_basis(k: int, N: int | None = None) -> MillerBasis:
    """Echelonized basis f_1..f_d of S_k with a(f_i, j) = delta_ij for 1 <= i,j <= d."""
    d = cusp_dimension(k)
    if d == 0:
        raise EmptySpaceError(f"S_{k} = {{0}} at level 1")
    if N is None:
        N = default_truncation(k)
    if N < d:
        raise TruncationError(f"truncation {N} < dim S_{k} = {d}")
    return _miller_basis_cached(k, N)


@lru_cache(maxsize=32)
def _miller_basis_cached(k: int, N: int) -> MillerBasis:
    d = cusp_dimension(k)
    powers = _Powers(N)
    exps = _monomial_exponents(k)
    monos = {}
    for (j, a, b) in exps:
        monos[(j, a, b)] = powers.get("D", j) * powers.get("E4", a) * powers.get("E6", b)
    # dimension formula vs rank of the monomial span
    cols = min(N, d + 24)
    rank = _rank([[Fraction(c) for c in m.nums[:cols + 1]] for m in monos.values()])
    if rank != d:
        raise ArithmeticError(f"monomial span has rank {rank}, dimension formula gives {d}")
    # one monomial per Delta-power: leading block is unitriangular
    chosen = []
    for j in range(1, d + 1):
        key = min(e for e in exps if e[0] == j)
        chosen.append(monos[key].nums)
    # back-substitution from the last row makes the leading block the identity
    rows = [list(r) for r in chosen]
    for i in range(d - 1, -1, -1):
        assert rows[i][i + 1] == 1 and all(rows[i][c] == 0 for c in range(1, i + 1))
        for r in range(i):
            f = rows[r][i + 1]
            if f:
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[i])]
    elements = tuple(QSeries(tuple(r), 1, k) for r in rows)
    for i, e in enumerate(elements):
        for j in range(1, d + 1):
            if e.nums[j] != (1 if i + 1 == j else 0):
                raise ArithmeticError("echelon property violated")
    return MillerBasis(k, elements)


def _divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def hecke_image(f: QSeries, n: int, k: int, count: int) -> list[Fraction]:
    """Coefficients a(T_n f, m) for 1 <= m <= count."""
    if count * n > f.truncation:
        raise TruncationError(f"T_{n} needs truncation >= {count * n}, have {f.truncation}")
    out = []
    for m in range(1, count + 1):
        g = math.gcd(m, n)
        s = 0
        for e in _divisors(g):
            s += e ** (k - 1) * f.nums[m * n // (e * e)]
        out.append(Fraction(s, f.den))
    return out


def hecke_operator_matrix(basis: MillerBasis, n: int) -> list[list[Fraction]]:
    """Matrix of T_n in the Miller basis; column i holds the coordinates of T_n f_i."""
    d = basis.dim
    if basis.truncation < d * n:
        raise TruncationError(f"T_{n} needs truncation >= {d * n}, have {basis.truncation}")
    cols = [hecke_image(f, n, basis.weight, d) for f in basis.elements]
    return [[cols[i][j] for i in range(d)] for j in range(d)]


def matmul(A, B):
    return [[sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0]))]
            for i in range(len(A))]


def dumps(obj) -> str:
    return json.dumps(obj.to_json())
