"""Small arithmetic helpers: sieves, factorization, divisor functions."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def _sieve(n: int) -> np.ndarray:
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, int(n ** 0.5) + 1):
        if is_p[p]:
            is_p[p * p::p] = False
    is_p.setflags(write=False)
    return is_p


def primes_up_to(n: int) -> np.ndarray:
    """All primes p <= n (sieve of Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(_sieve(int(n))).astype(np.int64)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@lru_cache(maxsize=8)
def smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in primes_up_to(int(n ** 0.5) + 1)[::-1]:
        spf[p * p::p] = p
    ps = primes_up_to(n)
    spf[ps] = ps
    spf[spf == 0] = np.arange(n + 1)[spf == 0]
    spf.setflags(write=False)
    return spf


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n as [(p, e), ...] in increasing p."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def divisor_count(n: int) -> int:
    c = 1
    for _, e in factorize(n):
        c *= e + 1
    return c


def divisor_count_table(n: int) -> np.ndarray:
    """tau(m) for 0 <= m <= n (entry 0 is 0)."""
    t = np.zeros(n + 1, dtype=np.int64)
    for d in range(1, n + 1):
        t[d::d] += 1
    return t
