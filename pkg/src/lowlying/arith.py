"""Integer arithmetic: sieving, Kronecker symbols, small multiplicative functions,
fundamental discriminants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


def sieve(limit: int) -> np.ndarray:
    """Primes <= limit as an int64 array (odd-only Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    # index i stands for 2*i + 1
    size = (limit - 1) // 2 + 1
    is_p = np.ones(size, dtype=bool)
    is_p[0] = False
    r = math.isqrt(limit)
    for i in range(1, (r - 1) // 2 + 1):
        if is_p[i]:
            p = 2 * i + 1
            is_p[p * p // 2::p] = False
    odd = 2 * np.flatnonzero(is_p) + 1
    return np.concatenate(([2], odd)).astype(np.int64)


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: tuple[int, ...] = field(repr=False)

    @classmethod
    def up_to(cls, limit: int) -> "PrimeTable":
        return cls(limit, tuple(int(p) for p in sieve(limit)))

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def array(self) -> np.ndarray:
        return np.asarray(self.primes, dtype=np.int64)


@lru_cache(maxsize=8)
def prime_table(limit: int) -> PrimeTable:
    return PrimeTable.up_to(limit)


def _small_primes_for(n: int) -> tuple[int, ...]:
    # table grows in powers of two so the cache stays small
    r = max(1000, math.isqrt(abs(n)) + 1)
    lim = 1 << (r - 1).bit_length()
    return prime_table(lim).primes


def factorize(n: int) -> dict[int, int]:
    """Trial division against a sieved table. n != 0; sign ignored."""
    if n == 0:
        raise ValueError("cannot factor 0")
    n = abs(n)
    out: dict[int, int] = {}
    for p in _small_primes_for(n):
        if p * p > n:
            break
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out[p] = k
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def moebius(n: int) -> int:
    if n < 1:
        raise ValueError("moebius needs n >= 1")
    fac = factorize(n) if n > 1 else {}
    if any(k > 1 for k in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def omega(n: int) -> int:
    if n < 1:
        raise ValueError("omega needs n >= 1")
    return len(factorize(n)) if n > 1 else 0


def tau(n: int) -> int:
    if n < 1:
        raise ValueError("tau needs n >= 1")
    out = 1
    for k in (factorize(n).values() if n > 1 else ()):
        out *= k + 1
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, k in (factorize(n).items() if abs(n) > 1 else ()):
        divs = [d * p**j for d in divs for j in range(k + 1)]
    return sorted(divs)


def is_squarefree(n: int) -> bool:
    return n != 0 and all(k == 1 for k in factorize(n).values())


def is_fundamental(d: int) -> bool:
    """True for fundamental discriminants; d = 1 (trivial character) included."""
    if d == 0:
        raise ValueError("d = 0 is not a discriminant")
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi needs odd positive n")
    a %= n
    s = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                s = -s
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            s = -s
        a %= n
    return s if n == 1 else 0


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n)."""
    if n == 0:
        return 1 if d in (1, -1) else 0
    s = 1
    if n < 0:
        n = -n
        if d < 0:
            s = -s
    v = (n & -n).bit_length() - 1
    if v:
        if d % 2 == 0:
            return 0
        if v % 2 and d % 8 in (3, 5):
            s = -s
        n >>= v
    if n == 1:
        return s
    return s * jacobi(d, n)


def character_table(d: int) -> np.ndarray:
    """Values kronecker(d, a) for a = 0 .. |d|-1 (one full period for fundamental d)."""
    q = abs(d)
    return np.array([kronecker(d, a) for a in range(q)], dtype=np.int64)


@dataclass(frozen=True)
class Discriminant:
    d: int
    is_fundamental: bool
    omega: int
    tau: int
    prime_divisors: tuple[int, ...]

    @classmethod
    def of(cls, d: int) -> "Discriminant":
        fac = factorize(d) if abs(d) > 1 else {}
        t = 1
        for k in fac.values():
            t *= k + 1
        return cls(d, is_fundamental(d), len(fac), t, tuple(sorted(fac)))

    @classmethod
    def imaginary(cls, D: int) -> "Discriminant":
        """Metadata for D where -D < 0 is the fundamental discriminant of interest.

        Prime data refer to D; the is_fundamental flag refers to -D.
        """
        if D <= 0:
            raise ValueError("D must be positive")
        base = cls.of(D)
        return cls(D, is_fundamental(-D), base.omega, base.tau, base.prime_divisors)


def lambda_split(p: int, D: int) -> int:
    """1 + chi_{-D}(p): 2 split, 1 ramified, 0 inert."""
    return 1 + kronecker(-D, p)
