"""Local densities rho(q, a), the singular weight T(r) and the divisor sum h(l).

rho(q, a) counts (l1, l2, l3) in {1..q}^3 with l1^3 + l2^3 + l3^3 = a (mod q).
Tables are indexed a = 1..q (position a - 1), so the last entry is the zero class,
matching ``cube_reps.progression_sums``.
"""
from __future__ import annotations

import cmath
import math
from math import gcd
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import divisors, factorize, primes_up_to
from .convolution import cyclic_convolve
from .cube_reps import CapacityError
from .exp_sums import cube_histogram, s_direct_all, s_reduce, sixth_moment_prime

# rho(q, a) <= q^3 must fit in int64
DEFAULT_RHO_CAPACITY = 2**20


class IdentityError(AssertionError):
    """A numerical identity failed to hold at the stated tolerance."""


@dataclass(frozen=True, eq=False)
class LocalDensityTable:
    q: int
    rho: np.ndarray  # rho[a - 1] = rho(q, a), a = 1..q

    def __getitem__(self, a: int) -> int:
        return int(self.rho[(a - 1) % self.q])

    def by_residue(self) -> np.ndarray:
        """rho indexed by residue 0..q-1."""
        return np.roll(self.rho, 1)


def _convolution_rho(q: int) -> np.ndarray:
    h = cube_histogram(q)
    return cyclic_convolve(cyclic_convolve(h, h), h)


@lru_cache(maxsize=8192)
def _prime_power_rho(pa: int) -> np.ndarray:
    out = _convolution_rho(pa)
    out.setflags(write=False)
    return out


def rho_by_residue(q: int, method: str = "crt", capacity: int = DEFAULT_RHO_CAPACITY) -> np.ndarray:
    """rho(q, r) for residues r = 0..q-1.

    ``method="crt"`` convolves cube histograms only for the prime powers of q
    and combines them through rho(q1 q2, a) = rho(q1, a) rho(q2, a) for coprime
    moduli; ``method="convolution"`` convolves the full histogram mod q.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if q > capacity:
        raise CapacityError(f"q={q} exceeds rho capacity {capacity}")
    if method == "convolution":
        return _convolution_rho(q)
    if method != "crt":
        raise ValueError(f"unknown method {method!r}")
    if q == 1:
        return np.ones(1, dtype=np.int64)
    scale = 1
    tables = []
    for p, e in factorize(q):
        if e == 1 and p != 3 and p % 3 != 1:
            # cubing permutes Z/p, so every class has p^2 solutions
            scale *= p * p
        else:
            tables.append(p**e)
    if tables == [q]:
        return _prime_power_rho(q).copy()
    out = np.full(q, scale, dtype=np.int64)
    if tables:
        r = np.arange(q, dtype=np.int64)
        for pa in tables:
            out *= _prime_power_rho(pa)[r % pa]
    return out


def rho_table(q: int, method: str = "crt", capacity: int = DEFAULT_RHO_CAPACITY) -> LocalDensityTable:
    return LocalDensityTable(q, np.roll(rho_by_residue(q, method, capacity), -1))


@lru_cache(maxsize=256)
def _s_vector(q: int) -> tuple[complex, ...]:
    return tuple(s_reduce(q, b) for b in range(1, q + 1))


def rho_via_dft(q: int, a: int) -> float:
    """(1/q) sum_{b=1}^{q} e(-ba/q) S(q, b)^3 with S from the prime-power route."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    terms = []
    for b, s in enumerate(_s_vector(q), start=1):
        terms.append(cmath.exp(-2j * math.pi * ((b * a) % q) / q) * s**3)
    total = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    return total.real / q


def rho_second_moment(q: int, rtol: float = 1e-6) -> tuple[int, float]:
    """Both sides of sum_a rho(q,a)^2 = q^5 sum_{r|q} r T(r); raises if they disagree."""
    rho = rho_by_residue(q)
    left = sum(int(v) ** 2 for v in rho)
    right = q**5 * h_function(q)
    if abs(left - right) > rtol * abs(left):
        raise IdentityError(f"second moment q={q}: {left} vs {right}")
    return left, right


@lru_cache(maxsize=None)
def nine_sixth_sum() -> int:
    # sum over units c mod 9 of |S(9,c)|^6 = 9 sum_a rho(9,a)^2 - 9^6, since
    # S(9, 0) = 9 and S(9, 3) = S(9, 6) = 3 S(3, 1) = 0
    return 9 * sum(int(v) ** 2 for v in _prime_power_rho(9)) - 9**6


@lru_cache(maxsize=None)
def t_prime_power(p: int, k: int) -> float:
    """T(p^k) from the prime-power evaluation of S."""
    if k == 0:
        return 1.0
    u, v = divmod(k - 1, 3)
    if v == 2 or (v == 1 and p != 3):
        return (p - 1) / p ** (6 * u + 7)
    if v == 1:
        return nine_sixth_sum() / 3 ** (6 * u + 14)
    return sixth_moment_prime(p) / p ** (6 * u + 7)


def t_function(r: int) -> float:
    """T(r) = r^-7 sum_{(c,r)=1} |S(r,c)|^6, assembled multiplicatively."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    value = 1.0
    for p, k in factorize(r):
        value *= t_prime_power(p, k)
    return value


def t_direct(r: int) -> float:
    """T(r) straight from the definition (O(r log r)); an oracle for small r."""
    s = s_direct_all(r)
    units = [c for c in range(1, r + 1) if gcd(c, r) == 1]
    return math.fsum(abs(s[c % r]) ** 6 for c in units) / r**7


def h_function(l: int) -> float:
    """h(l) = sum_{q | l} q T(q)."""
    return math.fsum(q * t_function(q) for q in divisors(l))


@dataclass(eq=False)
class TMemo:
    """T(r) and h(l) for 1 <= r, l <= bound, built by a sieve over prime powers."""

    bound: int
    t: np.ndarray
    h: np.ndarray

    @classmethod
    def build(cls, bound: int) -> "TMemo":
        if bound < 1:
            raise ValueError("bound must be >= 1")
        t = np.ones(bound + 1, dtype=np.float64)
        t[0] = 0.0
        for p in primes_up_to(bound):
            p = int(p)
            pk, k = p, 1
            while pk <= bound:
                j = np.arange(1, bound // pk + 1)
                idx = pk * j[j % p != 0]
                t[idx] *= t_prime_power(p, k)
                pk *= p
                k += 1
        h = np.zeros(bound + 1, dtype=np.float64)
        weights = np.arange(bound + 1) * t
        for q in np.flatnonzero(weights):
            h[q::q] += weights[q]
        return cls(bound, t, h)

    def check(self, n: int) -> None:
        if n > self.bound:
            raise CapacityError(f"T memo covers r <= {self.bound}, asked for {n}")


_MEMOS: dict[int, TMemo] = {}


def t_memo(bound: int) -> TMemo:
    """Shared memo covering at least ``bound`` (reuses a larger one if built)."""
    for b, memo in _MEMOS.items():
        if b >= bound:
            return memo
    memo = TMemo.build(bound)
    _MEMOS[bound] = memo
    return memo
