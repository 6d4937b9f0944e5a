"""Complete cubic exponential sums S(q, a) = sum_{m=1}^{q} e(a m^3 / q).

Several independent evaluation routes are provided so they can check each other:
direct summation, a DFT of the cube-residue histogram, and the multiplicative
assembly from prime-power closed forms.
"""
from __future__ import annotations

import math
from functools import lru_cache
from math import gcd
from typing import NamedTuple

import numpy as np

from .arith import factorize, is_prime
from .convolution import DIRECT_THRESHOLD, cyclic_convolve_direct, cyclic_convolve_fft

TAU = 2.0 * math.pi
# beyond this prime, sixth moments default to the O(p) period route
FFT_SIXTH_MOMENT_LIMIT = 4096


class CubePartFactorization(NamedTuple):
    """r = r1 * r2**2 * r3**3 with r1, r2 squarefree and coprime."""

    r1: int
    r2: int
    r3: int


def cube_residues(q: int) -> np.ndarray:
    """m^3 mod q for m = 0..q-1 (m = 0 stands for m = q), exact int64."""
    m = np.arange(q, dtype=np.int64)
    return (m * m % q) * m % q


def cube_histogram(q: int) -> np.ndarray:
    """h[r] = #{1 <= m <= q : m^3 = r (mod q)}."""
    return np.bincount(cube_residues(q), minlength=q).astype(np.int64)


def s_direct(q: int, a: int) -> complex:
    """S(q, a) by direct summation over m, phases reduced mod q before the trig call."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    phase = (a % q) * cube_residues(q) % q
    theta = TAU * phase / q
    return complex(math.fsum(np.cos(theta)), math.fsum(np.sin(theta)))


def s_direct_all(q: int) -> np.ndarray:
    """Vector of S(q, a) for a = 0..q-1, as the DFT of the cube-residue histogram."""
    return np.fft.ifft(cube_histogram(q).astype(np.float64)) * q


def cube_part_factorization(r: int) -> CubePartFactorization:
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    r1 = r2 = r3 = 1
    for p, e in factorize(r):
        u, v = divmod(e, 3)
        r3 *= p**u
        if v == 1:
            r1 *= p
        elif v == 2:
            r2 *= p
    return CubePartFactorization(r1, r2, r3)


@lru_cache(maxsize=None)
def _prime_sum(p: int, character: int) -> complex:
    # S(p, c) depends on c only through the cubic-residue class of c
    return s_direct(p, _class_representative(p, character))


@lru_cache(maxsize=None)
def _class_representatives(p: int) -> dict[int, int]:
    reps: dict[int, int] = {}
    k = (p - 1) // 3
    for c in range(1, p):
        reps.setdefault(pow(c, k, p), c)
        if len(reps) == 3:
            break
    return reps


def _class_representative(p: int, character: int) -> int:
    return _class_representatives(p)[character]


def _s_prime(p: int, a: int) -> complex:
    """S(p, a) for a prime p not dividing a."""
    if p == 3 or p % 3 != 1:
        # cubing permutes the units, or p = 3: the sum vanishes
        return 0j
    return _prime_sum(p, pow(a % p, (p - 1) // 3, p))


@lru_cache(maxsize=None)
def _s_nine(a: int) -> complex:
    return s_direct(9, a)


def s_prime_power(p: int, alpha: int, a: int) -> complex:
    """S(p^alpha, a) for (a, p) = 1 via the prime-power reduction rules."""
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if a % p == 0:
        raise ValueError(f"a={a} is not coprime to p={p}")
    u, v = divmod(alpha - 1, 3)
    if v == 2:  # alpha = 3u + 3
        return complex(p ** (2 * u + 2))
    if v == 1:  # alpha = 3u + 2
        if p == 3:
            return 3 ** (2 * u) * _s_nine(a % 9)
        return complex(p ** (2 * u + 1))
    return p ** (2 * u) * _s_prime(p, a)


def s_fast(q: int, a: int) -> complex:
    """S(q, a) for (a, q) = 1 as a product over the prime powers of q.

    For coprime q1, q2 one has S(q1 q2, a) = S(q1, a q2^2) S(q2, a q1^2), so the
    factor for p^alpha || q uses the multiplier a (q / p^alpha)^2.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if gcd(a, q) != 1:
        raise ValueError(f"gcd(a={a}, q={q}) != 1")
    value = 1 + 0j
    for p, alpha in factorize(q):
        pa = p**alpha
        comp = q // pa
        value *= s_prime_power(p, alpha, a * comp * comp % pa)
        if value == 0:
            break
    return value


def s_reduce(q: int, b: int) -> complex:
    """S(q, b) for any b, using S(q, b) = (q / r) S(r, c) with c / r = b / q reduced."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    g = gcd(q, b % q) or q
    r = q // g
    return g * s_fast(r, (b % q) // g)


def nu(q: int, a: int) -> complex:
    return s_fast(q, a) ** 3 / q**3


def _rho_prime(p: int, method: str) -> np.ndarray:
    conv = {"direct": cyclic_convolve_direct, "fft": cyclic_convolve_fft}[method]
    h = cube_histogram(p)
    return conv(conv(h, h), h)


def _sixth_moment_periods(p: int) -> int:
    # For p = 1 (mod 3) the sums S(p, c), c != 0, take three real values with
    # sum 0 and sum of squares 6p, so sum S^6 = 54 p^3 + 3 e3^2 where
    # e3 = S0 (S0^2 - 3p) is an integer; each value occurs (p - 1)/3 times.
    m = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
    # m and p - m have opposite cubes, so S(p, 1) is 1 + 2 sum cos over half
    s0 = 1.0 + 2.0 * float(np.sum(np.cos(TAU * ((m * m % p) * m % p) / p)))
    e3_raw = s0 * (s0 * s0 - 3 * p)
    e3 = round(e3_raw)
    if abs(e3_raw - e3) >= 0.25 or e3 % p:
        raise ArithmeticError(f"period product for p={p} not integral: {e3_raw}")
    return (p - 1) * (18 * p**3 + e3 * e3)


@lru_cache(maxsize=None)
def sixth_moment_prime(p: int, method: str = "auto") -> int:
    """sum_{c=1}^{p-1} |S(p, c)|^6 as an exact integer.

    ``direct``/``fft``: rho(p, .) as the triple cyclic self-convolution of the
    cube histogram, then the second-moment identity
    sum |S|^6 = p sum_a rho(p, a)^2 - p^6.
    ``periods``: O(p) route through the three values of S(p, c).
    ``auto``: direct below 512, fft up to 4096, periods above.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if method == "auto":
        if p < DIRECT_THRESHOLD:
            method = "direct"
        else:
            method = "fft" if p <= FFT_SIXTH_MOMENT_LIMIT else "periods"
    if method == "periods":
        return _sixth_moment_periods(p) if p % 3 == 1 else 0
    if method not in ("direct", "fft"):
        raise ValueError(f"unknown method {method!r}")
    rho = _rho_prime(p, method)
    values, mult = np.unique(rho, return_counts=True)
    second = sum(int(v) ** 2 * int(k) for v, k in zip(values, mult))
    return p * second - p**6
