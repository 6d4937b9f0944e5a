"""zeta(s), the Euler product D0(s) and the named constants of the variance asymptotics.

Every truncated quantity carries an error estimate:

* Euler products over p <= P: the neglected factors are bounded with
  |S(p, c)| <= 2 sqrt(p), and the prime sums sum_{p>P} p^-a are estimated by
  the integral int_P^inf t^-a / log t dt = E1((a - 1) log P).
* Series sum_{q<=N} T(q) q^-s: Rankin's trick, sum_{q>N} T(q) q^-s is at most
  N^-t sum_q T(q) q^{t-s} = N^-t zeta(3(s-t)+6) D0(s-t), minimized over t.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import exp1

from .arith import primes_up_to
from .exp_sums import sixth_moment_prime
from .local_densities import nine_sixth_sum, t_memo

GAMMA_43 = 0.892979511569249211218564313658  # Gamma(4/3)
GAMMA_53 = 0.902745292950933611296858685436  # Gamma(5/3)
EULER_GAMMA = 0.577215664901532860606512090082
GAMMA6 = GAMMA_43**6

DEFAULT_PRIME_CUTOFF = 10**4
DEFAULT_SERIES_CUTOFF = 10**5

# Bernoulli numbers B_2 .. B_20 for the Euler-Maclaurin tail
_BERNOULLI = [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510, 43867 / 798, -174611 / 330]
_EM_TERMS = 12


class TruncationWarning(UserWarning):
    """A reported tail bound exceeds 1e-4 of the value it qualifies."""


class DomainError(ValueError):
    pass


def _zeta_em(s: float) -> float:
    n = _EM_TERMS
    head = math.fsum(k ** (-s) for k in range(1, n))
    tail = n ** (1 - s) / (s - 1) + 0.5 * n ** (-s)
    rising = s  # s (s+1) ... (s + 2j - 2)
    fact = 2.0  # (2j)!
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += b / fact * rising * n ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    return head + tail


def zeta(s: float) -> float:
    """Riemann zeta at real s != 1.

    Euler-Maclaurin summation for s >= -1/2, the functional equation
    zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1 - s) zeta(1 - s) below that.
    """
    if s == 1:
        raise DomainError("zeta has a pole at s = 1")
    if s >= -0.5:
        return _zeta_em(s)
    return 2**s * math.pi ** (s - 1) * math.sin(math.pi * s / 2) * math.gamma(1 - s) * _zeta_em(1 - s)


def euler_factor(p: int, s: float) -> float:
    """Local factor of D0(s) at p, without the 1/(1 - p^-(3s+6)) prefactor."""
    if s <= -2:
        raise DomainError("Euler factors need s > -2")
    if p == 3:
        return 1 + nine_sixth_sum() / 3 ** (2 * s + 14) - 3 ** (-(3 * s + 7))
    return 1 + sixth_moment_prime(p) / p ** (s + 7) + (p - 1) / p ** (2 * s + 7) - p ** (-(3 * s + 7))


def _prime_tail_sum(a: float, cutoff: int) -> float:
    """Integral estimate of sum_{p > cutoff} p^-a, a > 1."""
    return float(exp1((a - 1) * math.log(cutoff)))


def _log_tail_exponent(s: float, cutoff: int) -> float:
    # log of the largest possible product of the omitted Euler factors
    return (
        64 * _prime_tail_sum(s + 3, cutoff)
        + _prime_tail_sum(2 * s + 6, cutoff)
        + _prime_tail_sum(3 * s + 7, cutoff)
    )


@dataclass(frozen=True)
class EulerProductValue:
    s: float
    value: float
    prime_cutoff: int
    tail_bound: float


@lru_cache(maxsize=None)
def _primes(cutoff: int) -> tuple[int, ...]:
    return tuple(int(p) for p in primes_up_to(cutoff))


@lru_cache(maxsize=4096)
def d0(s: float, prime_cutoff: int = DEFAULT_PRIME_CUTOFF) -> EulerProductValue:
    """Truncated Euler product D0(s) over p <= prime_cutoff.

    Factors are combined as a compensated sum of log1p terms in increasing p,
    so the result does not depend on evaluation order elsewhere.
    """
    if s <= -2:
        raise DomainError(f"D0 diverges for s <= -2 (s={s})")
    if prime_cutoff < 2:
        raise ValueError("prime_cutoff must be >= 2")
    logs = [math.log1p(euler_factor(p, s) - 1) for p in _primes(prime_cutoff)]
    value = math.exp(math.fsum(logs))
    tail = abs(value) * math.expm1(_log_tail_exponent(s, max(prime_cutoff, 2)))
    return EulerProductValue(s, value, prime_cutoff, tail)


def _d0_upper(s: float, prime_cutoff: int) -> float:
    v = d0(s, prime_cutoff)
    return v.value + v.tail_bound


def series_tail_bound(s: float, n: int, prime_cutoff: int = DEFAULT_PRIME_CUTOFF, log_weight: bool = False) -> float:
    """Upper estimate for sum_{q > n} T(q) q^-s (times log q if ``log_weight``)."""
    if s <= -5 / 3:
        raise DomainError("the T series diverges for s <= -5/3")
    shift = 1.0 / math.log(n) if log_weight else 0.0
    factor = math.log(n) / math.e if log_weight else 1.0
    room = s + 5 / 3 - shift
    best = math.inf
    for t in np.linspace(0.02, 0.98, 49) * room:
        sigma = s - shift - t
        bound = n ** (-t) * zeta(3 * sigma + 6) * _d0_upper(sigma, prime_cutoff)
        best = min(best, factor * bound)
    return float(best)


@dataclass(frozen=True)
class DirichletCheck:
    s: float
    q_max: int
    prime_cutoff: int
    partial_sum: float
    product: float
    difference: float
    series_tail: float
    product_error: float

    @property
    def tolerance(self) -> float:
        return self.series_tail + self.product_error

    @property
    def ok(self) -> bool:
        return abs(self.difference) <= self.tolerance


def check_dirichlet_identity(s: float, q_max: int = DEFAULT_SERIES_CUTOFF, prime_cutoff: int = DEFAULT_PRIME_CUTOFF) -> DirichletCheck:
    """Compare sum_{q <= q_max} T(q)/q^s with zeta(3s+6) D0(s)."""
    if 3 * s + 6 <= 1:
        raise DomainError(f"need 3s + 6 > 1, got s={s}")
    memo = t_memo(q_max)
    q = np.arange(1, q_max + 1, dtype=np.float64)
    partial = math.fsum(memo.t[1 : q_max + 1] * q ** (-s))
    z = zeta(3 * s + 6)
    dv = d0(s, prime_cutoff)
    product = z * dv.value
    return DirichletCheck(
        s=s,
        q_max=q_max,
        prime_cutoff=prime_cutoff,
        partial_sum=partial,
        product=product,
        difference=partial - product,
        series_tail=series_tail_bound(s, q_max, prime_cutoff),
        product_error=abs(z) * dv.tail_bound,
    )


def c2_integral(n_intervals: int) -> tuple[float, float]:
    """(int_1^{n_intervals+1} B2(u)/u^3 du, bound on the omitted tail).

    On [n, n+1], B2(u) = u^2/2 - (n + 1/2) u + (n^2 + n)/2 + 1/12, so each piece
    integrates in closed form; all pieces are combined by one compensated sum.
    """
    if n_intervals < 1:
        return 0.0, 1 / 24
    n = np.arange(1, n_intervals + 1, dtype=np.float64)
    k = (n * n + n) / 2 + 1 / 12
    logs = 0.5 * np.log1p(1 / n)
    linear = -(n + 0.5) / (n * (n + 1))
    quad = k * (2 * n + 1) / (2 * n * n * (n + 1) ** 2)
    total = math.fsum(np.concatenate([logs, linear, quad]))
    top = n_intervals + 1
    return total, (1 / 12) / (2 * top * top)


@dataclass(frozen=True)
class ConstantValue:
    value: float
    error_estimate: float


@dataclass(frozen=True)
class ConstantSet:
    C0: ConstantValue
    C1: ConstantValue
    C2: ConstantValue
    A1: ConstantValue
    A1_euler: ConstantValue
    A2: ConstantValue
    D1: ConstantValue
    D2: ConstantValue
    D3: ConstantValue
    D4: ConstantValue
    sum_t: ConstantValue
    sum_t_log: ConstantValue
    sum_qt: ConstantValue
    prime_cutoff: int
    series_cutoff: int
    gamma_euler: float = EULER_GAMMA
    gamma_43: float = GAMMA_43
    notes: tuple[str, ...] = field(default=())

    NAMES = ("C0", "C1", "C2", "A1", "A1_euler", "A2", "D1", "D2", "D3", "D4")

    def records(self) -> list[dict]:
        cut = {"prime_cutoff": self.prime_cutoff, "series_cutoff": self.series_cutoff}
        out = [
            {"name": n, **asdict(getattr(self, n)), "cutoffs": cut}
            for n in self.NAMES
        ]
        out.append({"name": "gamma", "value": self.gamma_euler, "error_estimate": 0.0, "cutoffs": cut})
        out.append({"name": "Gamma(4/3)", "value": self.gamma_43, "error_estimate": 0.0, "cutoffs": cut})
        return out

    def v(self, name: str) -> float:
        return getattr(self, name).value


def _warn_if_loose(name: str, c: ConstantValue, notes: list[str]) -> None:
    if c.error_estimate > 1e-4 * abs(c.value):
        msg = f"{name}: tail bound {c.error_estimate:.3g} exceeds 1e-4 of value {c.value:.6g}"
        notes.append(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=3)


@lru_cache(maxsize=16)
def constants(prime_cutoff: int = DEFAULT_PRIME_CUTOFF, series_cutoff: int = DEFAULT_SERIES_CUTOFF) -> ConstantSet:
    """All named constants with truncation error estimates."""
    if prime_cutoff < 3 or series_cutoff < 10:
        raise ValueError("cutoffs too small")
    memo = t_memo(series_cutoff)
    t = memo.t[1 : series_cutoff + 1]
    q = np.arange(1, series_cutoff + 1, dtype=np.float64)
    sum_t = math.fsum(t)
    sum_t_log = math.fsum(t * np.log(q))
    sum_qt = math.fsum(t * q)
    err_t = series_tail_bound(0.0, series_cutoff, prime_cutoff)
    err_t_log = series_tail_bound(0.0, series_cutoff, prime_cutoff, log_weight=True)
    err_qt = series_tail_bound(-1.0, series_cutoff, prime_cutoff)

    z3 = zeta(3.0)
    d_m1 = d0(-1.0, prime_cutoff)
    d_m53 = d0(-5 / 3, prime_cutoff)
    z_m23 = zeta(-2 / 3)

    integral, int_tail = c2_integral(series_cutoff)
    c2 = ConstantValue(-11 / 12 - 2 * integral, 2 * int_tail)

    c0 = ConstantValue(GAMMA6 * sum_t, GAMMA6 * err_t)
    c1 = ConstantValue(GAMMA6 * sum_t_log, GAMMA6 * err_t_log)
    a1 = ConstantValue(GAMMA6 * sum_qt, GAMMA6 * err_qt)
    a1_euler = ConstantValue(GAMMA6 * z3 * d_m1.value, GAMMA6 * z3 * d_m1.tail_bound)
    a2 = ConstantValue(-9 / 5 * GAMMA6 * z_m23 * d_m53.value, 9 / 5 * GAMMA6 * abs(z_m23) * d_m53.tail_bound)
    d2_val = 0.5 * (c2.value * sum_t - sum_t_log)
    d2_err = 0.5 * (abs(c2.value) * err_t + c2.error_estimate * sum_t + err_t_log)

    notes: list[str] = []
    out = ConstantSet(
        C0=c0,
        C1=c1,
        C2=c2,
        A1=a1,
        A1_euler=a1_euler,
        A2=a2,
        D1=ConstantValue(0.5 * sum_t, 0.5 * err_t),
        D2=ConstantValue(d2_val, d2_err),
        D3=ConstantValue(0.5 * sum_qt, 0.5 * err_qt),
        D4=ConstantValue(0.9 * z_m23 * d_m53.value, 0.9 * abs(z_m23) * d_m53.tail_bound),
        sum_t=ConstantValue(sum_t, err_t),
        sum_t_log=ConstantValue(sum_t_log, err_t_log),
        sum_qt=ConstantValue(sum_qt, err_qt),
        prime_cutoff=prime_cutoff,
        series_cutoff=series_cutoff,
        notes=(),
    )
    for name in ConstantSet.NAMES:
        _warn_if_loose(name, getattr(out, name), notes)
    return ConstantSet(**{**{k: getattr(out, k) for k in out.__dataclass_fields__}, "notes": tuple(notes)})
