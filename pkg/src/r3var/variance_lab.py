"""Empirical variance V(x, Q) from the sieve and major-arc diagnostics."""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Sequence

import numpy as np

from .cube_reps import CubeRepTable, progression_sums, sum_r3_squared
from .dirichlet_constants import GAMMA_43, ConstantSet
from .exp_sums import nu
from .local_densities import DEFAULT_RHO_CAPACITY, rho_by_residue
from .main_terms import Prediction, auto_formula, predict

GAMMA3 = GAMMA_43**3
DEFAULT_NORMALIZE_EXPONENT = 16 / 9
ARC_EPSILON = 0.05


@dataclass(frozen=True)
class VarianceReport:
    x: int
    Q: int
    v_empirical: float
    prediction: Prediction | None = None
    normalize_exponent: float = DEFAULT_NORMALIZE_EXPONENT
    per_q_contributions: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def u0_residual(self) -> float | None:
        if self.prediction is None:
            return None
        return self.v_empirical - self.prediction.total

    @property
    def normalized(self) -> float | None:
        u = self.u0_residual
        return None if u is None else u / self.x**self.normalize_exponent

    def with_prediction(self, prediction: Prediction | None, normalize_exponent: float | None = None) -> "VarianceReport":
        exp = self.normalize_exponent if normalize_exponent is None else normalize_exponent
        return VarianceReport(self.x, self.Q, self.v_empirical, prediction, exp, self.per_q_contributions)

    def row(self) -> dict:
        p = self.prediction
        return {
            "x": self.x,
            "Q": self.Q,
            "v_empirical": self.v_empirical,
            "prediction": None if p is None else {"total": p.total, "k": p.k, **p.main_terms},
            "u0_residual": self.u0_residual,
            "normalized": self.normalized,
            "formula": None if p is None else p.formula_id,
        }


def _q_contribution(table: CubeRepTable, x: int, q: int, capacity: int) -> float:
    ups = progression_sums(table, x, q)
    rho = np.roll(rho_by_residue(q, capacity=capacity), -1)
    d = ups - (GAMMA3 * x / q**3) * rho
    # pairwise summation over a fixed array: order independent of scheduling
    return float(np.sum(d * d))


def per_q_contributions(
    table: CubeRepTable, x: int, Q: int, workers: int = 1, capacity: int = DEFAULT_RHO_CAPACITY
) -> np.ndarray:
    """sum_a (Upsilon(x;q,a) - Gamma(4/3)^3 x rho(q,a)/q^3)^2 for q = 1..Q (entry q - 1)."""
    table._check(x)
    if Q < 0 or Q > x:
        raise ValueError(f"need 0 <= Q <= x, got Q={Q}, x={x}")
    out = np.zeros(Q, dtype=np.float64)
    if Q == 0:
        return out
    workers = max(1, int(workers))

    def run(start: int) -> None:
        for q in range(start, Q + 1, workers):
            out[q - 1] = _q_contribution(table, x, q, capacity)

    if workers == 1:
        run(1)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(1, workers + 1)))
    return out


def empirical_variance(
    table: CubeRepTable,
    x: int,
    Q: int,
    workers: int = 1,
    capacity: int = DEFAULT_RHO_CAPACITY,
    keep_contributions: bool = False,
) -> VarianceReport:
    """V(x, Q) from the sieve table; bit-identical for any worker count."""
    contrib = per_q_contributions(table, x, Q, workers, capacity)
    v = math.fsum(contrib)
    return VarianceReport(int(x), int(Q), v, per_q_contributions=contrib if keep_contributions else None)


def _g_rational(table: CubeRepTable, x: int, a: int, q: int, beta: float) -> complex:
    n, r = table.support(x)
    # exact reduction of n a / q, then the small real shift n beta
    frac = (n * a % q) / q
    theta = frac + ((n * beta) % 1.0 if beta else 0.0)
    t = 2 * np.pi * theta
    return complex(float(np.sum(r * np.cos(t))), float(np.sum(r * np.sin(t))))


def g_transform(table: CubeRepTable, x: int, alpha: float | Fraction) -> complex:
    """G(alpha) = sum_{n <= x} r_3(n) e(n alpha).

    A ``Fraction`` argument is reduced exactly; a float is reduced mod 1 per term.
    """
    table._check(x)
    if isinstance(alpha, Fraction):
        return _g_rational(table, x, alpha.numerator, alpha.denominator, 0.0)
    return _g_rational(table, x, 0, 1, float(alpha))


def j_kernel(x: float, beta: float) -> complex:
    """J(beta) = Gamma(4/3)^3 sum_{n <= x} e(beta n), via the Dirichlet-kernel form."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    N = math.floor(x)
    b = beta - round(beta)
    if b == 0:
        return complex(GAMMA3 * N)
    amp = math.sin(math.pi * b * N) / math.sin(math.pi * b)
    return GAMMA3 * amp * cmath.exp(1j * math.pi * b * (N + 1))


@dataclass(frozen=True)
class ArcDiagnostic:
    q: int
    a: int
    beta: float
    g_value: complex
    approx: complex
    delta_abs: float
    bound_ratio: float


def arc_diagnostic(table: CubeRepTable, x: int, q: int, a: int, beta: float, eps: float = ARC_EPSILON) -> ArcDiagnostic:
    """Compare G(beta + a/q) with nu(q, a) J(beta)."""
    if q < 1 or gcd(a, q) != 1:
        raise ValueError(f"need gcd(a, q) = 1, got a={a}, q={q}")
    table._check(x)
    g = _g_rational(table, x, a % q, q, beta)
    approx = nu(q, a % q if q > 1 else 1) * j_kernel(x, beta)
    delta = abs(g - approx)
    scale = x ** (2 / 3) * q ** (0.5 + eps) * (1 + x * abs(beta))
    return ArcDiagnostic(q, a, beta, g, approx, delta, delta / scale)


def arc_survey(table: CubeRepTable, x: int, q_max: int = 32) -> list[ArcDiagnostic]:
    """Diagnostics over q <= q_max, (a, q) = 1 and a small symmetric set of shifts."""
    out = []
    for q in range(1, q_max + 1):
        betas = sorted({0.0, 1 / (2 * q * math.sqrt(x)), -1 / (2 * q * math.sqrt(x)), 1 / (2 * x), -1 / (2 * x)})
        for a in range(1, q + 1):
            if gcd(a, q) != 1:
                continue
            out.extend(arc_diagnostic(table, x, q, a, b) for b in betas)
    return out


QPolicy = Callable[[int], int]

Q_POLICIES: dict[str, QPolicy] = {
    "x": lambda x: x,
    "x/2": lambda x: x // 2,
    "sqrtlog": lambda x: min(x, math.ceil(math.sqrt(x) * math.log(x))),
}


def scan(
    table: CubeRepTable,
    x_grid: Sequence[int],
    q_policy: str | QPolicy,
    formula_id: str | None,
    consts: ConstantSet | None = None,
    workers: int = 1,
    normalize_exponent: float = DEFAULT_NORMALIZE_EXPONENT,
) -> list[VarianceReport]:
    """One report per x, in grid order.

    ``formula_id`` may be a formula name, ``"auto"`` or ``None`` (no prediction).
    """
    policy = Q_POLICIES[q_policy] if isinstance(q_policy, str) else q_policy
    reports = []
    for x in x_grid:
        x = int(x)
        Q = int(policy(x))
        rep = empirical_variance(table, x, Q, workers)
        pred = None
        if formula_id is not None:
            fid = auto_formula(x, Q) if formula_id == "auto" else formula_id
            pred = predict(fid, x, Q, sum_r3_squared(table, x), consts)
        reports.append(rep.with_prediction(pred, normalize_exponent))
    return reports
