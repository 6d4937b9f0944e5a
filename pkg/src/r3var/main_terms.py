"""Main terms of the variance: W(X), S_3, S_2 and the closed-form predictions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cube_reps import CubeRepTable, progression_sums
from .dirichlet_constants import GAMMA6, GAMMA_43, ConstantSet, c2_integral, constants as default_constants
from .local_densities import DEFAULT_RHO_CAPACITY, h_function, rho_table, t_memo

FORMULAS = ("theorem1", "theorem2", "corollary1i", "corollary1ii", "corollary2", "corollary3")


class FormulaDomainError(ValueError):
    """(x, Q) lies outside the range where a formula applies."""


def _floor_ratio(x: float, q: float) -> int:
    return math.floor(Fraction(x) / Fraction(q))


def w_exact(X: float) -> float:
    """W(X) = sum_{l <= X} h(l)/l (X - l)^2, with h taken from the shared T memo."""
    if X < 0:
        raise ValueError(f"X must be >= 0, got {X}")
    top = math.floor(X)
    if top < 1:
        return 0.0
    memo = t_memo(top)
    l = np.arange(1, top + 1, dtype=np.float64)
    return math.fsum(memo.h[1 : top + 1] / l * (X - l) ** 2)


def w_asymptotic(X: float, consts: ConstantSet) -> float:
    if X < 1:
        raise ValueError(f"X must be >= 1, got {X}")
    return math.fsum(
        [
            consts.sum_t.value * X * X * math.log(X),
            2 * consts.D2.value * X * X,
            consts.sum_qt.value * X,
            2 * consts.D4.value * X ** (1 / 3),
        ]
    )


def q2w_exact(x: float, Q: float) -> float:
    """Q^2 W(x/Q) = sum_{l <= x/Q} h(l)/l (x - lQ)^2.

    h is recomputed from its divisor sum here, independently of ``w_exact``.
    """
    if not 0 < Q <= x:
        raise ValueError(f"need 0 < Q <= x, got x={x}, Q={Q}")
    k = _floor_ratio(x, Q)
    return math.fsum(h_function(l) / l * (x - l * Q) ** 2 for l in range(1, k + 1))


@lru_cache(maxsize=64)
def _h_over_q_sum(Q: int) -> float:
    memo = t_memo(Q)
    q = np.arange(1, Q + 1, dtype=np.float64)
    return math.fsum(memo.h[1 : Q + 1] / q)


def s3_exact(x: float, Q: int) -> float:
    """Gamma(4/3)^6 x^2 sum_{q <= Q} h(q)/q; the x-free factor is computed first."""
    if Q < 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    return (GAMMA6 * _h_over_q_sum(int(Q))) * (x * x)


def s3_asymptotic(x: float, Q: float, consts: ConstantSet) -> float:
    if Q < 2:
        raise ValueError(f"Q must be >= 2, got {Q}")
    c0, c1 = consts.C0.value, consts.C1.value
    return x * x * (c0 * math.log(Q) + consts.gamma_euler * c0 - c1)


def s2_exact(table: CubeRepTable, x: int, Q: int, capacity: int = DEFAULT_RHO_CAPACITY) -> float:
    """Gamma(4/3)^3 x sum_{q <= Q} sum_a rho(q, a) q^-3 Upsilon(x; q, a)."""
    if Q < 1:
        raise ValueError(f"Q must be >= 1, got {Q}")
    terms = []
    for q in range(1, Q + 1):
        rho = rho_table(q, capacity=capacity).rho
        ups = progression_sums(table, x, q)
        # integer dot product first, one division per q
        terms.append(int(np.dot(rho, ups)) / q**3)
    return GAMMA_43**3 * x * math.fsum(terms)


@lru_cache(maxsize=1)
def _c2_default() -> float:
    integral, _ = c2_integral(10**5)
    return -11 / 12 - 2 * integral


def reciprocal_square_sum(Y: float, c2: float | None = None) -> tuple[float, float]:
    """(sum_{m <= Y} (Y - m)^2 / m, Y^2 log Y + C_2 Y^2 + Y)."""
    if Y < 1:
        raise ValueError(f"Y must be >= 1, got {Y}")
    if c2 is None:
        c2 = _c2_default()
    m = np.arange(1, math.floor(Y) + 1, dtype=np.float64)
    exact = math.fsum((Y - m) ** 2 / m)
    return exact, Y * Y * math.log(Y) + c2 * Y * Y + Y


@dataclass(frozen=True)
class Prediction:
    x: float
    Q: float
    main_terms: dict[str, float]
    total: float
    formula_id: str
    k: int | None = None

    @classmethod
    def build(cls, x, Q, terms: dict[str, float], formula_id: str, k: int | None = None) -> "Prediction":
        return cls(x, Q, terms, math.fsum(terms.values()), formula_id, k)


def _log_term(x: float, log_ratio: float, c: ConstantSet) -> float:
    c0 = c.C0.value
    return x * x * (c0 * log_ratio + c0 * c.C2.value - c.C1.value)


def _require(cond: bool, formula_id: str, x: float, Q: float, rng: str) -> None:
    if not cond:
        raise FormulaDomainError(f"{formula_id} needs {rng}; got x={x}, Q={Q}")


def predict(formula_id: str, x: float, Q: float, sum_r3sq: int, consts: ConstantSet | None = None) -> Prediction:
    """Predicted V(x, Q) (without the error term) under the chosen formula."""
    if formula_id not in FORMULAS:
        raise ValueError(f"unknown formula {formula_id!r}; choose from {FORMULAS}")
    c = consts if consts is not None else default_constants()
    _require(0 < Q <= x, formula_id, x, Q, "0 < Q <= x")
    base = Q * sum_r3sq

    if formula_id == "theorem1":
        _require(math.sqrt(x) * math.log(x) <= Q, formula_id, x, Q, "x^(1/2) log x <= Q <= x")
        terms = {
            "q_times_sum_r3sq": base,
            "a1_term": -c.A1.value * Q * x,
            "a2_term": c.A2.value * Q ** (5 / 3) * x ** (1 / 3),
        }
        return Prediction.build(x, Q, terms, formula_id)

    k = _floor_ratio(x, Q)
    g6 = GAMMA6
    if formula_id == "theorem2":
        w_term = -g6 * q2w_exact(x, Q)
        log_ratio = math.log(x / Q)
    elif formula_id == "corollary1i":
        _require(x < 3 * Q and 2 * Q <= x, formula_id, x, Q, "x/3 < Q <= x/2")
        w_term = g6 * (-1.5 * x * x + 4 * Q * x - 3 * Q * Q)
        log_ratio = math.log(x / Q)
    elif formula_id == "corollary1ii":
        _require(x < 2 * Q, formula_id, x, Q, "x/2 < Q <= x")
        w_term = g6 * (-x * x + 2 * Q * x - Q * Q)
        log_ratio = math.log(x / Q)
    elif formula_id == "corollary2":
        _require(Q == x, formula_id, x, Q, "Q = x")
        w_term = 0.0
        log_ratio = 0.0
    else:
        ratio = Fraction(x) / Fraction(Q)
        _require(ratio.denominator == 1, formula_id, x, Q, "Q = x/m with integer m")
        m = int(ratio)
        w_term = -g6 * w_exact(m) * x * x / (m * m)
        log_ratio = math.log(m)
    terms = {
        "q_times_sum_r3sq": base,
        "log_term": _log_term(x, log_ratio, c),
        "exact_w_term": w_term,
    }
    return Prediction.build(x, Q, terms, formula_id, k)


def auto_formula(x: float, Q: float) -> str:
    """theorem2 when Q > x/20, theorem1 otherwise."""
    return "theorem2" if 20 * Q > x else "theorem1"
