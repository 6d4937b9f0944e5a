from __future__ import annotations

import cmath
import math
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from oracles import r3_brute, rho_triple
from r3var.cube_reps import progression_sums, sieve_r3, sum_r3
from r3var.dirichlet_constants import GAMMA_43
from r3var.local_densities import rho_table
from r3var.variance_lab import (
    arc_diagnostic,
    arc_survey,
    empirical_variance,
    g_transform,
    j_kernel,
    per_q_contributions,
    scan,
)

G3 = GAMMA_43**3


def variance_by_definition(x: int, Q: int) -> float:
    r = r3_brute(x)
    total = 0.0
    for q in range(1, Q + 1):
        rho = rho_triple(q)
        for a in range(1, q + 1):
            ups = sum(r[n] for n in range(1, x + 1) if (n - a) % q == 0)
            total += (ups - G3 * x * rho[a - 1] / q**3) ** 2
    return total


def test_golden_cases():
    t = sieve_r3(10)
    assert empirical_variance(t, 10, 1).v_empirical == pytest.approx((4 - 10 * G3) ** 2)
    assert empirical_variance(t, 10, 1).v_empirical == pytest.approx(9.739, abs=1e-3)
    v2 = empirical_variance(t, 10, 2).v_empirical
    assert v2 == pytest.approx(16.61, abs=0.01)
    assert v2 == pytest.approx((4 - 10 * G3) ** 2 + (1 - 5 * G3) ** 2 + (3 - 5 * G3) ** 2)
    assert empirical_variance(t, 10, 0).v_empirical == 0


@pytest.mark.parametrize("x, Q", [(30, 7), (100, 20), (250, 30)])
def test_against_definition(x, Q):
    t = sieve_r3(x)
    assert empirical_variance(t, x, Q).v_empirical == pytest.approx(variance_by_definition(x, Q), rel=1e-12)


@given(st.integers(1, 2000), st.integers(0, 60))
@settings(max_examples=40, deadline=None)
def test_nonnegative_and_monotone(table_small, x, Q):
    Q = min(Q, x)
    c = per_q_contributions(table_small, x, Q)
    assert (c >= 0).all()
    v = empirical_variance(table_small, x, Q).v_empirical
    assert v >= 0
    if Q < x:
        assert empirical_variance(table_small, x, Q + 1).v_empirical >= v


@given(st.integers(1, 3000))
@settings(max_examples=50, deadline=None)
def test_mean_value_consistency(q):
    x = 12345
    rho = rho_table(q).rho
    total = math.fsum(G3 * x * float(r) / q**3 for r in rho)
    assert total == pytest.approx(G3 * x, rel=1e-9)


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_workers_bit_identical(table_1e4, workers):
    a = empirical_variance(table_1e4, 10**4, 300).v_empirical
    b = empirical_variance(table_1e4, 10**4, 300, workers=workers).v_empirical
    assert a == b


def test_q_range_errors(table_small):
    with pytest.raises(ValueError):
        empirical_variance(table_small, 100, 101)


def test_g_transform_examples():
    t = sieve_r3(10)
    assert g_transform(t, 10, 0.0) == sum_r3(t, 10)
    v = g_transform(t, 10, 0.5)
    assert v.real == pytest.approx(2) and abs(v.imag) < 1e-12
    assert g_transform(t, 10, Fraction(1, 2)) == pytest.approx(2)


@given(st.floats(-3, 3), st.integers(1, 2000))
@settings(max_examples=50, deadline=None)
def test_g_transform_periodic(table_small, alpha, x):
    assert g_transform(table_small, x, alpha) == pytest.approx(g_transform(table_small, x, alpha + 1), abs=1e-8 * sum_r3(table_small, x))


@pytest.mark.parametrize("q", [1, 2, 3, 5, 7, 9, 10])
def test_g_at_rationals_from_progressions(table_small, q):
    # G(a/q) = sum_b e(ab/q) Upsilon(x; q, b)
    x = 2000
    ups = progression_sums(table_small, x, q)
    for a in range(q):
        want = sum(cmath.exp(2j * math.pi * a * b / q) * int(u) for b, u in enumerate(ups, start=1))
        assert g_transform(table_small, x, Fraction(a, q)) == pytest.approx(want, abs=1e-8 * sum_r3(table_small, x))


def test_j_kernel_examples():
    assert j_kernel(10, 0.0) == pytest.approx(G3 * 10)
    assert j_kernel(10.7, 0.0) == pytest.approx(G3 * 10)
    assert abs(j_kernel(2, 0.5)) < 1e-12


@given(st.integers(1, 5000), st.floats(-0.5, 0.5).filter(lambda b: abs(b) > 1e-9))
@settings(max_examples=100)
def test_j_kernel_bound_and_definition(x, beta):
    j = j_kernel(x, beta)
    assert abs(j) <= G3 * min(x, 1 / (2 * abs(beta))) * (1 + 1e-9)
    if x <= 300:
        direct = G3 * sum(cmath.exp(2j * math.pi * beta * n) for n in range(1, x + 1))
        assert j == pytest.approx(direct, abs=1e-9 * x)


def test_arc_examples():
    t = sieve_r3(10)
    d = arc_diagnostic(t, 10, 1, 1, 0.0)
    assert d.delta_abs == pytest.approx(abs(sum_r3(t, 10) - G3 * 10))
    d3 = arc_diagnostic(t, 10, 3, 1, 0.0)
    assert d3.approx == 0
    assert d3.g_value == pytest.approx(g_transform(t, 10, Fraction(1, 3)))
    assert d3.delta_abs == pytest.approx(abs(d3.g_value))
    with pytest.raises(ValueError):
        arc_diagnostic(t, 10, 4, 2, 0.0)


def test_arc_survey_shape(table_small):
    diags = arc_survey(table_small, 1000, q_max=6)
    units = sum(1 for q in range(1, 7) for a in range(1, q + 1) if gcd(a, q) == 1)
    assert len(diags) == 5 * units
    assert all(math.isfinite(d.bound_ratio) and d.bound_ratio >= 0 for d in diags)


def test_scan(table_small):
    assert scan(table_small, [], "x", None) == []
    (rep,) = scan(sieve_r3(10), [10], "x", None)
    assert rep.Q == 10 and rep.prediction is None and rep.u0_residual is None
    reps = scan(table_small, [500, 1000, 2000], "x", "corollary2")
    assert [r.x for r in reps] == [500, 1000, 2000]
    for r in reps:
        assert r.u0_residual == r.v_empirical - r.prediction.total
        assert r.normalized == pytest.approx(r.u0_residual / r.x ** (16 / 9))
        assert r.row()["formula"] == "corollary2"
    rep = scan(table_small, [1000], "x/2", "auto", normalize_exponent=2.0)[0]
    assert rep.Q == 500 and rep.prediction.formula_id == "theorem2"
    assert rep.normalized == pytest.approx(rep.u0_residual / 1e6)
