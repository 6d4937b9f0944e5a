from __future__ import annotations

import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from r3var.cube_reps import progression_sums, sum_r3, sum_r3_squared, sieve_r3
from r3var.dirichlet_constants import GAMMA6, GAMMA_43, TruncationWarning, constants
from r3var.local_densities import rho_table
from r3var.main_terms import (
    FormulaDomainError,
    auto_formula,
    reciprocal_square_sum,
    predict,
    q2w_exact,
    s2_exact,
    s3_asymptotic,
    s3_exact,
    w_asymptotic,
    w_exact,
)


@pytest.fixture(scope="module")
def consts():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return constants()


@pytest.mark.parametrize("X, value", [(0, 0.0), (0.5, 0.0), (1, 0.0), (2, 1.0), (3, 4.5), (2.5, 2.375)])
def test_w_exact_small(X, value):
    assert w_exact(X) == pytest.approx(value, abs=1e-15)


@given(st.integers(1, 2000), st.integers(1, 200))
@settings(max_examples=80, deadline=None)
def test_q2w_two_paths(x, Q):
    if Q > x or x / Q > 1000:
        return
    assert q2w_exact(x, Q) == pytest.approx(Q * Q * w_exact(x / Q), rel=1e-10, abs=1e-9)


@given(st.floats(1, 1e6), st.floats(0.5, 1.0))
def test_q2w_first_pieces(x, frac):
    Q = x * frac
    assert q2w_exact(x, Q) == pytest.approx((x - Q) ** 2, rel=1e-12, abs=1e-9 * x * x)


@given(st.floats(1, 1e6), st.floats(1 / 3 + 1e-9, 0.5))
def test_q2w_second_piece(x, frac):
    Q = x * frac
    assert q2w_exact(x, Q) == pytest.approx(1.5 * x * x - 4 * Q * x + 3 * Q * Q, rel=1e-10, abs=1e-9 * x * x)


@pytest.mark.parametrize("k", [1, 2, 3, 7, 20])
def test_q2w_continuous_at_breakpoints(k):
    x = 10**6
    at = q2w_exact(x, x / k)
    below = q2w_exact(x, x / k * (1 - 1e-12))
    assert at == pytest.approx(below, rel=1e-9, abs=1e-3)


@given(st.floats(0, 500), st.floats(0, 50))
@settings(max_examples=60, deadline=None)
def test_w_nonnegative_nondecreasing(X, dx):
    assert 0 <= w_exact(X) <= w_exact(X + dx)


def test_w_asymptotic_close(consts):
    for X in (100.0, 1000.0):
        assert abs(w_exact(X) - w_asymptotic(X, consts)) < 10 * math.sqrt(X)
    # at X = 1 the difference is only reported; it is finite
    assert math.isfinite(w_asymptotic(1, consts) - w_exact(1))


def test_s3_small_cases():
    assert s3_exact(1.0, 1) == pytest.approx(GAMMA6)
    assert s3_exact(1.0, 2) == pytest.approx(GAMMA6 * 1.5)
    assert s3_exact(3.0, 2) == pytest.approx(9 * GAMMA6 * 1.5)


@pytest.mark.parametrize("Q", [1, 5, 100, 3000])
def test_s3_is_x_squared_times_function_of_q(Q):
    unit = s3_exact(1.0, Q)
    for x in (2.0, 1024.0, 2.0**20):
        assert s3_exact(x, Q) / (x * x) == unit


def test_s3_asymptotic_agreement(consts):
    ratios = []
    for Q in (100, 1000, 10000):
        diff = abs(s3_exact(1.0, Q) - s3_asymptotic(1.0, Q, consts))
        ratios.append(diff / (math.log(Q) / Q))
    assert max(ratios) < 5
    assert s3_asymptotic(2.0, 50, consts) == pytest.approx(4 * s3_asymptotic(1.0, 50, consts))


def test_s2_examples():
    t = sieve_r3(10)
    g3 = GAMMA_43**3
    assert s2_exact(t, 10, 1) == pytest.approx(g3 * 10 * sum_r3(t, 10))
    assert s2_exact(t, 10, 2) == pytest.approx(g3 * 10 * 6)


def test_s2_by_definition(table_small):
    x, Q = 2000, 12
    want = 0.0
    for q in range(1, Q + 1):
        rho = rho_table(q).rho
        ups = progression_sums(table_small, x, q)
        want += sum(int(r) * int(u) for r, u in zip(rho, ups)) / q**3
    assert s2_exact(table_small, x, Q) == pytest.approx(GAMMA_43**3 * x * want, rel=1e-13)


@pytest.mark.parametrize("Y, exact", [(1, 0.0), (2, 1.0), (3, 4 + 0.5)])
def test_reciprocal_square_sum_small(Y, exact):
    assert reciprocal_square_sum(Y)[0] == pytest.approx(exact)


def test_reciprocal_square_sum_bounded_difference():
    diffs = [abs(e - a) for e, a in map(reciprocal_square_sum, [10, 100, 1000, 10**4, 10**5])]
    assert max(diffs) < 1.0


def test_predict_corollary2(consts):
    x, s = 1000, 12345
    p = predict("corollary2", x, x, s, consts)
    assert p.total == pytest.approx(x * s + x * x * (consts.C0.value * consts.C2.value - consts.C1.value))
    assert p.total == math.fsum(p.main_terms.values())
    assert predict("corollary1ii", x, x, s, consts).total == pytest.approx(p.total, rel=1e-12)


@given(st.integers(100, 10**6), st.floats(0.0, 1.0))
@settings(max_examples=80, deadline=None)
def test_corollaries_match_theorem2(consts, x, t):
    s = 3 * x
    # sample Q across x/3 < Q <= x
    Q = x / 3 + (2 * x / 3) * t
    if Q <= x / 3:
        return
    t2 = predict("theorem2", x, Q, s, consts).total
    fid = "corollary1ii" if 2 * Q > x else "corollary1i"
    assert predict(fid, x, Q, s, consts).total == pytest.approx(t2, rel=1e-10)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 7, 12])
def test_corollary3_matches_theorem2(consts, m):
    x = 840 * 100
    s = 10**6
    c3 = predict("corollary3", x, x // m, s, consts)
    t2 = predict("theorem2", x, x // m, s, consts)
    assert c3.total == pytest.approx(t2.total, rel=1e-10)
    assert t2.k == m
    if m == 2:
        assert predict("corollary1i", x, x // 2, s, consts).total == pytest.approx(c3.total, rel=1e-10)


def test_theorem1_terms(consts):
    x, Q, s = 10**4, 5000, 10**6
    p = predict("theorem1", x, Q, s, consts)
    assert p.main_terms["a1_term"] == pytest.approx(-consts.A1.value * Q * x)
    assert p.main_terms["a2_term"] == pytest.approx(consts.A2.value * Q ** (5 / 3) * x ** (1 / 3))


@pytest.mark.parametrize("fid, x, Q", [
    ("theorem1", 10**4, 100),
    ("theorem2", 10, 11),
    ("corollary1i", 100, 60),
    ("corollary1ii", 100, 40),
    ("corollary2", 100, 99),
    ("corollary3", 100, 30),
])
def test_domain_errors(consts, fid, x, Q):
    with pytest.raises(FormulaDomainError):
        predict(fid, x, Q, 1, consts)


def test_unknown_formula(consts):
    with pytest.raises(ValueError):
        predict("theorem3", 10, 5, 1, consts)


def test_auto_selection():
    assert auto_formula(1000, 51) == "theorem2"
    assert auto_formula(1000, 50) == "theorem1"


def test_prediction_close_to_empirical_scale(consts, table_1e4):
    x = 10**4
    p = predict("corollary2", x, x, sum_r3_squared(table_1e4, x), consts)
    assert p.total > 0
