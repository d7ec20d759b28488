import math
from decimal import Decimal, localcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qgauss import qcore

qs = st.floats(-0.95, 0.95)


@pytest.mark.parametrize("n,q,expected", [(0, 0.3, 0.0), (3, 0.5, 1.75), (4, 0.0, 1.0), (1, -0.7, 1.0)])
def test_q_int_values(n, q, expected):
    assert qcore.q_int(n, q) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("n,q,expected", [(0, 0.4, 1.0), (3, 0.5, 2.625), (6, 0.0, 1.0)])
def test_q_factorial_values(n, q, expected):
    assert qcore.q_factorial(n, q) == pytest.approx(expected, abs=1e-15)


def test_q_binomial_values():
    assert qcore.q_binomial(2, 1, 0.3) == pytest.approx(1.3)
    assert qcore.q_binomial(5, 0, -0.4) == 1.0
    # Gaussian binomial [4 2] = 1 + q + 2q^2 + q^3 + q^4
    q = Fraction(1, 2)
    assert qcore.q_binomial(4, 2, 0.5) == pytest.approx(float(1 + q + 2 * q**2 + q**3 + q**4), abs=1e-15)
    assert qcore.q_binomial(4, 2, 0.5) == pytest.approx(2.1875, abs=1e-15)


def test_q_binomial_rejects_k_above_n():
    with pytest.raises(ValueError):
        qcore.q_binomial(2, 3, 0.1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 9), st.integers(0, 9), qs)
def test_q_pascal(n, k, q):
    if k >= n:
        return
    lhs = qcore.q_binomial(n, k, q) + q ** (k + 1) * qcore.q_binomial(n, k + 1, q)
    assert lhs == pytest.approx(qcore.q_binomial(n + 1, k + 1, q), rel=1e-12)


def test_printed_pascal_form_is_off_by_one_power():
    # [1 0] + q^0 [1 1] = 2, while [2 1] = 1 + q
    q = 0.3
    assert qcore.q_binomial(1, 0, q) + qcore.q_binomial(1, 1, q) == pytest.approx(2.0)
    assert qcore.q_binomial(2, 1, q) == pytest.approx(1.3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 7), qs)
def test_binomial_symmetry(n, q):
    for k in range(n + 1):
        assert qcore.q_binomial(n, k, q) == pytest.approx(qcore.q_binomial(n, n - k, q), rel=1e-12)


def test_pochhammer_values():
    assert qcore.pochhammer(0.7, 0.4, 0) == 1.0
    assert qcore.pochhammer(0.0, 0.4) == 1.0
    brute = math.prod(1 - 0.25 * 0.5**j for j in range(200))
    assert qcore.pochhammer(0.25, 0.5, math.inf, 1e-14) == pytest.approx(brute, abs=1e-13)
    assert qcore.pochhammer(0.3, -0.6, 3) == pytest.approx((1 - 0.3) * (1 + 0.18) * (1 - 0.108))


def _pochhammer_decimal(a, q, terms=2000):
    with localcontext() as ctx:
        ctx.prec = 40
        a, q = Decimal(a), Decimal(q)
        out, term = Decimal(1), a
        for _ in range(terms):
            out *= 1 - term
            term *= q
        return float(out)


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.95, 0.95), qs)
def test_pochhammer_error_bound(a, q):
    exact = _pochhammer_decimal(a, q)
    assert abs(qcore.pochhammer(a, q) - exact) <= qcore.pochhammer_error_bound(a, q) * abs(exact)


@pytest.mark.parametrize("p,expected", [((1, 2, 3, 4), 0), ((4, 3, 2, 1), 6), ((2, 3, 1), 2), ((), 0)])
def test_inversions(p, expected):
    assert qcore.inversions(p) == expected


def test_inversions_rejects_non_permutation():
    with pytest.raises(ValueError):
        qcore.inversions((1, 1, 2))


def test_permutations_counts_and_cap():
    assert list(qcore.permutations(0)) == [()]
    assert len(list(qcore.permutations(3))) == 6
    with pytest.raises(ValueError):
        list(qcore.permutations(9))


def test_inversion_generating_function():
    assert sum(0.5 ** qcore.inversions(p) for p in qcore.permutations(3)) == pytest.approx(2.625, abs=1e-15)
    for n in range(7):
        for q in (-0.8, 0.2, 0.9):
            s = sum(q ** qcore.inversions(p) for p in qcore.permutations(n))
            assert s == pytest.approx(qcore.q_factorial(n, q), rel=1e-12)


@pytest.mark.parametrize("q", [-1.0, 1.0, 1.5, float("nan")])
def test_q_out_of_range(q):
    with pytest.raises(ValueError):
        qcore.check_q(q)
