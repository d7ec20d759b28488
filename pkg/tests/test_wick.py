import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgauss import fock, qcore, wick


def test_splitting_exponent():
    assert wick.splitting_exponent((), (0, 1)) == 0
    assert wick.splitting_exponent((2,), (0, 1)) == 2
    assert wick.splitting_exponent((0, 1), (2,)) == 0
    assert wick.splitting_exponent((1,), (0, 2)) == 1


def test_splittings_count_and_generating_function():
    # sum over splittings with |I1| = k of q^{i(I1, I2)} is the q-binomial [n k]
    q = 0.37
    for n in range(6):
        rows = list(wick.splittings(n))
        assert len(rows) == 2**n
        for k in range(n + 1):
            total = sum(q**e for c, a, e in rows if len(c) == k)
            assert total == pytest.approx(qcore.q_binomial(n, k, q), rel=1e-13)


def test_degree_one_is_field():
    b = fock.FockBasis(2, 4)
    f = np.array([0.4, -1.1])
    for q in (-0.5, 0.5):
        W = wick.wick_from_splittings([f], b, q)
        assert np.allclose(W.toarray(), fock.omega(f, b, q).toarray())


def test_degree_two_explicit():
    b = fock.FockBasis(1, 6)
    q = 0.45
    a, ad = fock.annihilation([1.0], b, q), fock.creation([1.0], b, q)
    expected = a @ a + (1 + q) * (ad @ a) + ad @ ad
    for W in (wick.wick_power([1.0], 2, b, q), wick.wick_from_splittings([[1.0]] * 2, b, q)):
        assert fock.restricted_norm(W - expected, 4) <= 1e-13


@pytest.mark.parametrize("q", [-0.9, -0.3, 0.0, 0.4, 0.9])
def test_three_constructions_agree(q):
    b = fock.FockBasis(2, 6)
    rng = np.random.default_rng(11)
    for n in range(1, 5):
        for word in itertools.product(range(2), repeat=n):
            fs = [np.eye(2)[i] for i in word]
            A = wick.wick_from_splittings(fs, b, q)
            B = wick.wick_recursive(fs, b, q)
            assert fock.restricted_norm(A - B, b.N - n) <= 1e-12
        f = rng.normal(size=2)
        C = wick.wick_power(f, n, b, q)
        assert fock.restricted_norm(wick.wick_from_splittings([f] * n, b, q) - C, b.N - n) <= 1e-12


def test_wick_vector_maps_vacuum_to_xi():
    b = fock.FockBasis(2, 5)
    rng = np.random.default_rng(5)
    xi = np.zeros(b.size)
    xi[: b.offsets[3]] = rng.normal(size=b.offsets[3])
    W = wick.wick_vector(xi, b, 0.35)
    assert np.allclose(W.apply(b.vector()), xi, atol=1e-13)


def test_hermite_identity():
    b = fock.FockBasis(1, 10)
    for n in (0, 1):
        assert wick.hermite_identity_residual([1.0], n, b, 0.3) == 0.0
    assert wick.hermite_identity_residual([1.0], 3, b, -0.5) <= 1e-10
    assert wick.hermite_identity_residual([1.0], 2, b, 0.7) <= 1e-12
    with pytest.raises(ValueError):
        wick.hermite_identity_residual([2.0], 2, b, 0.7)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.95, 0.95), st.integers(1, 5))
def test_hermite_identity_property(q, n):
    b = fock.FockBasis(1, 10)
    assert wick.hermite_identity_residual([1.0], n, b, q) <= 1e-10


def test_word_too_long():
    with pytest.raises(ValueError):
        wick.wick_recursive([[1.0]] * 5, fock.FockBasis(1, 4), 0.2)


def test_gamma_positivity():
    rng = np.random.default_rng(9)
    b = fock.FockBasis(2, 6)
    T = rng.normal(size=(2, 2))
    T /= np.linalg.norm(T, 2) * 1.05
    eta = b.tensor_word([rng.normal(size=2), rng.normal(size=2)]) + b.vector()
    for q in (-0.6, 0.0, 0.6):
        assert wick.gamma_positivity_margin(T, eta, b, q, max_degree=2) >= -1e-10
