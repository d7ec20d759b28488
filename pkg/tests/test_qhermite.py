import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from conftest import P_GRID
from qgauss import qcore, qhermite


def _crossing_moment(n, q):
    """int x^n dnu_q as the sum of q^crossings over pair partitions, by brute force."""
    if n % 2:
        return 0.0

    def pairings(points):
        if not points:
            yield []
            return
        a, rest = points[0], points[1:]
        for i, b in enumerate(rest):
            for p in pairings(rest[:i] + rest[i + 1:]):
                yield [(a, b)] + p

    total = 0.0
    for p in pairings(list(range(n))):
        cr = sum(1 for (a, b) in p for (c, d) in p if a < c < b < d)
        total += q**cr
    return total


def test_hermite_low_degree():
    x = np.linspace(-1.5, 1.5, 7)
    q = 0.3
    assert np.allclose(qhermite.hermite(0, q, x), 1.0)
    assert np.allclose(qhermite.hermite(1, q, x), x)
    assert np.allclose(qhermite.hermite(2, q, x), x**2 - 1)
    assert np.allclose(qhermite.hermite(3, q, x), x**3 - (2 + q) * x)


def test_normalized_table_matches():
    x = np.linspace(-2, 2, 9)
    q = -0.4
    T = qhermite.hermite_normalized_table(7, q, x)
    for n in range(7):
        assert np.allclose(T[n], qhermite.hermite(n, q, x) / math.sqrt(qcore.q_factorial(n, q)))


def test_density_semicircle():
    x = np.linspace(-2, 2, 401)
    assert np.max(np.abs(qhermite.nu_density(0.0, x) - np.sqrt(4 - x**2) / (2 * np.pi))) <= 1e-12
    for q in P_GRID:
        e = qhermite.edge(q)
        assert qhermite.nu_density(q, np.array([-e, e])).tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        qhermite.nu_density(0.0, 2.5)


@pytest.mark.parametrize("q", P_GRID)
def test_density_mass_and_moments(q):
    mass = quad(lambda th: qhermite.nu_theta_density(q, th), 0, math.pi, epsabs=1e-14, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-12)
    e = qhermite.edge(q)
    m6 = quad(lambda th: (e * math.cos(th)) ** 6 * qhermite.nu_theta_density(q, th), 0, math.pi,
              epsabs=1e-13, limit=200)[0]
    assert m6 == pytest.approx(5 + 6 * q + 3 * q**2 + q**3, abs=1e-10)


def test_quadrature_basics():
    r = qhermite.gauss_quadrature(0.3, 1)
    assert r.nodes.tolist() == [0.0] and r.weights.tolist() == [1.0]
    for q in P_GRID:
        r = qhermite.gauss_quadrature(q, 10)
        assert r.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(r.nodes, -r.nodes[::-1])
        assert np.all(np.abs(r.nodes) < qhermite.edge(q))
        for n in range(0, 11):
            assert r.integrate(r.nodes**n) == pytest.approx(_crossing_moment(n, q), abs=1e-10)
    with pytest.raises(ValueError):
        qhermite.gauss_quadrature(0.3, 0)


def test_orthogonality_values():
    r = qhermite.gauss_quadrature(0.5, 12)
    assert qhermite.orthogonality_residual(0, 0, 0.5, r) <= 1e-14
    assert abs(r.integrate(qhermite.hermite(3, 0.5, r.nodes) ** 2) - 2.625) <= 1e-12
    assert abs(r.integrate(qhermite.hermite(2, 0.5, r.nodes) * qhermite.hermite(4, 0.5, r.nodes))) <= 1e-8
    with pytest.raises(ValueError):
        qhermite.orthogonality_residual(8, 8, 0.5, qhermite.gauss_quadrature(0.5, 4))


def test_moment_nu():
    for q in (-0.5, 0.2):
        assert qhermite.moment_nu(4, q) == pytest.approx(2 + q, abs=1e-12)
        assert qhermite.moment_nu(3, q) == pytest.approx(0.0, abs=1e-14)


def test_mehler_special_values():
    x, y = np.linspace(-1.5, 1.5, 5), np.linspace(-1.0, 1.8, 5)
    for q in (-0.5, 0.0, 0.6):
        assert np.allclose(qhermite.mehler_series(q, 0.0, x, y), 1.0)
        assert np.allclose(qhermite.mehler_product(q, 0.0, x, y), 1.0)
    r = 0.4
    X, Y = np.meshgrid(x, y)
    free = (1 - r**2) / ((1 - r**2) ** 2 - r * (1 + r**2) * X * Y + r**2 * (X**2 + Y**2))
    assert np.allclose(qhermite.mehler_free(r, X, Y), free, atol=1e-14)
    assert np.allclose(qhermite.mehler_product(0.0, r, X, Y), free, atol=1e-12)


def test_mehler_numerator():
    assert qhermite.mehler_numerator(0.0, 0.5) == pytest.approx(0.75)
    q, r = 0.5, 0.3
    assert qhermite.mehler_numerator(q, r) == pytest.approx(math.prod(1 - r**2 * q**j for j in range(200)))


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-0.7, 0.7), st.floats(-0.98, 0.98), st.floats(-0.98, 0.98))
def test_mehler_dual_forms_property(q, r, u, v):
    e = qhermite.edge(q)
    s = qhermite.mehler_series(q, r, u * e, v * e)
    p = qhermite.mehler_product(q, r, u * e, v * e)
    assert p >= 0
    assert abs(s - p) <= 1e-10 * max(1.0, abs(p))


def test_mehler_series_info():
    ev = qhermite.mehler(0.5, 0.6, 0.3, -0.9)
    assert ev.terms > 0 and ev.tail_bound <= 1e-14
    assert ev.series == pytest.approx(ev.product, rel=1e-12)


def test_mehler_reproduces_kernel_mass():
    # int p_r(x, y) nu(dy) = 1
    q, r = 0.3, 0.55
    rule = qhermite.gauss_quadrature(q, 200)
    for x in (-1.2, 0.0, 2.0):
        assert rule.integrate(qhermite.mehler_product(q, r, x, rule.nodes)) == pytest.approx(1.0, abs=1e-12)
