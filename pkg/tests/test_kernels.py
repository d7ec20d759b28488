import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import Polynomial

from conftest import KERNEL_GRID
from qgauss import kernels, processes, qhermite


def test_degenerate_branch():
    K = kernels.TransitionKernel.from_covariance(0.4, "bm", 1.5, 1.5)
    assert K.degenerate
    assert K.deterministic_image(0.8) == pytest.approx(0.8)
    assert np.allclose(K.matrix(), np.eye(K.rule.m))
    with pytest.raises(ValueError):
        K.density(0.1, 0.1)


def test_free_bm_plug_in_and_symmetry():
    assert kernels.free_bm_kernel(1, 2, 0.0, 0.0) == pytest.approx(math.sqrt(8) / (2 * math.pi))
    assert kernels.kernel_density(0.0, "bm", 1, 2, 0.0, 0.0) == pytest.approx(math.sqrt(8) / (2 * math.pi))
    x, y = np.meshgrid(np.linspace(-1.9, 1.9, 9), np.linspace(-2.7, 2.7, 9))
    for q in (-0.5, 0.0, 0.5):
        a = kernels.kernel_density(q, "bm", 1, 2, x * qhermite.edge(q) / 2, y * qhermite.edge(q) / 2)
        b = kernels.kernel_density(q, "bm", 1, 2, -x * qhermite.edge(q) / 2, -y * qhermite.edge(q) / 2)
        assert np.allclose(a, b, atol=1e-14)


def test_free_closed_form_domains():
    with pytest.raises(ValueError):
        kernels.free_bm_kernel(2, 1, 0.0, 0.0)
    with pytest.raises(ValueError):
        kernels.free_bridge_kernel(0.5, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        kernels.free_ou_kernel(-1.0, 0.0, 0.0)


def test_free_bridge_edges_vanish():
    s, t = 0.3, 0.6
    e = 2 * math.sqrt(t * (1 - t))
    assert kernels.free_bridge_kernel(s, t, 0.2, np.array([-e, e])).tolist() == pytest.approx([0.0, 0.0], abs=1e-12)


def test_ou_long_time_limit():
    y = np.linspace(-1.9, 1.9, 7)
    for q in (-0.3, 0.4):
        dens = kernels.kernel_density(q, "ou", 0.0, 40.0, 0.5, y * qhermite.edge(q) / 2)
        assert np.allclose(dens, qhermite.nu_density(q, y * qhermite.edge(q) / 2), atol=1e-12)


def test_out_of_support_is_zero():
    K = kernels.TransitionKernel.from_covariance(0.2, "bm", 1, 2)
    assert K.density(0.0, 10.0) == 0.0


def test_apply_constant_and_eigen():
    for q in KERNEL_GRID:
        K = kernels.TransitionKernel.from_covariance(q, "bridge", 0.2, 0.7)
        x = np.linspace(*K.source_support, 11)
        assert np.allclose(K.apply(np.ones_like, x), 1.0, atol=1e-12)
        for n in range(5):
            lhs = K.apply(lambda y: qhermite.hermite(n, q, y / K.lam.lam_t), x)
            assert np.allclose(lhs, K.lam.lam_st**n * qhermite.hermite(n, q, x / K.lam.lam_s), atol=1e-9)


def test_bm_martingale_mean():
    K = kernels.TransitionKernel.from_covariance(0.5, "bm", 1, 3)
    x = np.linspace(-2.5, 2.5, 7)
    assert np.allclose(K.apply(lambda y: y, x), x, atol=1e-12)


def test_feller_continuity_refinement():
    K = kernels.TransitionKernel.from_covariance(0.3, "ou", 0.0, 0.5)
    e = K.target_support[1]
    h = lambda y: np.cos(np.pi * y / (2 * e))
    jumps = []
    for n in (51, 201, 801):
        vals = K.apply(h, np.linspace(*K.source_support, n))
        jumps.append(np.max(np.abs(np.diff(vals))))
    assert jumps[0] > jumps[1] > jumps[2]
    # jump size shrinks linearly with the grid step
    assert jumps[2] < 0.3 * jumps[1]


def test_matrix_is_stochastic():
    K = kernels.TransitionKernel.from_covariance(-0.4, "ou", 0.0, 0.3)
    M = K.matrix()
    assert np.allclose(M.sum(axis=1), 1.0, atol=1e-12)


def test_chapman_kolmogorov():
    assert kernels.chapman_kolmogorov_residual(0.5, "bm", 1, 2, 4, 0.0) <= 1e-6
    frac = processes.fractional_covariance(0.75)
    assert kernels.chapman_kolmogorov_residual(0.5, frac, 1, 2, 3, 0.0) > 1e-3
    with pytest.raises(ValueError):
        kernels.chapman_kolmogorov_residual(0.5, "bm", 1, 2, 4, 5.0)


def test_moment_via_kernels():
    assert kernels.moment_via_kernels(0.3, "bm", [2.0], [2]) == pytest.approx(2.0, abs=1e-12)
    assert kernels.moment_via_kernels(0.3, "bm", [1.0, 2.5], [1, 1]) == pytest.approx(1.0, abs=1e-12)
    assert kernels.moment_via_kernels(0.3, "bm", [0.0, 1.0], [3, 2]) == pytest.approx(0.0, abs=1e-14)
    assert kernels.moment_via_kernels(-0.2, "ou", [0.0], [4]) == pytest.approx(1.8, abs=1e-12)


def test_free_ou_generator():
    x = np.linspace(-1.8, 1.8, 13)
    assert np.allclose(kernels.free_ou_generator(Polynomial([1.0]), x), 0.0, atol=1e-10)
    assert np.allclose(kernels.free_ou_generator(Polynomial([0.0, 1.0]), x), x, atol=1e-8)
    H2 = Polynomial([-1.0, 0.0, 1.0])
    assert np.allclose(kernels.free_ou_generator(H2, x), 2 * H2(x), atol=1e-6)


def test_fermionic_kernel():
    K = kernels.fermionic_kernel("bm", 1.0, 4.0)
    assert K.source_states == (1.0, -1.0) and K.target_states == (2.0, -2.0)
    assert np.allclose(K.matrix, [[0.75, 0.25], [0.25, 0.75]], atol=1e-16)
    for kind, (s, t) in (("ou", (0.0, 1.3)), ("bridge", (0.1, 0.8))):
        M = kernels.fermionic_kernel(kind, s, t).matrix
        assert np.all(M.sum(axis=1) == 1.0)
    with pytest.raises(ValueError):
        kernels.fermionic_kernel(lambda s, t: 1.0 if s == t else -2.0, 0.0, 1.0)


def test_alpha():
    for t in (1e-2, 0.3, 2.0):
        assert kernels.alpha(t, 0.0) == pytest.approx(kernels.alpha_free_closed_form(t), rel=1e-10)
    assert kernels.alpha(30.0, 0.5) == pytest.approx(1.0, abs=1e-10)
    assert kernels.alpha(1e-3, 0.0) == pytest.approx((2 + 2e-3) / 1e-9, rel=1e-5)
    slope, ts, a = kernels.alpha_slope(0.0, 1e-3, 1e-1)
    assert -1.7 <= slope <= -1.3 and len(ts) == len(a) == 9


def test_alpha_slope_strong_q_is_preasymptotic():
    # near q = 1 the t^{-3/2} regime sets in later: steeper on [1e-3, 1e-1], -3/2 at smaller t
    steep = kernels.alpha_slope(0.9, 1e-3, 1e-1)[0]
    deep = kernels.alpha_slope(0.9, 1e-6, 1e-4)[0]
    assert steep < -1.7
    assert deep == pytest.approx(-1.5, abs=0.02)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(KERNEL_GRID), st.floats(0.05, 3.0), st.lists(st.floats(-2, 2), min_size=1, max_size=6))
def test_ultracontractivity_bound(q, t, coeffs):
    sup, bound = kernels.ultracontractivity_gap(t, q, coeffs)
    assert sup <= bound + 1e-8
