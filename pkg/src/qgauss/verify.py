"""Invariant suites run by ``qgauss verify``. Each check returns (name, passed, detail)."""
from __future__ import annotations

import itertools
import math
from typing import Callable, Iterator

import numpy as np

from . import fock, kernels, processes, qcore, qhermite, sampler, wick

Check = tuple[str, bool, str]

Q_GRID = (-0.8, -0.3, 0.0, 0.3, 0.8)


def _check(name: str, value: float, tol: float) -> Check:
    return name, bool(value <= tol), f"{value:.3e} <= {tol:.0e}"


def qcore_suite(tol: float) -> Iterator[Check]:
    worst = 0.0
    for q in Q_GRID:
        for n in range(8):
            for k in range(n):
                lhs = qcore.q_binomial(n, k, q) + q ** (k + 1) * qcore.q_binomial(n, k + 1, q)
                rhs = qcore.q_binomial(n + 1, k + 1, q)
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    yield _check("qcore: q-Pascal identity", worst, 1e-12)
    worst = max(abs(sum(q ** qcore.inversions(p) for p in qcore.permutations(n)) - qcore.q_factorial(n, q))
                / qcore.q_factorial(n, q) for q in Q_GRID for n in range(7))
    yield _check("qcore: inversion generating function", worst, 1e-12)


def fock_suite(tol: float, d: int = 2, N: int = 4) -> Iterator[Check]:
    basis = fock.FockBasis(d, N)
    rng = np.random.default_rng(0)
    mins = [min(np.linalg.eigvalsh(G).min() for G in fock.gram_blocks(basis, q)) for q in Q_GRID]
    yield "fock: P_q positivity", min(mins) > 0, f"min eigenvalue {min(mins):.3e}"
    res = max(fock.q_relation_residual(rng.normal(size=d), rng.normal(size=d), basis, q) for q in Q_GRID)
    yield _check("fock: q-commutation relations", res, 1e-12)
    worst = 0.0
    for q in Q_GRID:
        rule = qhermite.gauss_quadrature(q, 8)
        one = fock.FockBasis(1, 10)
        v = one.vector()
        w = fock.omega([1.0], one, q)
        for n in range(1, 11):
            v = w.apply(v)
            worst = max(worst, abs(v[0] - rule.integrate(rule.nodes**n)))
    yield _check("fock: vacuum moments = nu_q moments", worst, 1e-8)


def wick_suite(tol: float) -> Iterator[Check]:
    basis = fock.FockBasis(2, 5)
    e1, e2 = np.eye(2)
    worst = 0.0
    for q in (-0.5, 0.5):
        for word in ([e1, e2, e1], [e1, e1, e2, e2]):
            a = wick.wick_from_splittings(word, basis, q)
            b = wick.wick_recursive(word, basis, q)
            worst = max(worst, fock.restricted_norm(a - b, basis.N - len(word)))
        worst = max(worst, wick.hermite_identity_residual(e1, 4, basis, q))
    yield _check("wick: splittings = recursion = H_n(omega)", worst, 1e-10)


def qhermite_suite(tol: float) -> Iterator[Check]:
    worst = 0.0
    for q in Q_GRID:
        rule = qhermite.gauss_quadrature(q, 12)
        for n, m in itertools.product(range(11), repeat=2):
            worst = max(worst, qhermite.orthogonality_residual(n, m, q, rule) / max(1.0, qcore.q_factorial(n, q)))
    yield _check("qhermite: orthogonality", worst, 1e-8)
    worst = 0.0
    for q in Q_GRID:
        x = np.linspace(-qhermite.edge(q), qhermite.edge(q), 9)
        for r in (-0.5, 0.3, 0.7):
            s = qhermite.mehler_series(q, r, x[:, None], x[None, :])
            p = qhermite.mehler_product(q, r, x[:, None], x[None, :])
            worst = max(worst, float(np.max(np.abs(s - p) / np.maximum(1.0, np.abs(p)))))
    yield _check("qhermite: Mehler series = product", worst, 1e-10)


def processes_suite(tol: float) -> Iterator[Check]:
    grids = {"bm": [0.5, 1, 1.7, 3], "bridge": [0.1, 0.3, 0.6, 0.9], "ou": [-1, 0, 0.4, 2]}
    ok = all(processes.is_markov(k, g) for k, g in grids.items())
    yield "processes: builtins are Markov", ok, ""
    frac = processes.is_markov(processes.fractional_covariance(), [1, 2, 3])
    yield "processes: fractional covariance is not Markov", (not frac) and frac.violation > 1e-2, f"violation {frac.violation:.3e}"


def kernels_suite(tol: float) -> Iterator[Check]:
    worst_norm, worst_eig = 0.0, 0.0
    cases = {"bm": (1.0, 2.0), "ou": (0.0, 0.5), "bridge": (0.3, 0.6)}
    for q in Q_GRID:
        for kind, (s, t) in cases.items():
            K = kernels.TransitionKernel.from_covariance(q, kind, s, t)
            xs = K.lam.lam_s * K.rule.nodes
            worst_norm = max(worst_norm, float(np.max(np.abs(K.apply(np.ones_like, xs) - 1))))
            for n in range(7):
                lhs = K.apply(lambda y: qhermite.hermite(n, q, y / K.lam.lam_t), xs)
                rhs = K.lam.lam_st**n * qhermite.hermite(n, q, xs / K.lam.lam_s)
                worst_eig = max(worst_eig, float(np.max(np.abs(lhs - rhs))))
    yield _check("kernels: normalization", worst_norm, 1e-9)
    yield _check("kernels: Hermite eigen-identity", worst_eig, 1e-7)
    ck = max(kernels.chapman_kolmogorov_residual(0.5, kind, *sut, x=0.3 * math.sqrt(processes.builtin_covariance(kind, sut[0], sut[0])))
             for kind, sut in {"bm": (1, 2, 4), "ou": (0, 0.5, 1.0), "bridge": (0.2, 0.5, 0.7)}.items())
    yield _check("kernels: Chapman-Kolmogorov", ck, 1e-6)
    x = np.linspace(-1.9, 1.9, 15)
    y = np.linspace(-2.8, 2.8, 15)
    X, Y = np.meshgrid(x, y, indexing="ij")
    free = float(np.max(np.abs(kernels.free_bm_kernel(1, 2, X, Y) - kernels.kernel_density(0.0, "bm", 1, 2, X, Y))))
    yield _check("kernels: free BM closed form", free, 1e-10)
    P = kernels.fermionic_kernel("ou", 0.0, 0.4).matrix @ kernels.fermionic_kernel("ou", 0.4, 1.0).matrix
    diff = float(np.max(np.abs(P - kernels.fermionic_kernel("ou", 0.0, 1.0).matrix)))
    yield _check("kernels: fermionic OU composition", diff, 1e-15)


def sampler_suite(tol: float, n_paths: int = 20000, seed: int = 1) -> Iterator[Check]:
    worst_ab, worst_z = 0.0, 0.0
    for kind, times, ks in (("bm", [0.5, 1, 2], [1, 2, 1]), ("ou", [0, 0.5, 1.0], [2, 1, 1])):
        rep = sampler.classical_version_report(kind, 0.5, times, ks, n_paths, seed)
        worst_ab = max(worst_ab, abs(rep.fock_minus_quadrature))
        worst_z = max(worst_z, abs(rep.z_score))
    yield _check("sampler: Fock = kernel quadrature", worst_ab, 1e-6)
    yield _check("sampler: Fock = Monte Carlo (z-score)", worst_z, 4.0)


SUITES: dict[str, Callable[[float], Iterator[Check]]] = {
    "qcore": qcore_suite,
    "fock": fock_suite,
    "wick": wick_suite,
    "qhermite": qhermite_suite,
    "processes": processes_suite,
    "kernels": kernels_suite,
    "sampler": sampler_suite,
}


def run_all(tol: float = 1e-10) -> list[Check]:
    out = []
    for suite in SUITES.values():
        out.extend(suite(tol))
    return out
