"""q-Hermite polynomials, the q-Gaussian measure nu_q, Gauss quadrature for nu_q
and the Mehler kernel p_r^{(q)} (series and product forms)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .qcore import check_q, q_factorial, q_int

PRODUCT_TOL = 1e-16


def edge(q: float) -> float:
    """Right end 2/sqrt(1-q) of the support of nu_q."""
    return 2.0 / math.sqrt(1.0 - q)


def hermite(n: int, q: float, x):
    """H_n^{(q)}(x) by forward recurrence x H_k = H_{k+1} + [k]_q H_{k-1}."""
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, x * cur - q_int(k, q) * prev
    return cur


def hermite_normalized_table(K: int, q: float, x, dtype=float) -> np.ndarray:
    """Rows h_0..h_{K-1} of H_n / sqrt([n]_q!) at the points x (stable for large n)."""
    x = np.asarray(x, dtype=dtype)
    out = np.empty((K,) + x.shape, dtype=dtype)
    out[0] = 1.0
    if K > 1:
        out[1] = x
    ql = np.asarray(q, dtype=dtype)
    qn = [np.sqrt((1 - ql**n) / (1 - ql)) for n in range(K + 1)]
    for n in range(1, K - 1):
        out[n + 1] = (x * out[n] - qn[n] * out[n - 1]) / qn[n + 1]
    return out


def theta_of(x, q: float):
    """theta in [0, pi] with x = 2 cos(theta) / sqrt(1-q); argument clamped into [-1, 1]."""
    return np.arccos(np.clip(np.asarray(x, dtype=float) * math.sqrt(1.0 - q) / 2.0, -1.0, 1.0))


def _theta_weight(theta, q: float):
    """prod_{n>=1} (1 - q^n)(1 - 2 q^n cos 2theta + q^2n), truncated at |q|^n < 1e-16."""
    theta = np.asarray(theta, dtype=float)
    out = np.ones_like(theta)
    c2 = np.cos(2.0 * theta)
    qn = q
    while abs(qn) >= PRODUCT_TOL:
        out = out * (1.0 - qn) * (1.0 - 2.0 * qn * c2 + qn * qn)
        qn *= q
    return out


def nu_density(q: float, x):
    """Lebesgue density of nu_q on [-2/sqrt(1-q), 2/sqrt(1-q)]."""
    q = check_q(q)
    x = np.asarray(x, dtype=float)
    e = edge(q)
    if np.any(np.abs(x) > e * (1 + 1e-12)):
        raise ValueError("x outside the support of nu_q")
    theta = theta_of(x, q)
    # sin(theta) from x directly so the edges give an exact zero
    sin_theta = np.sqrt(np.clip(1.0 - (x / e) ** 2, 0.0, None))
    return math.sqrt(1.0 - q) / math.pi * sin_theta * _theta_weight(theta, q)


def nu_theta_density(q: float, theta):
    """Density of nu_q in the angle variable: nu_q(dx) = w(theta) dtheta on [0, pi]."""
    theta = np.asarray(theta, dtype=float)
    return 2.0 / math.pi * np.sin(theta) ** 2 * _theta_weight(theta, q)


@dataclass(frozen=True)
class QuadratureRule:
    q: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def m(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def scaled(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights for the pushforward of nu_q under x -> lam x."""
        return lam * self.nodes, self.weights


@lru_cache(maxsize=64)
def gauss_quadrature(q: float, m: int) -> QuadratureRule:
    """m-point Gauss rule for nu_q from the Jacobi matrix of the q-Hermite recurrence
    (zero diagonal, off-diagonal sqrt([n]_q))."""
    q = check_q(q)
    if m < 1:
        raise ValueError("need at least one node")
    off = np.sqrt([q_int(n, q) for n in range(1, m)])
    nodes, vecs = sla.eigh_tridiagonal(np.zeros(m), off)
    weights = vecs[0] ** 2
    weights = weights / weights.sum()
    # exact symmetry of the measure; removes eigensolver asymmetry at the 1e-16 level
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(q=q, nodes=nodes, weights=weights)


def moment_nu(n: int, q: float, rule: QuadratureRule | None = None) -> float:
    """int x^n d nu_q."""
    rule = rule or gauss_quadrature(q, n // 2 + 2)
    return rule.integrate(rule.nodes**n)


def orthogonality_residual(n: int, m: int, q: float, rule: QuadratureRule) -> float:
    """|int H_n H_m d nu_q - delta_nm [n]_q!| by quadrature."""
    if n + m > 2 * rule.m - 1:
        raise ValueError(f"a {rule.m}-point rule cannot integrate degree {n + m} exactly")
    val = rule.integrate(hermite(n, q, rule.nodes) * hermite(m, q, rule.nodes))
    return abs(val - (q_factorial(n, q) if n == m else 0.0))


@lru_cache(maxsize=32)
def _sup_hermite_bounds(K: int, q: float) -> np.ndarray:
    """Bounds on sup |H_n| / sqrt([n]_q!) over the support, n < K, from
    H_n(2 cos t / sqrt(1-q)) = (1-q)^{-n/2} sum_k [n choose k]_q e^{i(n-2k)t}
    and [n]_q! (1-q)^n = (q; q)_n."""
    out = np.empty(K)
    row = np.ones(1)
    qq = 1.0
    for n in range(K):
        out[n] = np.abs(row).sum() / math.sqrt(qq)
        # Pascal rule [n+1 choose k] = [n choose k-1] + q^k [n choose k]
        nxt = np.ones(n + 2)
        nxt[1:-1] = row[:-1] + q ** np.arange(1, n + 1) * row[1:]
        row = nxt
        qq *= 1.0 - q ** (n + 1)
    return out


@dataclass(frozen=True)
class MehlerEval:
    r: float
    series: float
    product: float
    terms: int
    tail_bound: float


def mehler_series(q: float, r: float, x, y, K: int | None = None, tol: float = 1e-15,
                  return_info: bool = False):
    """Partial sum of sum_n r^n / [n]_q! H_n(x) H_n(y).

    With ``K=None`` the number of terms is chosen so that the bound
    b_n = |r|^n sup|h_n|^2 on the remaining terms drops below ``tol``
    (b_n decays geometrically, asymptotically like |r|^n up to a polynomial factor);
    the returned tail estimate is b_K / (1 - |r|).
    """
    q = check_q(q)
    if not abs(r) < 1.0:
        raise ValueError("the Mehler kernel needs |r| < 1")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if K is None:
        kmax = 256
        while True:
            bounds = abs(r) ** np.arange(kmax) * _sup_hermite_bounds(kmax, q) ** 2 / (1.0 - abs(r))
            hits = np.flatnonzero(bounds < tol)
            if len(hits) or kmax >= 1 << 15:
                break
            kmax *= 2
        K = int(hits[0]) if len(hits) else kmax - 1
        K = max(K, 3)
    tail = abs(r) ** K * _sup_hermite_bounds(K + 1, q)[K] ** 2 / (1.0 - abs(r))
    # extended precision: near antipodal points the terms cancel heavily
    ld = np.longdouble
    hx = hermite_normalized_table(K, q, x.astype(ld), dtype=ld)
    hy = hx if y is x else hermite_normalized_table(K, q, y.astype(ld), dtype=ld)
    powers = ld(r) ** np.arange(K)
    val = np.tensordot(powers, hx * hy, axes=1).astype(float)
    if return_info:
        return val, K, tail
    return val


def _mehler_factor(q: float, r: float, cos_angle):
    """1 / prod_j (1 - 2 r q^j cos a + r^2 q^2j), truncated at |r q^j| < tol."""
    out = np.ones_like(cos_angle)
    rq = r
    while abs(rq) >= PRODUCT_TOL:
        out = out / (1.0 - 2.0 * rq * cos_angle + rq * rq)
        rq *= q
        if q == 0.0:
            break
    return out


def mehler_numerator(q: float, r: float) -> float:
    """(r^2; q)_inf."""
    out, a = 1.0, r * r
    while abs(a) >= PRODUCT_TOL:
        out *= 1.0 - a
        a *= q
        if q == 0.0:
            break
    return out


def mehler_product(q: float, r: float, x, y):
    """p_r(x, y) = (r^2; q)_inf / |(r e^{i(phi+psi)}; q)_inf (r e^{i(phi-psi)}; q)_inf|^2."""
    q = check_q(q)
    if not abs(r) < 1.0:
        raise ValueError("the Mehler kernel needs |r| < 1")
    phi, psi = theta_of(x, q), theta_of(y, q)
    return mehler_numerator(q, r) * _mehler_factor(q, r, np.cos(phi + psi)) * _mehler_factor(q, r, np.cos(phi - psi))


def mehler_product_angles(q: float, r: float, phi, psi):
    """Product form evaluated directly in the angle variables."""
    return mehler_numerator(q, r) * _mehler_factor(q, r, np.cos(phi + psi)) * _mehler_factor(q, r, np.cos(phi - psi))


def mehler_free(r: float, x, y):
    """q = 0 closed form (1-r^2) / ((1-r^2)^2 - r(1+r^2) x y + r^2 (x^2 + y^2))."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return (1 - r * r) / ((1 - r * r) ** 2 - r * (1 + r * r) * x * y + r * r * (x * x + y * y))


def mehler(q: float, r: float, x, y, K: int | None = None) -> MehlerEval:
    s, k, tail = mehler_series(q, r, x, y, K=K, return_info=True)
    return MehlerEval(r=r, series=float(s), product=float(mehler_product(q, r, x, y)), terms=k, tail_bound=tail)
