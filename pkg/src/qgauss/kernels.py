"""Transition kernels of q-Gaussian Markov processes.

For |lambda_{s,t}| < 1 the kernel is

    k_{s,t}(x, dy) = p_{lambda_{s,t}}(x / lambda_s, y / lambda_t) nu_q(dy / lambda_t),

where nu_q(dy / lambda) is the image of nu_q under y -> lambda y, i.e. the Lebesgue
density nu_density(y / lambda) / lambda. For lambda_{s,t} = +-1 the kernel is the
deterministic map x -> +-x lambda_t / lambda_s. The case q = -1 has two-state
closed forms (:func:`fermionic_kernel`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .processes import DegenerateMarginalError, LambdaTriple, as_covariance, lambdas
from .qcore import check_q
from .qhermite import (QuadratureRule, edge, gauss_quadrature, mehler_product_angles,
                       nu_density, theta_of)

DEFAULT_POINTS = 200


@dataclass(frozen=True)
class TransitionKernel:
    q: float
    lam: LambdaTriple
    rule: QuadratureRule

    @classmethod
    def from_covariance(cls, q: float, c, s: float, t: float, rule: QuadratureRule | None = None,
                        m: int = DEFAULT_POINTS) -> TransitionKernel:
        q = check_q(q)
        return cls(q, lambdas(c, s, t), rule or gauss_quadrature(q, m))

    @property
    def degenerate(self) -> bool:
        return self.lam.degenerate

    @property
    def source_support(self) -> tuple[float, float]:
        e = edge(self.q) * self.lam.lam_s
        return -e, e

    @property
    def target_support(self) -> tuple[float, float]:
        e = edge(self.q) * self.lam.lam_t
        return -e, e

    def deterministic_image(self, x):
        return self.lam.lam_st * np.asarray(x, dtype=float) * self.lam.lam_t / self.lam.lam_s

    def mehler(self, x_scaled, z_scaled):
        """p_{lambda_st}(x_scaled, z_scaled) on unit-scale coordinates (broadcasting)."""
        return mehler_product_angles(self.q, self.lam.lam_st, theta_of(x_scaled, self.q), theta_of(z_scaled, self.q))

    def density(self, x, y):
        """Lebesgue density of k(x, dy); zero outside the supports."""
        if self.degenerate:
            raise ValueError("lambda_(s,t) = +-1: the kernel is a point mass, use deterministic_image")
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        xs, yt = x / self.lam.lam_s, y / self.lam.lam_t
        e = edge(self.q)
        inside = (np.abs(xs) <= e) & (np.abs(yt) <= e)
        out = np.zeros(x.shape)
        if np.any(inside):
            out[inside] = (self.mehler(xs[inside], yt[inside])
                           * nu_density(self.q, yt[inside]) / self.lam.lam_t)
        return out

    def apply(self, h: Callable, x):
        """(K h)(x) = int h(y) k(x, dy), by the Gauss rule of the target marginal."""
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            return np.asarray(h(self.deterministic_image(x)), dtype=float)
        z = self.rule.nodes
        P = self.mehler(x.reshape(-1, 1) / self.lam.lam_s, z[None, :])
        vals = P @ (self.rule.weights * np.asarray(h(self.lam.lam_t * z), dtype=float))
        return vals.reshape(x.shape)

    def matrix(self) -> np.ndarray:
        """Nystrom matrix on the unit-scale nodes: (K g)(z_i) ~ sum_j M_ij g(z_j), where
        g is a function of y / lambda_t and the result a function of x / lambda_s."""
        z = self.rule.nodes
        if self.degenerate:
            # nodes are exactly symmetric, so z -> -z permutes them
            return np.eye(len(z)) if self.lam.lam_st > 0 else np.eye(len(z))[::-1]
        return self.mehler(z[:, None], z[None, :]) * self.rule.weights[None, :]


def kernel_density(q: float, c, s: float, t: float, x, y):
    return TransitionKernel.from_covariance(q, c, s, t).density(x, y)


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def _in(x, bound: float) -> bool:
    return bool(np.all(np.abs(np.asarray(x)) <= bound * (1 + 1e-12)))


def free_bm_kernel(s: float, t: float, x, y):
    """Free Brownian motion transition density (closed form)."""
    _require(0 < s < t, "free BM kernel needs 0 < s < t")
    _require(_in(x, 2 * math.sqrt(s)) and _in(y, 2 * math.sqrt(t)), "point outside the free BM supports")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    D = (t - s) ** 2 - (t + s) * x * y + x * x * t + y * y * s
    return (t - s) / D * np.sqrt(np.clip(4 * t - y * y, 0, None)) / (2 * math.pi)


def free_ou_kernel(t: float, x, y):
    """Free Ornstein-Uhlenbeck transition density from time 0 to t (closed form)."""
    _require(t > 0, "free OU kernel needs t > 0")
    _require(_in(x, 2) and _in(y, 2), "point outside [-2, 2]")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    D = 4 * math.sinh(t) ** 2 - 2 * x * y * math.cosh(t) + x * x + y * y
    return math.expm1(2 * t) / D * np.sqrt(np.clip(4 - y * y, 0, None)) / (2 * math.pi)


def free_bridge_kernel(s: float, t: float, x, y):
    """Free Brownian bridge transition density (closed form)."""
    _require(0 < s < t < 1, "free bridge kernel needs 0 < s < t < 1")
    _require(_in(x, 2 * math.sqrt(s * (1 - s))) and _in(y, 2 * math.sqrt(t * (1 - t))),
             "point outside the free bridge supports")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    D = (t - s) ** 2 - (s + t - 2 * s * t) * x * y + t * (1 - t) * x * x + s * (1 - s) * y * y
    return ((1 - s) / (1 - t) * (t - s) / D
            * np.sqrt(np.clip(4 * t * (1 - t) - y * y, 0, None)) / (2 * math.pi))


def free_ou_normalization_ratio(t: float, x, y) -> np.ndarray:
    """Pointwise ratio of the free OU closed form to the general q = 0 kernel."""
    general = TransitionKernel.from_covariance(0.0, "ou", 0.0, t).density(x, y)
    return free_ou_kernel(t, x, y) / general


@dataclass(frozen=True)
class FermionicKernel:
    """Two-state transition matrix; rows indexed by source states, columns by target states,
    both ordered (+, -)."""

    source_states: tuple[float, float]
    target_states: tuple[float, float]
    matrix: np.ndarray


def fermionic_kernel(c, s: float, t: float) -> FermionicKernel:
    """q = -1 kernel 1/2 (1 + c(s,t) / (c(s,s) c(t,t)) x y) on the states +-sqrt c."""
    c = as_covariance(c)
    _require(s <= t, "fermionic kernel needs s <= t")
    css, ctt, cst = c(s, s), c(t, t), c(s, t)
    if css <= 0 or ctt <= 0:
        raise DegenerateMarginalError("zero marginal variance")
    xs = (math.sqrt(css), -math.sqrt(css))
    ys = (math.sqrt(ctt), -math.sqrt(ctt))
    P = np.array([[0.5 * (1 + cst / (css * ctt) * x * y) for y in ys] for x in xs])
    if P.min() < -1e-15 or P.max() > 1 + 1e-15:
        raise ValueError(f"covariance is not admissible for q = -1 at ({s}, {t}): {P}")
    return FermionicKernel(xs, ys, P)


def _as_function(h) -> Callable:
    if isinstance(h, (int, np.integer)):
        k = int(h)
        return lambda x: np.asarray(x, dtype=float) ** k
    if callable(h):
        return h
    raise TypeError(f"cannot interpret {h!r} as a function")


def chapman_kolmogorov_residual(q: float, c, s: float, u: float, t: float, x: float,
                                m: int = DEFAULT_POINTS, y=None) -> float:
    """sup_y |int rho_{s,u}(x, z) rho_{u,t}(z, y) dz - rho_{s,t}(x, y)| on a target grid."""
    rule = gauss_quadrature(check_q(q), m)
    K_su = TransitionKernel.from_covariance(q, c, s, u, rule=rule)
    K_ut = TransitionKernel.from_covariance(q, c, u, t, rule=rule)
    K_st = TransitionKernel.from_covariance(q, c, s, t, rule=rule)
    if abs(x) > K_su.source_support[1] * (1 + 1e-12):
        raise ValueError("x outside the support of X_s")
    if y is None:
        lo, hi = K_st.target_support
        y = np.linspace(lo, hi, 43)[1:-1]
    y = np.asarray(y, dtype=float)
    if K_su.degenerate:
        composed = K_ut.density(K_su.deterministic_image(x), y)
    else:
        z = K_su.lam.lam_t * rule.nodes
        w = K_su.mehler(np.full(1, x / K_su.lam.lam_s)[:, None], rule.nodes[None, :])[0] * rule.weights
        composed = w @ K_ut.density(z[:, None], y[None, :])
    return float(np.max(np.abs(composed - K_st.density(x, y))))


def moment_via_kernels(q: float, c, times: Sequence[float], hs: Sequence, m: int = DEFAULT_POINTS) -> float:
    """E[h_1(X_{t_1}) ... h_n(X_{t_n})] for sorted times, by nesting transition operators:
    int (h_1 K_{t1,t2}(h_2 K_{t2,t3}(... h_n)))(x) nu_q(dx / lambda_{t1}).

    ``hs`` entries are exponents (monomials) or callables. Times with zero variance
    contribute the constant factor h(0).
    """
    q = check_q(q)
    c = as_covariance(c)
    times = list(times)
    if list(times) != sorted(times):
        raise ValueError("times must be sorted")
    if len(times) != len(hs):
        raise ValueError("need one function per time")
    fns = [_as_function(h) for h in hs]
    const = 1.0
    live_t, live_h = [], []
    for t, h in zip(times, fns):
        if c(t, t) <= 0:
            const *= float(h(np.zeros(1))[0])
        else:
            live_t.append(t)
            live_h.append(h)
    if not live_t:
        return const
    rule = gauss_quadrature(q, m)
    z = rule.nodes
    lam = [math.sqrt(c(t, t)) for t in live_t]
    g = np.asarray(live_h[-1](lam[-1] * z), dtype=float)
    for k in range(len(live_t) - 2, -1, -1):
        K = TransitionKernel.from_covariance(q, c, live_t[k], live_t[k + 1], rule=rule)
        g = np.asarray(live_h[k](lam[k] * z), dtype=float) * (K.matrix() @ g)
    return const * rule.integrate(g)


def free_ou_generator(h, x, dh: Callable | None = None, d2h: Callable | None = None, m: int = 400):
    """(N h)(x) = x h'(x) - 2 int (h(y) - h(x) - h'(x)(y - x)) / (y - x)^2 nu_0(dy).

    ``h`` is a numpy Polynomial (derivatives taken exactly) or a callable with
    derivative ``dh`` (and optionally ``d2h`` for nodes that coincide with x).
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 2):
        raise ValueError("the generator is evaluated on the open interval (-2, 2)")
    if isinstance(h, Polynomial):
        dh, d2h = h.deriv(1), h.deriv(2)
    elif dh is None:
        raise ValueError("a derivative dh is needed for non-polynomial h")
    rule = gauss_quadrature(0.0, m)
    y = rule.nodes[None, :]
    xx = x.reshape(-1, 1)
    diff = y - xx
    close = np.abs(diff) < 1e-7
    safe = np.where(close, 1.0, diff)
    integrand = (h(y) - h(xx) - dh(xx) * diff) / safe**2
    if np.any(close):
        if d2h is None:
            eps = 1e-4
            curv = (dh(xx + eps) - dh(xx - eps)) / (2 * eps)
        else:
            curv = d2h(xx)
        integrand = np.where(close, 0.5 * np.broadcast_to(curv, integrand.shape), integrand)
    out = x.reshape(-1) * np.asarray(dh(x.reshape(-1)), dtype=float) - 2 * integrand @ rule.weights
    return out.reshape(x.shape)


def alpha(t: float, q: float, grid_density: int = 65, rounds: int = 3, refine: int = 4) -> float:
    """alpha(t, q) = sup over the support square of p_{e^{-t}}(x, y).

    Grid search in the angle variables x = edge cos(phi), y = edge cos(psi), followed by
    ``rounds`` refinements by ``refine`` around the running maximizer.
    """
    q = check_q(q)
    if t <= 0:
        raise ValueError("alpha needs t > 0")
    r = math.exp(-t)
    lo_a, hi_a, lo_b, hi_b = 0.0, math.pi, 0.0, math.pi
    best = -math.inf
    for _ in range(rounds + 1):
        a = np.linspace(lo_a, hi_a, grid_density)
        b = np.linspace(lo_b, hi_b, grid_density)
        P = mehler_product_angles(q, r, a[:, None], b[None, :])
        i, j = np.unravel_index(np.argmax(P), P.shape)
        best = max(best, float(P[i, j]))
        ha, hb = (hi_a - lo_a) / (grid_density - 1), (hi_b - lo_b) / (grid_density - 1)
        span_a, span_b = 2 * ha, 2 * hb
        lo_a, hi_a = max(0.0, a[i] - span_a), min(math.pi, a[i] + span_a)
        lo_b, hi_b = max(0.0, b[j] - span_b), min(math.pi, b[j] + span_b)
        grid_density = max(grid_density, 4 * refine + 1)
    return best


def alpha_free_closed_form(t: float) -> float:
    """q = 0: the maximum of p_r^{(0)} sits at the corners x = y = +-2, (1 + r) / (1 - r)^3."""
    r = math.exp(-t)
    one_minus_r = -math.expm1(-t)
    return (1.0 + r) / one_minus_r**3


def alpha_slope(q: float, tmin: float = 1e-3, tmax: float = 1e-1, n: int = 9) -> tuple[float, np.ndarray, np.ndarray]:
    """Least-squares slope of log alpha^{1/2} against log t."""
    ts = np.geomspace(tmin, tmax, n)
    a = np.array([alpha(t, q) for t in ts])
    slope = np.polyfit(np.log(ts), 0.5 * np.log(a), 1)[0]
    return float(slope), ts, a


def ultracontractivity_gap(t: float, q: float, coeffs, m: int = DEFAULT_POINTS, n_grid: int = 201) -> tuple[float, float]:
    """(sup_x |K_t h(x)|, alpha(t,q)^{1/2} ||h||_2) for the polynomial h with the given
    coefficients, K_t the stationary q-OU transition operator."""
    rule = gauss_quadrature(q, m)
    h = Polynomial(coeffs)
    norm2 = math.sqrt(rule.integrate(h(rule.nodes) ** 2))
    K = TransitionKernel(q, LambdaTriple(1.0, 1.0, math.exp(-t)), rule)
    xs = np.concatenate([edge(q) * np.cos(np.linspace(0, math.pi, n_grid)), rule.nodes])
    sup = float(np.max(np.abs(K.apply(h, xs))))
    return sup, math.sqrt(alpha(t, q)) * norm2
