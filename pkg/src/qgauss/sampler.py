"""Classical versions of q-Gaussian Markov processes: inverse-CDF sampling of the
marginals and transition kernels, Markov-chain path generation and the three-way
moment comparison (Fock vacuum moment, kernel quadrature, Monte Carlo)."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import fock
from .kernels import TransitionKernel, fermionic_kernel, moment_via_kernels
from .processes import as_covariance, embed, is_markov
from .qcore import check_q
from .qhermite import _mehler_factor, edge, mehler_numerator, mehler_product_angles, nu_theta_density, theta_of

TABLE_POINTS = 2049
FOURIER_SAMPLES = 8192
BLOCK = 4096


class NotMarkovError(ValueError):
    pass


# -- marginal law ------------------------------------------------------------

@lru_cache(maxsize=32)
def _theta_cosine_coefficients(q: float) -> np.ndarray:
    """a_k with nu_q(dx) = (a_0 + sum_k a_k cos 2k theta) dtheta on [0, pi]."""
    theta = np.arange(FOURIER_SAMPLES) * math.pi / FOURIER_SAMPLES
    w = nu_theta_density(q, theta)
    coef = np.fft.rfft(w).real / FOURIER_SAMPLES
    coef[1:] *= 2.0
    keep = np.flatnonzero(np.abs(coef) > 1e-15)
    return coef[: keep[-1] + 1]


def marginal_cdf(q: float, lam: float, x):
    """CDF of the image of nu_q under x -> lam x, exact up to Fourier truncation."""
    q = check_q(q)
    theta = theta_of(np.asarray(x, dtype=float) / lam, q)
    a = _theta_cosine_coefficients(q)
    k = np.arange(1, len(a))
    # int_theta^pi (a_0 + sum a_k cos 2k t) dt
    flat = theta.reshape(-1)
    tail = np.zeros_like(flat)
    for start in range(0, len(flat), 2048):
        chunk = flat[start:start + 2048]
        tail[start:start + 2048] = np.sin(2 * np.multiply.outer(chunk, k)) @ (a[1:] / (2 * k))
    return np.clip(a[0] * (math.pi - theta) - tail.reshape(theta.shape), 0.0, 1.0)


@dataclass(frozen=True)
class InverseCdfTable:
    """Tabulated CDF of nu_q on a grid that is uniform in the angle variable."""

    q: float
    x: np.ndarray
    cdf: np.ndarray
    interpolant: PchipInterpolator = field(repr=False)

    def sample(self, u, lam: float = 1.0) -> np.ndarray:
        theta = self.interpolant(np.asarray(u, dtype=float))
        return lam * edge(self.q) * np.cos(theta)


@lru_cache(maxsize=32)
def inverse_cdf_table(q: float, points: int = TABLE_POINTS) -> InverseCdfTable:
    """CDF of nu_q on an angle-uniform grid; each cell is integrated by 8-point
    Gauss-Legendre so increments stay positive where the density is tiny."""
    q = check_q(q)
    theta = np.linspace(math.pi, 0.0, points)
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    lo, hi = theta[1:], theta[:-1]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    cells = (nu_theta_density(q, mid[:, None] + half[:, None] * gl_x[None, :]) @ gl_w) * half
    cdf = np.concatenate([[0.0], np.cumsum(cells)])
    if abs(cdf[-1] - 1.0) > 1e-12:
        raise RuntimeError(f"nu_q table integrates to {cdf[-1]!r}")
    cdf /= cdf[-1]
    if np.any(np.diff(cdf) < 0):
        raise RuntimeError("tabulated CDF is decreasing")
    x = edge(q) * np.cos(theta)
    # near the edges the density can fall below double resolution of the CDF (q close
    # to 1); those grid points carry no representable mass and are left out of the inverse
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return InverseCdfTable(q, x, cdf, PchipInterpolator(cdf[keep], theta[keep]))


def sample_marginal(q: float, lam: float, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws from nu_q(dx / lam) by inverse CDF."""
    if lam <= 0:
        raise ValueError("need lam > 0")
    u = np.random.default_rng(seed).random(n)
    return inverse_cdf_table(check_q(q)).sample(u, lam)


# -- transitions -------------------------------------------------------------

def _conditional_cdf_rows(q: float, r: float, phi) -> np.ndarray:
    """CDF rows over the angle grid psi_k (ascending psi) of the unit-scale conditional law
    p_r(x, y) nu_q(dy) for source angles phi (trapezoid rule, normalized)."""
    psi = np.linspace(0.0, math.pi, TABLE_POINTS)
    dens = mehler_product_angles(q, r, np.asarray(phi)[..., None], psi) * nu_theta_density(q, psi)
    cum = np.concatenate([np.zeros(dens.shape[:-1] + (1,)),
                          np.cumsum(0.5 * (dens[..., 1:] + dens[..., :-1]), axis=-1)], axis=-1)
    return cum / cum[..., -1:]


@lru_cache(maxsize=4)
def _transition_table(q: float, r: float) -> np.ndarray:
    """CDF rows for every source angle on the uniform angle grid.

    On a uniform grid phi_i +- psi_k are again grid multiples, so the Mehler product
    factorizes into two lookups of a one-dimensional table.
    """
    G = TABLE_POINTS
    h = math.pi / (G - 1)
    g = _mehler_factor(q, r, np.cos(h * np.arange(2 * G - 1)))
    i = np.arange(G)
    P = mehler_numerator(q, r) * g[i[:, None] + i[None, :]] * g[np.abs(i[:, None] - i[None, :])]
    dens = P * nu_theta_density(q, h * i)[None, :]
    cum = np.zeros((G, G))
    np.cumsum(0.5 * (dens[:, 1:] + dens[:, :-1]), axis=1, out=cum[:, 1:])
    cum /= cum[:, -1:]
    cum.setflags(write=False)
    return cum


def _invert_rows(table: np.ndarray, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Angle psi with table[row](psi) = u, linear within grid cells."""
    G = table.shape[1]
    h = math.pi / (G - 1)
    # rows are shifted by 2*row so one sorted search serves all of them
    flat = (table + 2.0 * np.arange(table.shape[0])[:, None]).ravel()
    idx = np.searchsorted(flat, u + 2.0 * rows, side="right") - 1
    k = np.clip(idx - rows * G, 0, G - 2)
    lo, hi = table[rows, k], table[rows, k + 1]
    frac = np.clip((u - lo) / np.where(hi > lo, hi - lo, 1.0), 0.0, 1.0)
    return h * (k + frac)


def sample_transition(x: float, kernel: TransitionKernel, n: int, seed: int) -> np.ndarray:
    """n draws from k(x, dy), by inverse CDF on the conditional density tabulated at x."""
    lo, hi = kernel.source_support
    if not lo * (1 + 1e-12) <= x <= hi * (1 + 1e-12):
        raise ValueError(f"x = {x} outside the source support [{lo}, {hi}]")
    if kernel.degenerate:
        return np.full(n, float(kernel.deterministic_image(x)))
    q, lam = kernel.q, kernel.lam
    row = _conditional_cdf_rows(q, lam.lam_st, theta_of(x / lam.lam_s, q))[None, :]
    u = np.random.default_rng(seed).random(n)
    psi = _invert_rows(row, np.zeros(n, dtype=np.int64), u)
    return lam.lam_t * edge(q) * np.cos(psi)


def _step(q: float, r: float, lam_s: float, lam_t: float, x: np.ndarray, u_row: np.ndarray,
          u: np.ndarray) -> np.ndarray:
    """Vectorized transition for many paths. The source angle is bracketed by two grid
    rows and one of them is chosen with its linear-interpolation weight, i.e. the
    conditional law is interpolated linearly in the source angle."""
    table = _transition_table(q, r)
    G = TABLE_POINTS
    h = math.pi / (G - 1)
    pos = theta_of(x / lam_s, q) / h
    base = np.clip(np.floor(pos).astype(np.int64), 0, G - 2)
    rows = base + (u_row < pos - base)
    psi = _invert_rows(table, rows, u)
    return lam_t * edge(q) * np.cos(psi)


def _uniforms(seed: int, n_paths: int, n_draws: int) -> np.ndarray:
    """Per-path uniforms; path p reads from the stream of block p // BLOCK, so a path's
    draws depend only on (seed, p) and blocks can be generated independently."""
    out = np.empty((n_paths, n_draws))
    for b, start in enumerate(range(0, n_paths, BLOCK)):
        stop = min(start + BLOCK, n_paths)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        out[start:stop] = rng.random((stop - start, n_draws))
    return out


# -- paths -------------------------------------------------------------------

@dataclass
class PathEnsemble:
    times: np.ndarray
    paths: np.ndarray
    seed: int
    kind: str
    q: float

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    def moment(self, exponents: Sequence[int]) -> tuple[float, float]:
        """Empirical E[prod_i X_{t_i}^{k_i}] and its standard error."""
        if len(exponents) != len(self.times):
            raise ValueError("need one exponent per time")
        if self.n_paths == 0:
            return math.nan, math.nan
        z = np.prod(self.paths ** np.asarray(exponents)[None, :], axis=1)
        se = z.std(ddof=1) / math.sqrt(len(z)) if len(z) > 1 else math.nan
        return float(z.mean()), float(se)

    def to_csv(self, path_or_file) -> None:
        """Write the ensemble; accepts a path or an open text file."""
        if hasattr(path_or_file, "write"):
            self._write_csv(path_or_file)
            return
        with open(path_or_file, "w", newline="") as fh:
            self._write_csv(fh)

    def _write_csv(self, fh) -> None:
        fh.write(f"# qgauss paths v1 kind={self.kind} q={self.q} seed={self.seed} "
                 f"times={','.join(repr(float(t)) for t in self.times)}\n")
        w = csv.writer(fh)
        w.writerow([f"t_{i}" for i in range(len(self.times))])
        for row in self.paths:
            w.writerow([repr(float(v)) for v in row])


def sample_paths(c, q: float, times: Sequence[float], n_paths: int, seed: int,
                 prepend_origin: bool = False) -> PathEnsemble:
    """Sample the classical version as a Markov chain: marginal at the first time with
    positive variance, then successive transition kernels.

    Times with zero variance (Brownian motion at 0, the bridge at 0 and 1) are the
    constant 0. ``prepend_origin`` adds time 0 with value 0 in front.
    """
    q = check_q(q)
    cov = as_covariance(c)
    times = [float(t) for t in times]
    if prepend_origin and (not times or times[0] != 0.0):
        times = [0.0] + times
    if times != sorted(times):
        raise ValueError("times must be sorted")
    var = [cov(t, t) for t in times]
    live = [i for i, v in enumerate(var) if v > 0]
    if len(live) >= 3:
        check = is_markov(cov, [times[i] for i in live], tol=1e-9)
        if not check:
            raise NotMarkovError(
                f"covariance is not Markov on these times (violation {check.violation:.3g} at {check.worst}); "
                "use kernels.moment_via_kernels or fock.moment for moments of non-Markov processes")
    paths = np.zeros((n_paths, len(times)))
    if n_paths and live:
        U = _uniforms(seed, n_paths, 1 + 2 * (len(live) - 1))
        first = live[0]
        lam = [math.sqrt(v) if v > 0 else 0.0 for v in var]
        paths[:, first] = inverse_cdf_table(q).sample(U[:, 0], lam[first])
        col = 1
        for a, b in zip(live[:-1], live[1:]):
            K = TransitionKernel.from_covariance(q, cov, times[a], times[b], m=2)
            if K.degenerate:
                paths[:, b] = K.deterministic_image(paths[:, a])
            else:
                paths[:, b] = _step(q, K.lam.lam_st, K.lam.lam_s, K.lam.lam_t, paths[:, a],
                                    U[:, col], U[:, col + 1])
            col += 2
    return PathEnsemble(np.array(times), paths, seed, cov.kind, q)


def sample_fermionic_paths(c, times: Sequence[float], n_paths: int, seed: int) -> PathEnsemble:
    """Two-state chain for q = -1: uniform start on +-sqrt c(t1, t1), then the
    fermionic transition tables."""
    cov = as_covariance(c)
    times = [float(t) for t in times]
    U = _uniforms(seed, n_paths, len(times))
    paths = np.empty((n_paths, len(times)))
    sign = np.where(U[:, 0] < 0.5, 1.0, -1.0)
    paths[:, 0] = sign * math.sqrt(cov(times[0], times[0]))
    for j in range(1, len(times)):
        K = fermionic_kernel(cov, times[j - 1], times[j])
        p_plus = np.where(sign > 0, K.matrix[0, 0], K.matrix[1, 0])
        sign = np.where(U[:, j] < p_plus, 1.0, -1.0)
        paths[:, j] = sign * K.target_states[0]
    return PathEnsemble(np.array(times), paths, seed, cov.kind, -1.0)


# -- three-way comparison ----------------------------------------------------

def fock_time_ordered_moment(c, q: float, times: Sequence[float], exponents: Sequence[int]) -> float:
    """E[omega(f_t1)^k1 ... omega(f_tn)^kn] with f_t embedding the covariance."""
    F = embed(c, times)
    F = F[:, np.linalg.norm(F, axis=0) > 1e-12]
    fs = [f for f, k in zip(F, exponents) for _ in range(k)]
    if not fs:
        return 1.0
    basis = fock.FockBasis(max(F.shape[1], 1), len(fs))
    return fock.moment(fs, basis, q)


@dataclass
class MomentReport:
    kind: str
    q: float
    times: list[float]
    exponents: list[int]
    fock: float
    quadrature: float
    mc: float
    mc_stderr: float
    n_paths: int
    seed: int

    @property
    def fock_minus_quadrature(self) -> float:
        return self.fock - self.quadrature

    @property
    def fock_minus_mc(self) -> float:
        return self.fock - self.mc

    @property
    def z_score(self) -> float:
        return self.fock_minus_mc / self.mc_stderr if self.mc_stderr > 0 else math.inf * self.fock_minus_mc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fock_minus_quadrature"] = self.fock_minus_quadrature
        d["fock_minus_mc"] = self.fock_minus_mc
        d["z_score"] = self.z_score
        # strict JSON has no NaN or inf
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def classical_version_report(kind, q: float, times: Sequence[float], exponents: Sequence[int],
                             n_paths: int, seed: int, ensemble: PathEnsemble | None = None,
                             m: int = 200) -> MomentReport:
    """E[X_t1^k1 ... X_tn^kn] three ways: exact Fock vacuum moment, nested kernel
    quadrature, and the empirical mean over sampled paths."""
    cov = as_covariance(kind)
    times = [float(t) for t in times]
    a = fock_time_ordered_moment(cov, q, times, exponents)
    b = moment_via_kernels(q, cov, times, list(exponents), m=m)
    if ensemble is None or list(ensemble.times) != times:
        ensemble = sample_paths(cov, q, times, n_paths, seed)
    mc, se = ensemble.moment(exponents)
    return MomentReport(cov.kind, q, times, list(exponents), a, b, mc, se, ensemble.n_paths, ensemble.seed)
