"""Covariance functions of q-Gaussian processes, the Markov and martingale
criteria, Hilbert-space embeddings and the lambda quantities of the transition kernels."""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

BUILTINS = ("bm", "bridge", "ou")
PSD_TOL = 1e-10


class DegenerateMarginalError(ValueError):
    """Raised when a time has zero marginal variance (c(t, t) = 0)."""


class NotACovarianceError(ValueError):
    pass


def builtin_covariance(kind: str, s: float, t: float) -> float:
    if kind == "bm":
        if s < 0 or t < 0:
            raise ValueError("Brownian motion lives on [0, inf)")
        return float(min(s, t))
    if kind == "bridge":
        if not (0 <= s <= 1 and 0 <= t <= 1):
            raise ValueError("the Brownian bridge lives on [0, 1]")
        s, t = min(s, t), max(s, t)
        return float(s * (1 - t))
    if kind == "ou":
        return float(math.exp(-abs(t - s)))
    raise ValueError(f"unknown covariance kind {kind!r}; expected one of {BUILTINS}")


def fractional_covariance(hurst: float = 0.75) -> Callable[[float, float], float]:
    """Fractional Brownian motion covariance; not Markov unless hurst = 1/2."""
    a = 2 * hurst

    def c(s, t):
        return 0.5 * (abs(s) ** a + abs(t) ** a - abs(t - s) ** a)

    return c


@dataclass(frozen=True)
class CovarianceSpec:
    evaluator: Callable[[float, float], float]
    kind: str = "custom"
    domain: tuple[float, float] = (-math.inf, math.inf)

    @classmethod
    def builtin(cls, kind: str) -> CovarianceSpec:
        domain = {"bm": (0.0, math.inf), "bridge": (0.0, 1.0), "ou": (-math.inf, math.inf)}
        if kind not in domain:
            raise ValueError(f"unknown covariance kind {kind!r}; expected one of {BUILTINS}")
        return cls(lambda s, t: builtin_covariance(kind, s, t), kind, domain[kind])

    @classmethod
    def from_grid(cls, times: Sequence[float], matrix: np.ndarray) -> CovarianceSpec:
        """Covariance known only on a finite grid (e.g. ingested from CSV)."""
        times = [float(t) for t in times]
        matrix = np.asarray(matrix, dtype=float)
        lookup = {t: i for i, t in enumerate(times)}

        def c(s, t):
            try:
                return float(matrix[lookup[float(s)], lookup[float(t)]])
            except KeyError:
                raise ValueError(f"({s}, {t}) is not on the covariance grid") from None

        return cls(c, "custom", (min(times), max(times)))

    def __call__(self, s: float, t: float) -> float:
        lo, hi = self.domain
        for x in (s, t):
            if not lo <= x <= hi:
                raise ValueError(f"time {x} outside the domain [{lo}, {hi}] of {self.kind}")
        return float(self.evaluator(s, t))

    def gram(self, times: Sequence[float]) -> np.ndarray:
        return np.array([[self(s, t) for t in times] for s in times])


def as_covariance(c) -> CovarianceSpec:
    if isinstance(c, CovarianceSpec):
        return c
    if isinstance(c, str):
        return CovarianceSpec.builtin(c)
    if callable(c):
        return CovarianceSpec(c)
    raise TypeError(f"cannot interpret {c!r} as a covariance")


def read_covariance_grid(path) -> CovarianceSpec:
    """Read a sampled covariance from CSV rows ``t_i, t_j, c`` (``#`` comments and an
    optional header allowed). Missing symmetric entries are filled by symmetry."""
    entries = {}
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    for row in rows:
        if len(row) != 3:
            raise ValueError(f"covariance grid rows need 3 fields, got {row}")
        try:
            s, t, v = (float(x) for x in row)
        except ValueError:
            if row is rows[0]:
                continue  # header
            raise ValueError(f"non-numeric covariance grid row {row}") from None
        entries[(s, t)] = v
    if not entries:
        raise ValueError("empty covariance grid")
    times = sorted({s for s, _ in entries} | {t for _, t in entries})
    M = np.full((len(times), len(times)), np.nan)
    idx = {t: i for i, t in enumerate(times)}
    for (s, t), v in entries.items():
        M[idx[s], idx[t]] = v
        if np.isnan(M[idx[t], idx[s]]):
            M[idx[t], idx[s]] = v
    if np.isnan(M).any():
        raise ValueError("covariance grid is incomplete")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12):
        raise ValueError("covariance grid is not symmetric")
    return CovarianceSpec.from_grid(times, M)


@dataclass(frozen=True)
class MarkovCheck:
    ok: bool
    violation: float
    worst: tuple[float, float, float] | None

    def __bool__(self):
        return self.ok


def is_markov(c, grid: Sequence[float], tol: float = 1e-10) -> MarkovCheck:
    """Check c(t,s) c(u,u) = c(t,u) c(u,s) on all triples s <= u <= t of the grid.

    The violation is relative to the larger side (absolute when both vanish).
    Grids with fewer than three times pass vacuously.
    """
    c = as_covariance(c)
    grid = sorted(grid)
    worst, worst_triple = 0.0, None
    for s, u, t in itertools.combinations(grid, 3):
        lhs, rhs = c(t, s) * c(u, u), c(t, u) * c(u, s)
        scale = max(abs(lhs), abs(rhs))
        v = abs(lhs - rhs) / scale if scale > 1e-300 else 0.0
        if v > worst:
            worst, worst_triple = v, (s, u, t)
    return MarkovCheck(worst <= tol, worst, worst_triple)


def is_martingale(c, grid: Sequence[float], tol: float = 1e-12) -> bool:
    """c(s,t) = c(s,s) for all s <= t on the grid."""
    c = as_covariance(c)
    grid = sorted(grid)
    return all(abs(c(s, t) - c(s, s)) <= tol * max(1.0, abs(c(s, s)))
               for s, t in itertools.combinations(grid, 2))


@dataclass(frozen=True)
class LambdaTriple:
    lam_s: float
    lam_t: float
    lam_st: float

    @property
    def degenerate(self) -> bool:
        return abs(self.lam_st) == 1.0


def lambdas(c, s: float, t: float) -> LambdaTriple:
    """lambda_s = sqrt c(s,s), lambda_t = sqrt c(t,t), lambda_{s,t} = c(t,s) / (lambda_s lambda_t)."""
    c = as_covariance(c)
    css, ctt = c(s, s), c(t, t)
    for time, v in ((s, css), (t, ctt)):
        if v <= 0:
            raise DegenerateMarginalError(f"zero marginal variance at t = {time}")
    ls, lt = math.sqrt(css), math.sqrt(ctt)
    lst = c(t, s) / (ls * lt)
    if abs(lst) > 1 + 1e-12:
        raise NotACovarianceError(f"|lambda_(s,t)| = {abs(lst)} > 1 violates Cauchy-Schwarz")
    if abs(lst) > 1 - 1e-12:
        lst = math.copysign(1.0, lst)
    return LambdaTriple(ls, lt, lst)


def embed(c, times: Sequence[float], tol: float = PSD_TOL) -> np.ndarray:
    """Vectors f_t (rows) in R^len(times) with <f_s, f_t> = c(s, t).

    Symmetric eigendecomposition of the grid Gram matrix; eigenvalues in (-tol, 0)
    are set to zero, anything below -tol (relative to the largest) is rejected.
    """
    c = as_covariance(c)
    return embed_gram(c.gram(times), tol)


def embed_gram(M: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if not np.allclose(M, M.T, rtol=0, atol=1e-14 * max(1.0, np.abs(M).max())):
        raise NotACovarianceError("Gram matrix is not symmetric")
    vals, vecs = np.linalg.eigh(M)
    scale = max(1.0, float(np.abs(vals).max())) if len(vals) else 1.0
    if len(vals) and vals.min() < -tol * scale:
        raise NotACovarianceError(f"Gram matrix has eigenvalue {vals.min():.3g} < 0")
    vals = np.clip(vals, 0.0, None)
    # largest eigenvalue first, so a single time maps to (sqrt c, 0, ...)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    F = vecs * np.sqrt(vals)[None, :]
    # sign convention: first nonzero coordinate of each column positive
    for j in range(F.shape[1]):
        col = F[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-15)
        if len(nz) and col[nz[0]] < 0:
            F[:, j] = -col
    return F


def factorize(kind: str) -> tuple[Callable[[float], float], Callable[[float], float]]:
    """(g, f) with c(s, t) = g(s) f(t) for s <= t."""
    if kind == "bm":
        return (lambda s: s), (lambda t: 1.0)
    if kind == "ou":
        return math.exp, (lambda t: math.exp(-t))
    if kind == "bridge":
        return (lambda s: s), (lambda t: 1.0 - t)
    raise ValueError(f"no factorization known for {kind!r}")


def factorization_residual(kind: str, grid: Sequence[float]) -> float:
    c = CovarianceSpec.builtin(kind)
    g, f = factorize(kind)
    return max((abs(g(s) * f(t) - c(s, t)) for s, t in itertools.combinations_with_replacement(sorted(grid), 2)),
               default=0.0)


def martingale_family_residual(kind: str, q: float, n: int, s: float, t: float, rule=None) -> float:
    """sup over source nodes x of |int H_n(y/lambda_t) k_{s,t}(x, dy) - lambda_{s,t}^n H_n(x/lambda_s)|.

    Also checks that lambda_{s,t} equals sqrt((g(s)/f(s)) / (g(t)/f(t))), which turns the
    identity into the martingale property of (g/f)^{n/2} H_n(X_t / lambda_t).
    """
    from .kernels import TransitionKernel
    from .qhermite import gauss_quadrature, hermite

    c = CovarianceSpec.builtin(kind)
    lam = lambdas(c, s, t)
    g, f = factorize(kind)
    ratio = math.sqrt((g(s) / f(s)) / (g(t) / f(t)))
    if abs(ratio - lam.lam_st) > 1e-12:
        raise AssertionError(f"factorization gives lambda_st = {ratio}, covariance gives {lam.lam_st}")
    rule = rule or gauss_quadrature(q, 200)
    K = TransitionKernel.from_covariance(q, c, s, t, rule=rule)
    xs = lam.lam_s * rule.nodes
    lhs = K.apply(lambda y: hermite(n, q, y / lam.lam_t), xs)
    rhs = lam.lam_st**n * hermite(n, q, xs / lam.lam_s)
    return float(np.max(np.abs(lhs - rhs)))
