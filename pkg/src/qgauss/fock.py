"""Truncated q-Fock space over R^d and the operators living on it.

Basis words are tuples of letters ``0..d-1`` (letter ``i`` stands for the
orthonormal one-particle vector ``e_{i+1}``). Words are ordered by degree and
then lexicographically, so the index of a word of degree ``n`` is
``offset[n] + (w read as a base-d number)``; this ordering agrees with
``np.kron`` so tensor powers can be assembled blockwise.

Matrices are stored with respect to the word basis, which is orthonormal for
the free (q = 0) inner product. The q-inner product enters only through the
Gram matrix ``G`` with ``<xi, eta>_q = xi^T G eta``.

Truncation convention: creation operators annihilate words of the top degree
``N``. Relations that involve a creation operator therefore hold on the
subspace of degree ``<= N - 1``; vacuum moments of at most ``N`` field
operators are exact.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .qcore import check_q, inversions, permutations

MAX_BASIS_SIZE = 2_000_000
MAX_D = 4
MAX_N = 10


@dataclass(frozen=True)
class FockBasis:
    """Graded word basis of the degree <= N part of the full Fock space over R^d."""

    d: int
    N: int
    max_d: int = field(default=MAX_D, compare=False, repr=False)
    max_N: int = field(default=MAX_N, compare=False, repr=False)

    def __post_init__(self):
        if self.d < 1 or self.N < 0:
            raise ValueError("need d >= 1 and N >= 0")
        # a single mode has only N + 1 basis words, so the degree cap is waived there
        if self.d > self.max_d or (self.d > 1 and self.N > self.max_N):
            raise ValueError(f"(d, N) = ({self.d}, {self.N}) exceeds the caps d <= {self.max_d}, N <= {self.max_N}")
        if self.size > MAX_BASIS_SIZE:
            raise ValueError(f"basis size {self.size} exceeds the guardrail {MAX_BASIS_SIZE}")

    @property
    def size(self) -> int:
        return sum(self.d**n for n in range(self.N + 1))

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out = [0]
        for n in range(self.N + 1):
            out.append(out[-1] + self.d**n)
        return tuple(out)

    def block(self, n: int) -> slice:
        return slice(self.offsets[n], self.offsets[n + 1])

    def digits(self, n: int) -> np.ndarray:
        """Array of shape (d**n, n) holding the letters of every degree-n word in order."""
        if n == 0:
            return np.zeros((1, 0), dtype=np.int64)
        idx = np.arange(self.d**n)
        powers = self.d ** np.arange(n - 1, -1, -1)
        return (idx[:, None] // powers[None, :]) % self.d

    @cached_property
    def words(self) -> list[tuple[int, ...]]:
        out = []
        for n in range(self.N + 1):
            out.extend(tuple(int(c) for c in row) for row in self.digits(n))
        return out

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.concatenate([np.full(self.d**n, n) for n in range(self.N + 1)])

    def index(self, word: Sequence[int]) -> int:
        n = len(word)
        if n > self.N:
            raise ValueError(f"word of degree {n} exceeds the truncation N = {self.N}")
        k = 0
        for letter in word:
            if not 0 <= letter < self.d:
                raise ValueError(f"letter {letter} outside 0..{self.d - 1}")
            k = k * self.d + int(letter)
        return self.offsets[n] + k

    def vector(self, word: Sequence[int] = ()) -> np.ndarray:
        """Coefficient vector of a single basis word (the vacuum by default)."""
        v = np.zeros(self.size)
        v[self.index(word)] = 1.0
        return v

    def tensor_power(self, f, n: int) -> np.ndarray:
        """Coefficient vector of f^{(x) n}."""
        f = self.one_particle(f)
        block = np.ones(1)
        for _ in range(n):
            block = np.kron(block, f)
        v = np.zeros(self.size)
        v[self.block(n)] = block
        return v

    def tensor_word(self, fs) -> np.ndarray:
        """Coefficient vector of f_1 (x) ... (x) f_n for one-particle vectors f_i."""
        block = np.ones(1)
        for f in fs:
            block = np.kron(block, self.one_particle(f))
        v = np.zeros(self.size)
        v[self.block(len(fs))] = block
        return v

    def one_particle(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float).reshape(-1)
        if f.shape != (self.d,):
            raise ValueError(f"one-particle vector must have length d = {self.d}, got {f.shape}")
        return f

    def restriction(self, max_degree: int) -> np.ndarray:
        """Boolean mask of basis words with degree <= max_degree."""
        return self.degrees <= max_degree


@dataclass(frozen=True, eq=False)
class FockOperator:
    """A matrix on the word basis, tagged with the (basis, q) it was built for.

    ``domain`` differs from ``basis`` only for maps between two Fock spaces
    (see :func:`fock_map`).
    """

    matrix: sp.csr_matrix | np.ndarray
    basis: FockBasis
    q: float
    domain: FockBasis | None = None

    def __post_init__(self):
        dom = self.domain or self.basis
        if self.matrix.shape != (self.basis.size, dom.size):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match basis sizes")

    def _wrap(self, m) -> FockOperator:
        return FockOperator(m, self.basis, self.q, self.domain)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.matrix @ other.matrix, self.basis, self.q, other.domain)
        return self.matrix @ other

    def __add__(self, other: FockOperator) -> FockOperator:
        return self._wrap(self.matrix + other.matrix)

    def __sub__(self, other: FockOperator) -> FockOperator:
        return self._wrap(self.matrix - other.matrix)

    def __mul__(self, scalar: float) -> FockOperator:
        return self._wrap(self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> FockOperator:
        return self._wrap(-self.matrix)

    def __pow__(self, k: int) -> FockOperator:
        out = identity(self.basis, self.q)
        for _ in range(k):
            out = self @ out
        return out

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix @ v)

    def adjoint(self) -> FockOperator:
        """Adjoint with respect to <.,.>_q, i.e. G^{-1} X^T G."""
        G = gram(self.basis, self.q).toarray()
        X = self.toarray()
        return self._wrap(sla.solve(G, X.T @ G, assume_a="pos"))


def identity(basis: FockBasis, q: float) -> FockOperator:
    return FockOperator(sp.identity(basis.size, format="csr"), basis, q)


def _drop_position(digits: np.ndarray, k: int, d: int) -> np.ndarray:
    """Within-degree indices of the words obtained by deleting letter k."""
    rest = np.delete(digits, k, axis=1)
    if rest.shape[1] == 0:
        return np.zeros(len(digits), dtype=np.int64)
    powers = d ** np.arange(rest.shape[1] - 1, -1, -1)
    return rest @ powers


def creation(f, basis: FockBasis, q: float) -> FockOperator:
    """a*(f): w -> f (x) w, killing words of degree N."""
    q = check_q(q)
    f = basis.one_particle(f)
    d = basis.d
    rows, cols, vals = [], [], []
    for n in range(basis.N):
        size = d**n
        src = basis.offsets[n] + np.arange(size)
        for i in np.flatnonzero(f):
            rows.append(basis.offsets[n + 1] + i * size + np.arange(size))
            cols.append(src)
            vals.append(np.full(size, f[i]))
    return _assemble(rows, cols, vals, basis, q)


def annihilation(f, basis: FockBasis, q: float) -> FockOperator:
    """a(f): f_1 (x) ... (x) f_n -> sum_k q^(k-1) <f, f_k> f_1 .. (f_k deleted) .. f_n."""
    q = check_q(q)
    f = basis.one_particle(f)
    rows, cols, vals = [], [], []
    for n in range(1, basis.N + 1):
        digits = basis.digits(n)
        src = basis.offsets[n] + np.arange(len(digits))
        for k in range(n):
            weight = q**k * f[digits[:, k]]
            keep = weight != 0.0
            rows.append(basis.offsets[n - 1] + _drop_position(digits, k, basis.d)[keep])
            cols.append(src[keep])
            vals.append(weight[keep])
    return _assemble(rows, cols, vals, basis, q)


def _assemble(rows, cols, vals, basis, q) -> FockOperator:
    if rows:
        r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c = np.zeros(0, dtype=np.int64)
        v = np.zeros(0)
    m = sp.csr_matrix((v, (r, c)), shape=(basis.size, basis.size))
    m.sum_duplicates()
    return FockOperator(m, basis, q)


def omega(f, basis: FockBasis, q: float) -> FockOperator:
    """Field operator omega(f) = a(f) + a*(f)."""
    return annihilation(f, basis, q) + creation(f, basis, q)


def _letter(i: int, d: int) -> np.ndarray:
    e = np.zeros(d)
    e[i] = 1.0
    return e


_GRAM_CACHE: dict[tuple[int, int, float], tuple[np.ndarray, ...]] = {}


def gram_blocks(basis: FockBasis, q: float) -> tuple[np.ndarray, ...]:
    """Degree blocks of the Gram matrix of <.,.>_q, built recursively.

    Uses <e_i (x) xi, eta>_q = <xi, a(e_i) eta>_q: the rows of block n that
    start with letter i are the rows of ``G_{n-1} @ a(e_i)|_{n -> n-1}``.
    """
    q = check_q(q)
    key = (basis.d, basis.N, q)
    if key in _GRAM_CACHE:
        return _GRAM_CACHE[key]
    d = basis.d
    # block n depends only on (d, n, q); reuse a cached larger truncation when present
    for (dd, NN, qq), blocks in _GRAM_CACHE.items():
        if dd == d and qq == q and NN >= basis.N:
            return blocks[: basis.N + 1]
    ann = [annihilation(_letter(i, d), basis, q).matrix.tocsr() for i in range(d)]
    blocks = [np.ones((1, 1))]
    for n in range(1, basis.N + 1):
        prev = blocks[-1]
        rows_n, cols_n = basis.block(n - 1), basis.block(n)
        parts = [(ann[i][rows_n, cols_n].T @ prev.T).T for i in range(d)]
        blocks.append(np.vstack(parts))
    out = tuple(blocks)
    _GRAM_CACHE[key] = out
    return out


def gram(basis: FockBasis, q: float) -> FockOperator:
    """Gram matrix G of the q-inner product on the word basis (block diagonal by degree)."""
    return FockOperator(sp.block_diag(gram_blocks(basis, q), format="csr"), basis, q)


def gram_permutation_sum(basis: FockBasis, n: int, q: float) -> np.ndarray:
    """Degree-n Gram block from the defining sum over S_n (reference implementation)."""
    check_q(q)
    digits = basis.digits(n)
    G = np.zeros((len(digits), len(digits)))
    for perm in permutations(n):
        idx = np.array(perm, dtype=np.int64) - 1
        weight = q ** inversions(perm)
        # prod_k delta(w_k, v_{pi(k)})
        G += weight * np.all(digits[:, None, :] == digits[None, :, idx], axis=2)
    return G


def vacuum_expectation(X: FockOperator) -> float:
    """<Omega, X Omega>_q; the vacuum has unit q-norm and is q-orthogonal to higher degrees."""
    return float(X.matrix[0, 0])


def moment(fs, basis: FockBasis, q: float) -> float:
    """Vacuum moment E[omega(f_1) ... omega(f_n)].

    Exact (independent of the truncation) as long as n <= N.
    """
    q = check_q(q)
    if len(fs) > basis.N:
        raise ValueError(f"{len(fs)} field operators need N >= {len(fs)}, have N = {basis.N}")
    v = basis.vector()
    for f in reversed(list(fs)):
        v = omega(f, basis, q).apply(v)
    return float(v[0])


def _cholesky_blocks(basis: FockBasis, q: float) -> list[np.ndarray]:
    return [np.linalg.cholesky(G) for G in gram_blocks(basis, q)]


def q_norm(X: FockOperator, max_degree: int | None = None) -> float:
    """Operator norm of X with respect to <.,.>_q, optionally restricted to the
    domain of degree <= max_degree. ``X`` may map between two Fock spaces."""
    dom = X.domain or X.basis
    L_out = sp.block_diag(_cholesky_blocks(X.basis, X.q)).toarray()
    L_in = sp.block_diag(_cholesky_blocks(dom, X.q)).toarray()
    M = L_out.T @ X.toarray()
    if max_degree is not None:
        mask = dom.restriction(max_degree)
        M, L_in = M[:, mask], L_in[np.ix_(mask, mask)]
    # ||L_out^T X L_in^{-T}||_2
    M = sla.solve_triangular(L_in, M.T, lower=True).T
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def restricted_norm(X: FockOperator, max_degree: int) -> float:
    """Spectral norm (free inner product) of X restricted to the domain of degree <= max_degree."""
    mask = (X.domain or X.basis).restriction(max_degree)
    M = X.toarray()[:, mask]
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def q_relation_residual(f, g, basis: FockBasis, q: float, max_degree: int | None = None) -> float:
    """Norm of a(f)a*(g) - q a*(g)a(f) - <f,g> 1 on degrees <= max_degree (default N - 1)."""
    f, g = basis.one_particle(f), basis.one_particle(g)
    R = (annihilation(f, basis, q) @ creation(g, basis, q)
         - q * (creation(g, basis, q) @ annihilation(f, basis, q))
         - float(f @ g) * identity(basis, q))
    return restricted_norm(R, basis.N - 1 if max_degree is None else max_degree)


@dataclass
class NormReport:
    norm: float
    bound: float
    history: list[float]

    @property
    def ok(self) -> bool:
        return self.norm <= self.bound * (1 + 1e-12) + 1e-14


def annihilation_norm_bound(f_norm: float, q: float) -> float:
    return f_norm / math.sqrt(1.0 - q) if q >= 0 else f_norm


def operator_norm_bound_check(f, basis: FockBasis, q: float) -> NormReport:
    """q-norm of the truncated a(f) against ||f||/sqrt(1-q) (q >= 0) or ||f|| (q <= 0).

    ``history[k]`` is the norm for the truncation N = k + 1; it is nondecreasing
    because a(f) maps degree n to n - 1 and the norm is a maximum over degrees.
    """
    f = basis.one_particle(f)
    A = annihilation(f, basis, q).matrix.tocsr()
    chol = _cholesky_blocks(basis, q)
    history, running = [], 0.0
    for n in range(1, basis.N + 1):
        blk = A[basis.block(n - 1), basis.block(n)].toarray()
        M = sla.solve_triangular(chol[n], (chol[n - 1].T @ blk).T, lower=True).T
        running = max(running, float(np.linalg.norm(M, 2)))
        history.append(running)
    norm = history[-1] if history else 0.0
    return NormReport(norm=norm, bound=annihilation_norm_bound(float(np.linalg.norm(f)), q), history=history)


def fock_map(T, target: FockBasis, source: FockBasis, q: float) -> FockOperator:
    """F(T): Omega -> Omega, f_1 (x) ... (x) f_n -> Tf_1 (x) ... (x) Tf_n, for a contraction T."""
    q = check_q(q)
    T = np.asarray(T, dtype=float)
    if T.shape != (target.d, source.d):
        raise ValueError(f"T must have shape ({target.d}, {source.d}), got {T.shape}")
    if np.linalg.norm(T, 2) > 1 + 1e-12:
        raise ValueError(f"T is not a contraction: ||T|| = {np.linalg.norm(T, 2):.6g}")
    N = min(target.N, source.N)
    blocks, power = [], np.ones((1, 1))
    for n in range(N + 1):
        blocks.append(sp.csr_matrix(power))
        power = np.kron(power, T)
    m = sp.block_diag(blocks, format="lil")
    m.resize((target.size, source.size))
    return FockOperator(m.tocsr(), target, q, domain=None if target == source else source)


def second_quantization(T, xi: np.ndarray, basis: FockBasis, q: float) -> FockOperator:
    """Gamma_q(T) applied to the Wick image Psi(xi): returns Psi(F(T) xi)."""
    from .wick import wick_vector

    image = fock_map(T, basis, basis, q).apply(xi)
    return wick_vector(image, basis, q)


def dump_csv(X: FockOperator, path) -> None:
    """Write the matrix with one row per basis word; first column is the word label
    (letters 1..d joined by '.', empty for the vacuum)."""
    dom = X.domain or X.basis
    M = X.toarray()
    with open(path, "w", newline="") as fh:
        fh.write(f"# qgauss fock-matrix v1 d={X.basis.d} N={X.basis.N} q={X.q} order=graded-lex\n")
        w = csv.writer(fh)
        w.writerow(["word"] + [".".join(str(c + 1) for c in v) for v in dom.words])
        for word, row in zip(X.basis.words, M):
            w.writerow([".".join(str(c + 1) for c in word)] + [repr(float(x)) for x in row])
