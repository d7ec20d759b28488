"""Wick products Psi(xi): the operators with Psi(xi) Omega = xi, in normal-ordered
and recursive form, plus the q-binomial power case and the q-Hermite identity."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .fock import (FockBasis, FockOperator, annihilation, creation, identity, omega,
                   fock_map, gram_blocks, restricted_norm)
from .qcore import check_q, q_binomial, q_int


def splitting_exponent(creators: tuple[int, ...], annihilators: tuple[int, ...]) -> int:
    """i(I1, I2): number of pairs (creation position, annihilation position) with the
    creation position to the right of the annihilation position."""
    return sum(1 for i in creators for j in annihilators if i > j)


def splittings(n: int):
    """All 2^n splittings of positions 0..n-1 into (creators, annihilators), both in
    original order, with their weight exponent."""
    for mask in range(2**n):
        creators = tuple(k for k in range(n) if mask >> k & 1)
        annihilators = tuple(k for k in range(n) if not mask >> k & 1)
        yield creators, annihilators, splitting_exponent(creators, annihilators)


def _check_length(n: int, basis: FockBasis):
    if n > basis.N:
        raise ValueError(f"word of length {n} exceeds the truncation N = {basis.N}")


def wick_from_splittings(word, basis: FockBasis, q: float) -> FockOperator:
    """Normal-ordered form: sum over splittings of
    a*(f_i1)...a*(f_ik) a(f_j1)...a(f_jl) q^{i(I1,I2)}."""
    q = check_q(q)
    fs = [basis.one_particle(f) for f in word]
    _check_length(len(fs), basis)
    cre = [creation(f, basis, q) for f in fs]
    ann = [annihilation(f, basis, q) for f in fs]
    total = identity(basis, q) * 0.0
    for creators, annihilators, e in splittings(len(fs)):
        term = identity(basis, q)
        for j in reversed(annihilators):
            term = ann[j] @ term
        for i in reversed(creators):
            term = cre[i] @ term
        total = total + q**e * term
    return total


def wick_recursive(word, basis: FockBasis, q: float) -> FockOperator:
    """Psi(f (x) f_1 ... f_n) = omega(f) Psi(f_1 ... f_n) - sum_i q^(i-1) <f, f_i> Psi(.. f_i deleted ..)."""
    q = check_q(q)
    fs = [basis.one_particle(f) for f in word]
    _check_length(len(fs), basis)
    om = [omega(f, basis, q) for f in fs]
    ip = np.array([[float(f @ g) for g in fs] for f in fs]).reshape(len(fs), len(fs))

    @lru_cache(maxsize=None)
    def psi(positions: tuple[int, ...]) -> FockOperator:
        if not positions:
            return identity(basis, q)
        head, rest = positions[0], positions[1:]
        out = om[head] @ psi(rest)
        for k, pos in enumerate(rest):
            c = ip[head, pos]
            if c != 0.0:
                out = out - (q**k * c) * psi(rest[:k] + rest[k + 1:])
        return out

    return psi(tuple(range(len(fs))))


def wick_power(f, n: int, basis: FockBasis, q: float) -> FockOperator:
    """Psi(f^{(x) n}) = sum_k [n choose k]_q a*(f)^k a(f)^(n-k)."""
    q = check_q(q)
    _check_length(n, basis)
    A, C = annihilation(f, basis, q), creation(f, basis, q)
    total = identity(basis, q) * 0.0
    for k in range(n + 1):
        total = total + q_binomial(n, k, q) * ((C ** k) @ (A ** (n - k)))
    return total


def hermite_of_operator(X: FockOperator, n: int) -> FockOperator:
    """H_n^{(q)}(X) via x H_k = H_{k+1} + [k]_q H_{k-1}."""
    prev, cur = identity(X.basis, X.q), X
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, X @ cur - q_int(k, X.q) * prev
    return cur


def hermite_identity_residual(f, n: int, basis: FockBasis, q: float) -> float:
    """Norm of Psi(f^{(x) n}) - H_n(omega(f)) on degrees <= N - n, for a unit vector f."""
    f = basis.one_particle(f)
    if abs(np.linalg.norm(f) - 1.0) > 1e-12:
        raise ValueError("the q-Hermite identity needs a unit vector f")
    _check_length(n, basis)
    diff = wick_recursive([f] * n, basis, q) - hermite_of_operator(omega(f, basis, q), n)
    return restricted_norm(diff, basis.N - n)


def wick_vector(xi: np.ndarray, basis: FockBasis, q: float) -> FockOperator:
    """Psi(xi) for an arbitrary coefficient vector, by linearity over basis words."""
    q = check_q(q)
    xi = np.asarray(xi, dtype=float)
    om = [omega(np.eye(basis.d)[i], basis, q) for i in range(basis.d)]

    @lru_cache(maxsize=None)
    def psi(word: tuple[int, ...]) -> FockOperator:
        if not word:
            return identity(basis, q)
        head, rest = word[0], word[1:]
        out = om[head] @ psi(rest)
        for k, letter in enumerate(rest):
            if letter == head:
                out = out - q**k * psi(rest[:k] + rest[k + 1:])
        return out

    total = identity(basis, q) * 0.0
    for idx in np.flatnonzero(xi):
        total = total + xi[idx] * psi(basis.words[idx])
    return total


def gamma_positivity_margin(T, eta: np.ndarray, basis: FockBasis, q: float, max_degree: int) -> float:
    """Smallest eigenvalue of Gamma_q(T)(Y^dagger Y), Y = Psi(eta), as a quadratic form
    for <.,.>_q on the degree <= max_degree subspace, relative to the q-norm.

    The Wick preimage of Y^dagger Y is Y^dagger eta, computed with the Gram-based
    adjoint. The caller picks N large enough that nothing is truncated:
    N >= max_degree + 2 deg(eta) and N >= 3 deg(eta).
    """
    Y = wick_vector(eta, basis, q)
    preimage = Y.adjoint().apply(eta)
    Z = fock_map(T, basis, basis, q)
    X = wick_vector(Z.apply(preimage), basis, q).toarray()
    mask = basis.restriction(max_degree)
    G = np.zeros((basis.size, basis.size))
    for n, blk in enumerate(gram_blocks(basis, q)):
        G[basis.block(n), basis.block(n)] = blk
    S = (G @ X)[np.ix_(mask, mask)]
    S = 0.5 * (S + S.T)
    L = np.linalg.cholesky(G[np.ix_(mask, mask)])
    Linv = np.linalg.inv(L)
    return float(np.linalg.eigvalsh(Linv @ S @ Linv.T).min())
