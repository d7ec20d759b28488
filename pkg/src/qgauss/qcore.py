"""q-combinatorics: q-integers, q-factorials, q-binomials, q-Pochhammer symbols
and permutation inversion counts.

Everything here is evaluated in double precision.
"""
from __future__ import annotations

import itertools
import math
import sys
from typing import Iterator, Sequence

PERMUTATION_CAP = 8


def check_q(q: float) -> float:
    """Validate a deformation parameter for the generic (-1 < q < 1) code paths."""
    q = float(q)
    if not -1.0 < q < 1.0:
        raise ValueError(f"q must lie in the open interval (-1, 1), got {q}")
    return q


def q_int(n: int, q: float) -> float:
    """[n]_q = 1 + q + ... + q^(n-1), with [0]_q = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    # the finite sum avoids cancellation in (1 - q^n)/(1 - q) near q = 1
    total, power = 0.0, 1.0
    for _ in range(n):
        total += power
        power *= q
    return total


def q_factorial(n: int, q: float) -> float:
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = 1.0
    for k in range(1, n + 1):
        out *= q_int(k, q)
    return out


def q_binomial(n: int, k: int, q: float) -> float:
    """Gaussian binomial coefficient, computed as prod_{i=1}^{n-k} (1 - q^{k+i}) / (1 - q^i)."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    if k > n:
        raise ValueError(f"q_binomial requires k <= n, got k={k}, n={n}")
    k = min(k, n - k)
    out = 1.0
    for i in range(1, k + 1):
        out *= q_int(n - k + i, q) / q_int(i, q)
    return out


def pochhammer(a: float, q: float, n: int | float = math.inf, tol: float = 1e-16) -> float:
    """q-Pochhammer symbol (a; q)_n = prod_{j=0}^{n-1} (1 - a q^j).

    For ``n = inf`` the product is truncated at the first ``j`` with ``|a q^j| < tol``.
    The omitted factors satisfy ``|log prod_{j>=J} (1 - a q^j)| <= 2 |a q^J| / (1 - |q|)``
    once ``|a q^J| <= 1/2``, so the relative truncation error is at most about
    ``2 tol / (1 - |q|)``.
    """
    if n == math.inf:
        if not abs(q) < 1.0:
            raise ValueError("the infinite product needs |q| < 1")
        out, term = 1.0, float(a)
        while abs(term) >= tol:
            out *= 1.0 - term
            term *= q
        return out
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer or math.inf")
    out, term = 1.0, float(a)
    for _ in range(int(n)):
        out *= 1.0 - term
        term *= q
    return out


def pochhammer_error_bound(a: float, q: float, tol: float = 1e-16) -> float:
    """Upper bound on the relative error of ``pochhammer(a, q, inf, tol)``: truncation
    plus one rounding per retained factor (two per factor, to be safe)."""
    if abs(a) < tol:
        factors = 0
    elif q == 0.0:
        factors = 1
    else:
        factors = 1 + max(0, math.ceil(math.log(tol / abs(a)) / math.log(abs(q))))
    return 2.0 * tol / (1.0 - abs(q)) + 2.0 * factors * sys.float_info.epsilon


def inversions(p: Sequence[int]) -> int:
    """Number of pairs i < j with p(i) > p(j)."""
    n = len(p)
    if sorted(p) != list(range(1, n + 1)):
        raise ValueError(f"{tuple(p)} is not a permutation of 1..{n}")
    return sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])


def permutations(n: int, cap: int = PERMUTATION_CAP) -> Iterator[tuple[int, ...]]:
    """Yield every permutation of 1..n in one-line notation (lexicographic order)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > cap:
        raise ValueError(f"refusing to enumerate S_{n}: above the cap n <= {cap}")
    yield from itertools.permutations(range(1, n + 1))
