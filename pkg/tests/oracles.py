"""Reference computations that share no code with the package."""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import comb, factorial

import numpy as np
from scipy import special


@lru_cache(maxsize=None)
def partition_count(N: int) -> int:
    """Euler's pentagonal-number recurrence."""
    if N < 0:
        return 0
    if N == 0:
        return 1
    total = 0
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > N:
            break
        sign = 1 if k % 2 else -1
        total += sign * partition_count(N - g1)
        g2 = k * (3 * k + 1) // 2
        if g2 <= N:
            total += sign * partition_count(N - g2)
        k += 1
    return total


@lru_cache(maxsize=None)
def syt_count(mu: tuple[int, ...]) -> int:
    """Standard tableaux counted by removing the box holding the largest entry."""
    if sum(mu) == 0:
        return 1
    total = 0
    for i, part in enumerate(mu):
        below = mu[i + 1] if i + 1 < len(mu) else 0
        if part > below:
            smaller = list(mu)
            smaller[i] -= 1
            total += syt_count(tuple(p for p in smaller if p > 0))
    return total


def increasing_masks(perm) -> np.ndarray:
    """Bitmasks of every increasing subsequence, including the empty one."""
    n = len(perm)
    masks = [0]
    ends = [-1]
    # extend each subsequence by a later, larger value
    for i in range(n):
        for j in range(len(masks)):
            last = ends[j]
            if last < 0 or perm[last] < perm[i]:
                masks.append(masks[j] | (1 << i))
                ends.append(i)
    return np.array(masks, dtype=np.int64)


_POPCOUNT = np.array([bin(m).count("1") for m in range(1 << 12)], dtype=np.int64)


def longest_k_increasing(perm, k: int) -> int:
    """Largest union of ``k`` disjoint increasing subsequences (k = 1, 2) by brute force."""
    masks = increasing_masks(perm)
    sizes = _POPCOUNT[masks]
    if k == 1:
        return int(sizes.max())
    if k != 2:
        raise ValueError("oracle handles k = 1, 2")
    disjoint = (masks[:, None] & masks[None, :]) == 0
    return int(np.where(disjoint, sizes[:, None] + sizes[None, :], -1).max())


def all_permutations(N: int):
    return itertools.permutations(range(1, N + 1))


def bessel_toeplitz(lam: float, size: int) -> np.ndarray:
    c = special.iv(np.arange(size), 2 * np.sqrt(lam))
    idx = np.abs(np.subtract.outer(np.arange(size), np.arange(size)))
    return c[idx]


def hook_shape_phi2_first(lam: float, terms: int = 80) -> float:
    """``Prob(l2 <= 1)`` under Poissonized Plancherel measure.

    Shapes with second row at most 1 are hooks ``(a, 1^b)``, whose dimension
    is ``C(N-1, b)``; summing squares gives ``C(2N-2, N-1)``.
    """
    total = 1.0
    for N in range(1, terms):
        total += lam**N * comb(2 * N - 2, N - 1) / factorial(N) ** 2
    return float(np.exp(-lam) * total)


def airy_kernel_det(x: float, t: float = 1.0, nodes: int = 60, with_trace: bool = False):
    """``det(I - t K_Airy)`` on ``L^2(x, inf)`` by Gauss-Legendre on ``[x, x+16]``.

    With ``with_trace`` also returns ``tr((I - t K)^{-1} K)``.
    """
    g, w = np.polynomial.legendre.leggauss(nodes)
    span = 16.0
    s = x + (g + 1) * span / 2
    w = w * span / 2
    ai, aip, _, _ = special.airy(s)
    diff = np.subtract.outer(s, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (np.outer(ai, aip) - np.outer(aip, ai)) / diff
    K[np.diag_indices(nodes)] = aip**2 - s * ai**2
    sw = np.sqrt(w)
    A = sw[:, None] * K * sw[None, :]
    M = np.eye(nodes) - t * A
    d = float(np.linalg.det(M))
    if not with_trace:
        return d
    return d, float(np.trace(np.linalg.solve(M, A)))
