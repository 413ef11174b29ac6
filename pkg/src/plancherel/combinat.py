"""Exact Young-diagram combinatorics under Plancherel measure.

Partitions are plain tuples of positive integers in weakly decreasing
order.  Dimensions are Python ints and probabilities are
:class:`fractions.Fraction`, so nothing in this module touches floating
point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Iterator

Partition = tuple[int, ...]

ENUMERATION_CAP = 60


class EnumerationLimitError(RuntimeError):
    """Raised when an exact enumeration would exceed the configured cap."""


def is_partition(mu) -> bool:
    parts = tuple(mu)
    if any((not isinstance(p, int)) or p < 1 for p in parts):
        return False
    return all(parts[i] >= parts[i + 1] for i in range(len(parts) - 1))


def _check(mu) -> Partition:
    parts = tuple(mu)
    if not is_partition(parts):
        raise ValueError(f"not a partition: {mu!r}")
    return parts


def _iter_partitions(n: int, largest: int) -> Iterator[Partition]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _iter_partitions(n - first, first):
            yield (first,) + rest


def partitions_of(N: int, cap: int | None = None) -> list[Partition]:
    """All partitions of ``N`` in reverse lexicographic order.

    ``partitions_of(4)`` is ``[(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]``.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    cap = ENUMERATION_CAP if cap is None else cap
    if N > cap:
        raise EnumerationLimitError(f"N={N} exceeds enumeration cap {cap}")
    return _cached_partitions(N)


@lru_cache(maxsize=None)
def _cached_partitions(N: int) -> list[Partition]:
    return list(_iter_partitions(N, N))


def transpose(mu) -> Partition:
    """Conjugate partition (columns become rows)."""
    parts = _check(mu)
    if not parts:
        return ()
    return tuple(sum(1 for p in parts if p > i) for i in range(parts[0]))


def row_length(mu, k: int) -> int:
    """Length of the ``k``-th row (1-based), zero if ``mu`` has fewer rows."""
    return mu[k - 1] if len(mu) >= k else 0


def hooks(mu) -> list[int]:
    parts = _check(mu)
    conj = transpose(parts)
    return [
        parts[i] - j + conj[j] - i - 1
        for i in range(len(parts))
        for j in range(parts[i])
    ]


def dim_hook(mu) -> int:
    """Number of standard Young tableaux of shape ``mu`` by the hook length formula."""
    parts = _check(mu)
    n = sum(parts)
    return factorial(n) // prod(hooks(parts))


def dim_frobenius(mu) -> int:
    """Number of standard Young tableaux via the Frobenius-Young determinant.

    With ``r`` rows and shifted parts ``h_j = mu_j + r - j`` the dimension is
    ``N! * prod_{i<j} (h_i - h_j) / prod_j h_j!``.
    """
    parts = _check(mu)
    n = sum(parts)
    r = len(parts)
    h = [parts[j] + r - (j + 1) for j in range(r)]
    vandermonde = prod(h[i] - h[j] for i in range(r) for j in range(i + 1, r))
    num = factorial(n) * vandermonde
    den = prod(factorial(x) for x in h)
    q, rem = divmod(num, den)
    assert rem == 0
    return q


def plancherel_prob(mu) -> Fraction:
    """Plancherel probability ``d_mu**2 / N!`` as a reduced fraction."""
    parts = _check(mu)
    n = sum(parts)
    if n < 1:
        raise ValueError("Plancherel measure needs N >= 1")
    return Fraction(dim_hook(parts) ** 2, factorial(n))


@lru_cache(maxsize=None)
def _squared_dims(N: int) -> tuple[tuple[Partition, int], ...]:
    return tuple((mu, dim_hook(mu) ** 2) for mu in _cached_partitions(N))


@lru_cache(maxsize=None)
def row_length_weights(k: int, N: int, columns: bool = False) -> dict[int, int]:
    """Map each possible k-th row length to the summed ``d_mu**2`` over ``mu |- N``.

    With ``columns=True`` the k-th column length is used instead.
    """
    weights: dict[int, int] = {}
    for mu, d2 in _squared_dims(N):
        shape = transpose(mu) if columns else mu
        length = row_length(shape, k)
        weights[length] = weights.get(length, 0) + d2
    return weights


def _row_cdf(k: int, n: int, N: int, cap: int | None, columns: bool) -> Fraction:
    if k not in (1, 2):
        raise ValueError("only rows k = 1 and k = 2 are supported")
    if n < 0 or N < 0:
        raise ValueError("n and N must be nonnegative")
    if N == 0:
        return Fraction(1)
    cap = ENUMERATION_CAP if cap is None else cap
    if N > cap:
        raise EnumerationLimitError(f"N={N} exceeds enumeration cap {cap}")
    weights = row_length_weights(k, N, columns)
    total = sum(w for length, w in weights.items() if length <= n)
    return Fraction(total, factorial(N))


def exact_row_cdf(k: int, n: int, N: int, cap: int | None = None) -> Fraction:
    """``Prob(l^(k)_N <= n)`` under Plancherel measure, exactly.

    ``N = 0`` returns 1 by convention.
    """
    return _row_cdf(k, n, N, cap, columns=False)


def exact_column_cdf(k: int, n: int, N: int, cap: int | None = None) -> Fraction:
    """Same as :func:`exact_row_cdf` but restricting the k-th column."""
    return _row_cdf(k, n, N, cap, columns=True)


def exact_cdf_table(k: int, N_max: int, n_max: int | None = None) -> list[tuple[int, int, int, Fraction]]:
    """Rows ``(k, n, N, q)`` for ``0 <= N <= N_max`` and ``0 <= n <= n_max``."""
    n_max = N_max if n_max is None else n_max
    return [
        (k, n, N, exact_row_cdf(k, n, N))
        for N in range(N_max + 1)
        for n in range(n_max + 1)
    ]
