"""Robinson-Schensted shapes of permutations and Monte Carlo row statistics.

Uniform permutations pushed through RSK insertion are Plancherel-distributed
shapes.  The sampler here only keeps the first two insertion rows, which is
all the first- and second-row statistics need: a value bumped out of row 2
can only land in rows 3 and below.
"""

from __future__ import annotations

import bisect
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .combinat import Partition

GREENE_CAP = 12
CHUNK_SIZE = 64


def _check_permutation(pi: Sequence[int]) -> list[int]:
    values = [int(v) for v in pi]
    if sorted(values) != list(range(1, len(values) + 1)):
        raise ValueError("expected a permutation of 1..N")
    return values


def rsk_shape(pi: Sequence[int]) -> Partition:
    """Shape of the RSK insertion tableau of ``pi`` (full row bumping)."""
    rows: list[list[int]] = []
    for x in _check_permutation(pi):
        for row in rows:
            pos = bisect.bisect_left(row, x)
            if pos == len(row):
                row.append(x)
                break
            row[pos], x = x, row[pos]
        else:
            rows.append([x])
    return tuple(len(row) for row in rows)


@numba.njit(cache=True, nogil=True)
def _bisect_left(row, length, x):
    lo = 0
    hi = length
    while lo < hi:
        mid = (lo + hi) >> 1
        if row[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@numba.njit(cache=True, nogil=True)
def _two_rows(values):
    n = values.shape[0]
    row1 = np.empty(n, dtype=values.dtype)
    row2 = np.empty(n, dtype=values.dtype)
    len1 = 0
    len2 = 0
    for i in range(n):
        x = values[i]
        pos = _bisect_left(row1, len1, x)
        if pos == len1:
            row1[len1] = x
            len1 += 1
            continue
        bumped = row1[pos]
        row1[pos] = x
        pos = _bisect_left(row2, len2, bumped)
        if pos == len2:
            row2[len2] = bumped
            len2 += 1
        else:
            row2[pos] = bumped
    return len1, len2


def two_row_lengths(pi: Sequence[int]) -> tuple[int, int]:
    """First two RSK row lengths ``(l1, l2)``, in ``O(N log N)``."""
    values = np.asarray(pi, dtype=np.int64)
    if values.size == 0:
        return 0, 0
    l1, l2 = _two_rows(values)
    return int(l1), int(l2)


def longest_increasing(values: Sequence[int]) -> int:
    tails: list[int] = []
    for x in values:
        pos = bisect.bisect_left(tails, x)
        if pos == len(tails):
            tails.append(x)
        else:
            tails[pos] = x
    return len(tails)


def greene_k_increasing(pi: Sequence[int], k: int, cap: int = GREENE_CAP) -> int:
    """Longest union of ``k`` disjoint increasing subsequences, by subset scan.

    A set of positions splits into ``k`` increasing subsequences exactly when
    it contains no decreasing subsequence of length ``k + 1`` (Dilworth), so
    the scan forbids every such index set and returns the largest surviving
    subset.  Exponential in ``N``; meant only as a test oracle.
    """
    values = _check_permutation(pi)
    n = len(values)
    if k < 1:
        raise ValueError("k must be positive")
    if n > cap:
        raise RuntimeError(f"Greene oracle capped at N <= {cap}, got {n}")
    if k >= n:
        return n
    if k == 1:
        return longest_increasing(values)
    forbidden = []
    for idx in itertools.combinations(range(n), k + 1):
        if all(values[idx[i]] > values[idx[i + 1]] for i in range(k)):
            forbidden.append(sum(1 << i for i in idx))
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for f in forbidden:
        ok &= (masks & f) != f
    sizes = np.array([bin(m).count("1") for m in range(1 << n)])
    return int(sizes[ok].max())


@dataclass(frozen=True)
class ScaledSampleSet:
    """Samples of ``(l^(k) - 2 sqrt(N)) / N**(1/6)`` from uniform permutations."""

    k: int
    N: int
    seed: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.samples.setflags(write=False)

    @property
    def count(self) -> int:
        return int(self.samples.size)

    def mean(self) -> float:
        return float(self.samples.mean())


def _chunk_lengths(N: int, count: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed_seq))
    out = np.empty((count, 2), dtype=np.int64)
    for i in range(count):
        perm = rng.permutation(N) + 1
        out[i] = _two_rows(perm)
    return out


def sample_row_lengths(N: int, count: int, seed: int, workers: int = 1) -> np.ndarray:
    """``(count, 2)`` array of ``(l1, l2)`` for independent uniform permutations.

    Samples are generated in fixed chunks of :data:`CHUNK_SIZE`, each with its
    own Philox stream spawned from ``seed``, so the output does not depend on
    ``workers``.
    """
    if N < 1 or count < 1:
        raise ValueError("N and count must be positive")
    n_chunks = -(-count // CHUNK_SIZE)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(CHUNK_SIZE, count - i * CHUNK_SIZE) for i in range(n_chunks)]
    if workers <= 1:
        parts = [_chunk_lengths(N, c, s) for c, s in zip(sizes, children)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda cs: _chunk_lengths(N, *cs), zip(sizes, children)))
    return np.concatenate(parts)


def scale_lengths(lengths: np.ndarray, N: int) -> np.ndarray:
    return (np.asarray(lengths, dtype=float) - 2.0 * np.sqrt(N)) / N ** (1.0 / 6.0)


def sample_scaled(k: int, N: int, count: int, seed: int, workers: int = 1) -> ScaledSampleSet:
    """Draw ``count`` samples of the scaled k-th row length at size ``N``."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    lengths = sample_row_lengths(N, count, seed, workers)
    return ScaledSampleSet(k, N, seed, scale_lengths(lengths[:, k - 1], N))


def sample_both(N: int, count: int, seed: int, workers: int = 1) -> tuple[ScaledSampleSet, ScaledSampleSet]:
    """First- and second-row sample sets from one shared set of permutations."""
    lengths = sample_row_lengths(N, count, seed, workers)
    return (
        ScaledSampleSet(1, N, seed, scale_lengths(lengths[:, 0], N)),
        ScaledSampleSet(2, N, seed, scale_lengths(lengths[:, 1], N)),
    )


def empirical_cdf(samples: ScaledSampleSet | np.ndarray, grid: Sequence[float]) -> np.ndarray:
    """Fraction of samples ``<= x`` for each ``x`` in ``grid``."""
    data = samples.samples if isinstance(samples, ScaledSampleSet) else np.asarray(samples, dtype=float)
    if data.size == 0:
        raise ValueError("empirical CDF of an empty sample set")
    ordered = np.sort(data)
    return np.searchsorted(ordered, np.asarray(grid, dtype=float), side="right") / ordered.size


def ks_distance(samples: ScaledSampleSet | np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance between the samples and a continuous CDF.

    ``cdf`` is a vectorised callable.  Both one-sided gaps are checked at every
    sample, which is where the sup is attained.
    """
    data = samples.samples if isinstance(samples, ScaledSampleSet) else np.asarray(samples, dtype=float)
    if data.size == 0:
        raise ValueError("KS distance of an empty sample set")
    ordered = np.sort(data)
    n = ordered.size
    values = np.asarray(cdf(ordered), dtype=float)
    upper = np.searchsorted(ordered, ordered, side="right") / n
    lower = np.searchsorted(ordered, ordered, side="left") / n
    return float(max(np.max(np.abs(upper - values)), np.max(np.abs(values - lower))))
