"""Poissonized row-length distributions through series and classical determinants.

The Toeplitz matrices here are moment matrices of the even weight
``exp(2 sqrt(lam) cos(theta)) dtheta / 2pi`` on the unit circle; their
entries are modified Bessel functions, summed from the power series with
a ratio-test tail certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np
from scipy import linalg
from scipy.special import gammaln

from . import combinat

SERIES_REL_TOL = 1e-15
S_SUM_TOL = 1e-18
TOEPLITZ_MAX_N = 200
SERIES_TAIL_TOL = 1e-10


class SeriesValue(NamedTuple):
    """A truncated series value with a bound on the discarded tail."""

    value: float
    tail: float
    flagged: bool = False


def _sum_series(first_index: int, term, rel_tol: float = SERIES_REL_TOL, max_terms: int = 100000) -> SeriesValue:
    """Sum ``term(m)`` for ``m >= first_index`` of a series of positive terms
    whose consecutive ratio eventually decreases to zero.

    Stops once the ratio is below 1/2 and the next term is below ``rel_tol``
    of the partial sum; the tail is then bounded by the geometric majorant.
    """
    total = 0.0
    m = first_index
    current = term(m)
    for _ in range(max_terms):
        total += current
        nxt = term(m + 1)
        ratio = nxt / current if current > 0 else 0.0
        if nxt == 0.0 or (ratio < 0.5 and nxt <= rel_tol * total):
            tail = nxt / (1.0 - ratio) if ratio < 1.0 else math.inf
            return SeriesValue(total, tail)
        m += 1
        current = nxt
    return SeriesValue(total, math.inf, True)


def _log_term_series(first: int, log_term, rel_tol: float = SERIES_REL_TOL) -> SeriesValue:
    return _sum_series(first, lambda m: math.exp(log_term(m)), rel_tol)


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return lam


def toeplitz_entry_series(m: int, lam: float) -> SeriesValue:
    """Fourier coefficient ``c_m`` of the weight, with tail bound.

    ``c_m = sum_{p >= |m|} lam**(p - |m|/2) / (p! (p - |m|)!)``.
    """
    lam = _check_lambda(lam)
    a = abs(int(m))
    log_lam = math.log(lam)

    def log_term(p):
        return (p - a / 2) * log_lam - math.lgamma(p + 1) - math.lgamma(p - a + 1)

    return _log_term_series(a, log_term)


def toeplitz_entry(m: int, lam: float) -> float:
    return toeplitz_entry_series(m, lam).value


@lru_cache(maxsize=256)
def _entries(lam: float, n: int) -> tuple[float, ...]:
    return tuple(toeplitz_entry(m, lam) for m in range(n))


@dataclass(frozen=True)
class ToeplitzSystem:
    """The ``size x size`` Toeplitz matrix ``(c_{j-k})`` of the weight at ``lam``."""

    lam: float
    size: int
    entries: tuple[float, ...] = field(repr=False)

    @classmethod
    def build(cls, lam: float, size: int) -> "ToeplitzSystem":
        lam = _check_lambda(lam)
        if size < 0 or size > TOEPLITZ_MAX_N:
            raise ValueError(f"Toeplitz size must be in [0, {TOEPLITZ_MAX_N}]")
        return cls(lam, size, _entries(lam, max(size, 1)))

    @property
    def matrix(self) -> np.ndarray:
        if self.size == 0:
            return np.ones((0, 0))
        return linalg.toeplitz(np.array(self.entries[: self.size]))

    def cholesky(self):
        return linalg.cho_factor(self.matrix, lower=True)

    def logdet(self) -> float:
        """Log determinant; the empty matrix has determinant 1."""
        if self.size == 0:
            return 0.0
        c, _ = self.cholesky()
        return 2.0 * float(np.sum(np.log(np.diag(c))))

    def det(self) -> float:
        return math.exp(self.logdet())

    def solve(self, rhs) -> np.ndarray:
        return linalg.cho_solve(self.cholesky(), np.asarray(rhs, dtype=float))


def phi1_toeplitz(n: int, lam: float) -> float:
    """``e^{-lam} det(T_{n-1})``: Poissonized probability that the first row is at most ``n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if lam == 0:
        return 1.0
    lam = _check_lambda(lam)
    return math.exp(ToeplitzSystem.build(lam, n).logdet() - lam)


def poisson_weights(lam: float, N_max: int) -> np.ndarray:
    """``e^{-lam} lam**N / N!`` for ``N = 0..N_max``."""
    N = np.arange(N_max + 1)
    return np.exp(N * math.log(lam) - lam - gammaln(N + 1)) if lam > 0 else (N == 0).astype(float)


def poisson_tail_bound(lam: float, N_max: int) -> float:
    """Upper bound on ``P(Poisson(lam) > N_max)``."""
    if lam == 0:
        return 0.0
    nxt = N_max + 1
    first = math.exp(nxt * math.log(lam) - lam - math.lgamma(nxt + 1))
    ratio = lam / (nxt + 1)
    if ratio >= 1.0:
        return 1.0
    return min(1.0, first / (1.0 - ratio))


def phi_series(k: int, n: int, lam: float, N_max: int = 40, tol: float = SERIES_TAIL_TOL) -> SeriesValue:
    """Poissonization ``sum_N e^{-lam} lam^N / N! * q^(k)_{n,N}`` truncated at ``N_max``.

    The tail bound uses ``q <= 1``; ``flagged`` is set when it exceeds ``tol``.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if lam == 0:
        return SeriesValue(1.0, 0.0)
    weights = poisson_weights(lam, N_max)
    qs = [float(combinat.exact_row_cdf(k, n, N)) for N in range(N_max + 1)]
    value = float(np.dot(weights, qs))
    tail = poisson_tail_bound(lam, N_max)
    return SeriesValue(value, tail, tail > tol)


def a_coeff_series(j: int, s: int, lam: float) -> SeriesValue:
    """Coefficient ``a_j(s)`` of the intermediate form, with tail bound.

    * ``a_0(0) = sum_{m>=0} lam^m / (m!)^2``
    * ``a_0(s) = sum_{m>=1} lam^m / ((m+s)^2 ((m-1)!)^2)`` for ``s >= 1``
    * ``a_j(s) = sum_{m>=j} lam^(m-j/2) / ((m+s) (m-1)! (m-j)!)`` for ``j >= 1``
    """
    lam = _check_lambda(lam)
    if j < 0 or s < 0:
        raise ValueError("j and s must be nonnegative")
    L = math.log(lam)
    if j == 0 and s == 0:
        return _log_term_series(0, lambda m: m * L - 2 * math.lgamma(m + 1))
    if j == 0:
        return _log_term_series(
            1, lambda m: m * L - 2 * math.log(m + s) - 2 * math.lgamma(m)
        )
    return _log_term_series(
        j,
        lambda m: (m - j / 2) * L - math.log(m + s) - math.lgamma(m) - math.lgamma(m - j + 1),
    )


def a_coeff(j: int, s: int, lam: float) -> float:
    return a_coeff_series(j, s, lam).value


@dataclass(frozen=True)
class CoefficientTable:
    """``a_j(s)`` for ``0 <= j <= j_max`` and ``0 <= s <= s_max``.

    ``values[s, j]`` holds ``a_j(s)``; ``tails[s, j]`` the series tail bound.
    """

    lam: float
    s_max: int
    j_max: int
    values: np.ndarray = field(repr=False)
    tails: np.ndarray = field(repr=False)

    def b(self, s: int, n: int) -> np.ndarray:
        """Vector ``(a_1(s), ..., a_n(s))``."""
        return self.values[s, 1 : n + 1]


@lru_cache(maxsize=64)
def coefficient_table(lam: float, s_max: int, j_max: int) -> CoefficientTable:
    values = np.empty((s_max + 1, j_max + 1))
    tails = np.empty_like(values)
    for s in range(s_max + 1):
        for j in range(j_max + 1):
            v = a_coeff_series(j, s, lam)
            values[s, j], tails[s, j] = v.value, v.tail
    values.setflags(write=False)
    tails.setflags(write=False)
    return CoefficientTable(lam, s_max, j_max, values, tails)


def s_weight(s: int, lam: float) -> float:
    """``lam**s / (s!)**2``."""
    return math.exp(s * math.log(lam) - 2 * math.lgamma(s + 1))


def s_cutoff(lam: float, tol: float = S_SUM_TOL) -> int:
    """Number of ``s`` terms after which ``lam^s/(s!)^2 a_0(s)`` is negligible.

    ``a_0(s) <= a_0(1)`` for ``s >= 1``, and the prefactor decays
    super-geometrically, so the cutoff is where the prefactor times
    ``a_0(0)`` drops below ``tol`` of the leading term and the ratio is
    below one half.
    """
    lam = _check_lambda(lam)
    head = a_coeff(0, 0, lam)
    s = 0
    acc = 0.0
    while True:
        term = s_weight(s, lam) * head
        acc += term
        ratio = lam / ((s + 1) ** 2)
        if s > 0 and ratio < 0.5 and term < tol * acc:
            return s
        s += 1


def phi2_intermediate(n_plus_1: int, lam: float) -> float:
    """Poissonized ``Prob(l2 <= n+1)`` from the Toeplitz-inverse intermediate form

    ``[sum_s lam^s/(s!)^2 (a_0(s) - <T_{n-1}^{-1} b_n(s), b_n(s)>)] phi^(1)_n(lam)``,
    with the quadratic form absent for ``n = 0``.
    """
    if n_plus_1 < 1:
        raise ValueError("n_plus_1 must be positive")
    if lam == 0:
        return 1.0
    return phi2_intermediate_bracket(n_plus_1, lam) * phi1_toeplitz(n_plus_1 - 1, lam)


def phi2_intermediate_bracket(n_plus_1: int, lam: float) -> float:
    """The bracket multiplying ``phi^(1)_n`` in :func:`phi2_intermediate`."""
    if n_plus_1 < 1:
        raise ValueError("n_plus_1 must be positive")
    lam = _check_lambda(lam)
    n = n_plus_1 - 1
    s_max = s_cutoff(lam)
    table = coefficient_table(lam, s_max, max(n, 1))
    weights = np.array([s_weight(s, lam) for s in range(s_max + 1)])
    a0 = table.values[:, 0]
    if n == 0:
        return float(np.dot(weights, a0))
    system = ToeplitzSystem.build(lam, n)
    B = table.values[:, 1 : n + 1]
    X = system.solve(B.T)
    quad = np.einsum("sj,js->s", B, X)
    return float(np.dot(weights, a0 - quad))


def intermediate_quadratic_sum(n: int, lam: float) -> float:
    """``sum_s lam^s/(s!)^2 <T_{n-1}^{-1} b_n(s), b_n(s)>`` for ``n >= 1``."""
    if n < 1:
        raise ValueError("n must be positive")
    lam = _check_lambda(lam)
    s_max = s_cutoff(lam)
    table = coefficient_table(lam, s_max, n)
    weights = np.array([s_weight(s, lam) for s in range(s_max + 1)])
    B = table.values[:, 1 : n + 1]
    X = ToeplitzSystem.build(lam, n).solve(B.T)
    return float(np.dot(weights, np.einsum("sj,js->s", B, X)))


@dataclass(frozen=True)
class OrthoPolySet:
    """Monic orthogonal polynomial ``pi_k`` of the weight and its ``kappa_k**2``.

    ``eta[p]`` is the coefficient of ``z**p``, so ``eta[k] == 1``.
    """

    lam: float
    degree: int
    eta: np.ndarray = field(repr=False)
    kappa2: float

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.eta)


def ortho_poly(k: int, lam: float) -> OrthoPolySet:
    """Monic ``pi_k`` from the Toeplitz normal equations.

    Orthogonality to ``1, z, ..., z^{k-1}`` reads
    ``sum_{p<k} c_{j-p} eta_p = -c_{j-k}``; ``kappa_k^2`` is the determinant
    ratio ``det(T_{k-1}) / det(T_k)``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    lam = _check_lambda(lam)
    eta = np.zeros(k + 1)
    eta[k] = 1.0
    if k > 0:
        c = np.array(_entries(lam, k + 1))
        rhs = -c[k:0:-1]
        eta[:k] = ToeplitzSystem.build(lam, k).solve(rhs)
    log_ratio = ToeplitzSystem.build(lam, k).logdet() - ToeplitzSystem.build(lam, k + 1).logdet()
    eta.setflags(write=False)
    return OrthoPolySet(lam, k, eta, math.exp(log_ratio))


def toeplitz_inverse_identity(n: int, lam: float) -> float:
    """Max residual of the rank-one border structure of ``T_n^{-1}``.

    Checks ``(T_n^{-1})_{pq} = kappa_n^2 eta_p eta_q`` on the last row and
    column, ``(T_n^{-1} - T_{n-1}^{-1})_{pq} = kappa_n^2 eta_p eta_q`` on the
    leading block, and ``(T_n^{-1})_{nn} = kappa_n^2``, against dense
    inverses.
    """
    if n < 1:
        raise ValueError("n must be positive")
    lam = _check_lambda(lam)
    big = np.linalg.inv(ToeplitzSystem.build(lam, n + 1).matrix)
    small = np.linalg.inv(ToeplitzSystem.build(lam, n).matrix)
    op = ortho_poly(n, lam)
    claimed = op.kappa2 * np.outer(op.eta, op.eta)
    border = max(np.max(np.abs(big[n, :] - claimed[n, :])), np.max(np.abs(big[:, n] - claimed[:, n])))
    interior = np.max(np.abs(big[:n, :n] - small - claimed[:n, :n]))
    corner = abs(big[n, n] - op.kappa2)
    return float(max(border, interior, corner))


def toeplitz_inverse_from_polys(n: int, lam: float) -> np.ndarray:
    """``T_n^{-1}`` assembled as ``sum_k kappa_k^2 eta^k (eta^k)^T`` (zero padded)."""
    out = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        op = ortho_poly(k, lam)
        out[: k + 1, : k + 1] += op.kappa2 * np.outer(op.eta, op.eta)
    return out


def hankel_H(s: int, n: int, lam: float, dps: int = 50) -> float:
    """Determinant of the ``n x n`` moment matrix ``(sum_m m^{j+k} nu_s(m))``.

    ``nu_0(m) = lam^m/(m!)^2`` for ``m >= 0`` and
    ``nu_s(m) = lam^m / ((m+s)^2 ((m-1)!)^2)`` for ``m >= 1``, ``s >= 1``.
    Hankel moment matrices are badly conditioned, so this runs in mpmath.
    """
    if n < 1 or s < 0:
        raise ValueError("need n >= 1 and s >= 0")
    lam = _check_lambda(lam)
    with mpmath.workdps(dps):
        L = mpmath.mpf(lam)
        if s == 0:
            def nu(m):
                return L**m / mpmath.factorial(m) ** 2
            start = 0
        else:
            def nu(m):
                return L**m / ((m + s) ** 2 * mpmath.factorial(m - 1) ** 2)
            start = 1
        tol = mpmath.mpf(10) ** (-dps + 5)
        moments = [mpmath.mpf(0)] * (2 * n - 1)
        m = start
        while True:
            w = nu(m)
            powers = [mpmath.mpf(m) ** e for e in range(2 * n - 1)]
            for e in range(2 * n - 1):
                moments[e] += powers[e] * w
            if m > max(2, 2 * math.sqrt(lam)) + 2 * n and w * powers[-1] < tol * moments[-1]:
                break
            m += 1
        M = mpmath.matrix(n, n)
        for j in range(n):
            for k in range(n):
                M[j, k] = moments[j + k]
        return float(mpmath.det(M))


def phi1_hankel(n: int, lam: float) -> float:
    """``e^{-lam} lam^{-n(n-1)/2} H(0)``."""
    lam = _check_lambda(lam)
    if n == 0:
        return math.exp(-lam)
    return math.exp(-lam - n * (n - 1) / 2 * math.log(lam)) * hankel_H(0, n, lam)


def phi2_hankel(n: int, lam: float, dps: int = 50) -> float:
    """``e^{-lam} lam^{-n(n-1)/2} sum_s lam^s/(s!)^2 H(s)`` for ``n >= 1``.

    The ``s`` sum stops with the same cutoff as :func:`phi2_intermediate`.
    """
    lam = _check_lambda(lam)
    if n < 1:
        raise ValueError("n must be positive")
    s_max = s_cutoff(lam)
    total = sum(s_weight(s, lam) * hankel_H(s, n, lam, dps) for s in range(s_max + 1))
    return math.exp(-lam - n * (n - 1) / 2 * math.log(lam)) * total
