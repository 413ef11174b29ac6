"""Acceptance suite: one marked group of tests per criterion.

The terminal summary prints a PASS/FAIL line for every criterion.  Run it
alone with ``pytest tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from plancherel import combinat, detform, fredholm, painleve, rsk

GRID_N = range(9)
GRID_LAMBDA = (0.25, 1.0, 4.0)
grid = pytest.mark.parametrize("lam", GRID_LAMBDA)
crit = pytest.mark.criterion


@crit(1, "sum of squared dimensions is N!; hook and Frobenius dimensions agree")
def test_squared_dimensions_sum_to_factorial():
    for N in range(21):
        parts = combinat.partitions_of(N)
        assert len(parts) == oracles.partition_count(N)
        assert sum(combinat.dim_hook(mu) ** 2 for mu in parts) == math.factorial(N)


@crit(1, "sum of squared dimensions is N!; hook and Frobenius dimensions agree")
def test_hook_and_frobenius_dimensions_agree():
    for N in range(21):
        for mu in combinat.partitions_of(N):
            assert combinat.dim_hook(mu) == combinat.dim_frobenius(mu)


@crit(2, "RSK first-two-row sums equal brute-force longest 1- and 2-increasing lengths, N <= 7")
def test_rsk_rows_match_brute_force_greene():
    for N in range(1, 8):
        for perm in oracles.all_permutations(N):
            shape = rsk.rsk_shape(perm)
            l1 = shape[0]
            l2 = shape[1] if len(shape) > 1 else 0
            assert oracles.longest_k_increasing(perm, 1) == l1
            assert oracles.longest_k_increasing(perm, 2) == l1 + l2
            assert rsk.two_row_lengths(perm) == (l1, l2)


@crit(3, "exact second-row CDF equals the RSK enumeration fraction, N <= 8")
def test_exact_second_row_cdf_matches_enumeration():
    for N in range(1, 9):
        counts: dict[int, int] = {}
        for perm in oracles.all_permutations(N):
            l2 = rsk.two_row_lengths(perm)[1]
            counts[l2] = counts.get(l2, 0) + 1
        for n in range(N + 1):
            enumerated = Fraction(sum(c for length, c in counts.items() if length <= n), math.factorial(N))
            assert combinat.exact_row_cdf(2, n, N) == enumerated


@crit(4, "Toeplitz determinant vs de-Poissonized series, first row")
@grid
def test_toeplitz_matches_series(lam):
    for n in GRID_N:
        series = detform.phi_series(1, n, lam)
        assert abs(detform.phi1_toeplitz(n, lam) - series.value) < 1e-10 + series.tail


@crit(5, "2^-n det(I - K_n) equals the Toeplitz value")
@grid
def test_fredholm_first_row_matches_toeplitz(lam):
    for n in GRID_N:
        spec = fredholm.KernelSpec(n, lam)
        value = 2.0**-n * fredholm.fredholm_det(spec)
        assert abs(value - detform.phi1_toeplitz(n, lam)) < 1e-9


@crit(6, "second-row routes agree pairwise; analytic vs finite-difference t-derivative")
@grid
def test_second_row_routes_agree(lam):
    for n in GRID_N:
        n1 = n + 1
        values = [fredholm.phi2_fredholm(n1, lam), detform.phi2_intermediate(n1, lam)]
        series = detform.phi_series(2, n1, lam)
        assert abs(values[0] - values[1]) < 1e-8
        assert abs(values[0] - series.value) < 1e-8 + series.tail
        assert abs(values[1] - series.value) < 1e-8 + series.tail


@crit(6, "second-row routes agree pairwise; analytic vs finite-difference t-derivative")
@grid
def test_second_row_trace_matches_finite_difference(lam):
    for n in GRID_N:
        assert abs(fredholm.phi2_fredholm(n + 1, lam) - fredholm.phi2_fredholm_fd(n + 1, lam)) < 1e-6


@crit(7, "empty-kernel trace identity: trace, a_0 sum and central-binomial sum agree")
@grid
def test_zero_index_trace_identity(lam):
    trace_side = 1 + 0.5 * fredholm.resolvent_trace(fredholm.KernelSpec(0, lam))
    a0_side = sum(detform.s_weight(s, lam) * detform.a_coeff(0, s, lam) for s in range(detform.s_cutoff(lam) + 1))
    binomial_side = 1 + sum(lam**p / math.factorial(p) ** 2 * math.comb(2 * p - 2, p - 1) for p in range(1, 80))
    assert abs(trace_side - a0_side) < 1e-9
    assert abs(trace_side - binomial_side) < 1e-9
    assert abs(a0_side - binomial_side) < 1e-9


@crit(8, "spectral checks: det = 2^n at lambda = 0; eigenvalues in [-1, 1); kernel of K + 1")
def test_lambda_zero_determinant_is_power_of_two():
    for n in range(11):
        assert abs(fredholm.fredholm_det(fredholm.KernelSpec(n, 0.0)) - 2.0**n) < 1e-10


@crit(8, "spectral checks: det = 2^n at lambda = 0; eigenvalues in [-1, 1); kernel of K + 1")
@pytest.mark.parametrize("lam", (0.0, *GRID_LAMBDA))
def test_hermitian_eigenvalues_lie_in_unit_interval(lam):
    for n in GRID_N:
        eig = fredholm.spectrum(fredholm.KernelSpec(n, lam)).eigenvalues
        assert eig.min() >= -1 - 1e-8
        assert eig.max() < 1 - 1e-6
        if lam == 0:
            assert int(np.sum(np.abs(eig + 1) < 1e-6)) == n


@crit(9, "2 det(I - K_k)/det(I - K_{k+1}) equals kappa_k^2")
@pytest.mark.parametrize("lam", (1.0, 4.0))
def test_determinant_ratio_gives_kappa(lam):
    for k in range(9):
        ratio = 2 * fredholm.fredholm_det(fredholm.KernelSpec(k, lam)) / fredholm.fredholm_det(
            fredholm.KernelSpec(k + 1, lam)
        )
        kappa2 = detform.ortho_poly(k, lam).kappa2
        T_small, T_big = oracles.bessel_toeplitz(lam, k), oracles.bessel_toeplitz(lam, k + 1)
        oracle_kappa2 = (np.linalg.det(T_small) if k else 1.0) / np.linalg.det(T_big)
        assert abs(ratio - kappa2) < 1e-8
        assert abs(kappa2 - oracle_kappa2) < 1e-10 * max(1.0, oracle_kappa2)


@crit(10, "(1 + sqrt t)^-p det(I - sqrt t K_p) tends to 1 at p = 20")
@pytest.mark.parametrize("t", (0.25, 1.0))
def test_large_index_scaled_determinant_is_one(t):
    value = (1 + math.sqrt(t)) ** -20 * fredholm.fredholm_det(fredholm.KernelSpec(20, 1.0, t))
    assert abs(value - 1) < 1e-8


@crit(11, "border structure of the inverse Toeplitz matrix")
@pytest.mark.parametrize("lam", (0.5, 1.0, 4.0))
def test_toeplitz_inverse_border_identity(lam):
    for n in range(1, 11):
        assert detform.toeplitz_inverse_identity(n, lam) < 1e-10


@crit(12, "telescoped log-derivatives of m11 equal the intermediate quadratic sum")
@pytest.mark.parametrize("lam", (1.0, 2.0))
def test_telescoping_identity(lam):
    for n in range(1, 6):
        assert fredholm.telescoping_residual(n, lam) < 1e-9


@pytest.fixture(scope="module")
def limit_table():
    return painleve.f2_cdf(painleve.default_grid())


@crit(13, "Tracy-Widom mean -1.7711 and variance 0.8132")
def test_tracy_widom_moments(limit_table):
    mean, var = painleve.mean_variance(limit_table.grid, limit_table.F1)
    assert abs(mean - (-1.7711)) < 1e-3
    assert abs(var - 0.8132) < 1e-3


@crit(14, "F2 is a CDF dominating F(.;1); variational vs finite-difference t-derivative")
def test_second_row_limit_is_a_dominating_cdf(limit_table):
    F1, F2 = limit_table.F1, limit_table.F2
    assert limit_table.grid[0] == -8.0 and limit_table.grid[-1] == 6.0
    # rounding-level slack only; the curves are smooth at the 1e-12 scale
    assert np.diff(F2).min() >= -1e-14
    assert (F2 - F1).min() >= -1e-14
    assert F2[0] >= 0 and F2[-1] <= 1 + 1e-14


@crit(14, "F2 is a CDF dominating F(.;1); variational vs finite-difference t-derivative")
def test_variational_t_derivative_matches_finite_difference(limit_table):
    fd = painleve.dFdt_finite_difference(limit_table.grid)
    assert np.max(np.abs(fd - limit_table.dFdt)) < 1e-5


def _limit(table, row):
    values = table.F1 if row == 1 else table.F2
    return painleve.cdf_interpolator(table.grid, values), painleve.mean_variance(table.grid, values)[0]


@pytest.mark.slow
@crit(15, "Monte Carlo at N = 1e5, 1e4 samples: KS <= 0.08 and mean within 0.15 per row")
@pytest.mark.parametrize("row", (1, 2))
def test_monte_carlo_ks_distance(desk_scale_samples, limit_table, row):
    cdf, _ = _limit(limit_table, row)
    assert rsk.ks_distance(desk_scale_samples[row - 1], cdf) <= 0.08


@pytest.mark.slow
@crit(15, "Monte Carlo at N = 1e5, 1e4 samples: KS <= 0.08 and mean within 0.15 per row")
@pytest.mark.parametrize("row", (1, 2))
def test_monte_carlo_mean(desk_scale_samples, limit_table, row):
    _, mean = _limit(limit_table, row)
    assert abs(desk_scale_samples[row - 1].mean() - mean) <= 0.15
