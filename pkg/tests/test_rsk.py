import itertools
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from plancherel import combinat, rsk


def test_small_insertion_shape():
    assert rsk.rsk_shape([3, 1, 2]) == (2, 1)
    assert rsk.rsk_shape([1, 2, 3, 4]) == (4,)
    assert rsk.rsk_shape([4, 3, 2, 1]) == (1, 1, 1, 1)
    assert rsk.rsk_shape([]) == ()


def test_rejects_non_permutations():
    with pytest.raises(ValueError):
        rsk.rsk_shape([1, 1, 2])
    with pytest.raises(ValueError):
        rsk.rsk_shape([0, 1])


@pytest.mark.parametrize("N", range(1, 7))
def test_shape_frequencies_are_squared_dimensions(N):
    counts = Counter(rsk.rsk_shape(p) for p in itertools.permutations(range(1, N + 1)))
    assert counts == {mu: combinat.dim_hook(mu) ** 2 for mu in combinat.partitions_of(N)}


@pytest.mark.parametrize("N", (8, 9))
def test_greene_on_sampled_permutations(N):
    rnd = random.Random(N)
    for _ in range(25):
        perm = rnd.sample(range(1, N + 1), N)
        shape = rsk.rsk_shape(perm)
        assert rsk.greene_k_increasing(perm, 2) == sum(shape[:2])
        assert oracles.longest_k_increasing(perm, 2) == sum(shape[:2])
        assert rsk.greene_k_increasing(perm, 3) == sum(shape[:3])


def test_greene_oracle_is_capped():
    with pytest.raises(RuntimeError):
        rsk.greene_k_increasing(list(range(1, 15)), 2)


@settings(max_examples=60, deadline=None)
@given(st.permutations(list(range(1, 101))))
def test_two_row_kernel_matches_full_insertion(perm):
    shape = rsk.rsk_shape(perm)
    assert rsk.two_row_lengths(perm) == (shape[0], shape[1] if len(shape) > 1 else 0)
    assert rsk.longest_increasing(perm) == shape[0]


def test_sampling_is_reproducible_across_workers():
    a = rsk.sample_row_lengths(300, 150, seed=11, workers=1)
    b = rsk.sample_row_lengths(300, 150, seed=11, workers=3)
    c = rsk.sample_row_lengths(300, 150, seed=11)
    assert a.shape == (150, 2)
    assert np.array_equal(a, b) and np.array_equal(a, c)
    assert not np.array_equal(a, rsk.sample_row_lengths(300, 150, seed=12))


def test_sample_prefix_is_stable():
    """Chunked streams mean a smaller count is a prefix of a larger one."""
    short = rsk.sample_row_lengths(200, 64, seed=3)
    long = rsk.sample_row_lengths(200, 200, seed=3)
    assert np.array_equal(short, long[:64])


def test_scaled_samples_are_read_only():
    s = rsk.sample_scaled(2, 400, 10, seed=0)
    assert s.count == 10 and s.k == 2
    with pytest.raises(ValueError):
        s.samples[0] = 0.0


def test_scaling():
    assert np.allclose(rsk.scale_lengths([20], 100), 0.0)
    assert np.allclose(rsk.scale_lengths([30], 100), 10 / 100 ** (1 / 6))


def test_empirical_cdf_and_ks():
    data = np.array([0.1, 0.4, 0.4, 0.9])
    assert np.allclose(rsk.empirical_cdf(data, [0.0, 0.4, 1.0]), [0.0, 0.75, 1.0])
    assert rsk.ks_distance(np.array([0.5]), lambda x: np.clip(x, 0, 1)) == pytest.approx(0.5)
    rng = np.random.default_rng(1)
    assert rsk.ks_distance(rng.random(20000), lambda x: np.clip(x, 0, 1)) < 0.02
    with pytest.raises(ValueError):
        rsk.ks_distance(np.array([]), lambda x: x)


def test_small_size_sampler_matches_exact_law():
    N = 12
    lengths = rsk.sample_row_lengths(N, 4000, seed=5)
    for k in (1, 2):
        weights = combinat.row_length_weights(k, N)
        total = sum(weights.values())
        for n in sorted(weights):
            exact = sum(w for length, w in weights.items() if length <= n) / total
            assert abs((lengths[:, k - 1] <= n).mean() - exact) < 0.03
