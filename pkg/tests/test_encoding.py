import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grayga.encoding import (GRAY, PERMUTATION, PLAIN, GridSpec, binary_to_gray, bits_per_var,
                             decode_genome, decode_var, gray_to_binary, random_genome)
from grayga.errors import ConfigurationError


def brute_bits(m):
    b = 0
    while 2 ** b < m:
        b += 1
    return b


@pytest.mark.parametrize("lower, upper, step, expected", [
    (0, 1, 1, 1),
    (-100, 100, 1e-4, 21),
    (-100, 100, 1e-8, 35),
])
def test_bits_per_var_examples(lower, upper, step, expected):
    spec = GridSpec(lower, upper, step)
    assert bits_per_var(spec) == expected
    assert brute_bits(spec.point_count) == expected
    assert 2 ** (expected - 1) < spec.point_count <= 2 ** expected


def test_point_counts():
    assert GridSpec(-100, 100, 1e-4).point_count == 2_000_001
    assert GridSpec(-100, 100, 1e-8).point_count == 20_000_000_001
    assert GridSpec(0, 1, 0.3).point_count == 4


@pytest.mark.parametrize("lower, upper, step", [(0, 1, 0), (0, 1, -1), (1, 1, 0.1), (2, 1, 0.1), (0, 1, 5)])
def test_invalid_grid(lower, upper, step):
    with pytest.raises(ConfigurationError):
        GridSpec(lower, upper, step)


@pytest.mark.parametrize("v, g", [(0, 0), (2, 3), (5, 7)])
def test_gray_examples(v, g):
    assert binary_to_gray(v) == g
    assert gray_to_binary(g) == v


def test_gray_roundtrip_and_adjacency_exhaustive():
    for v in range(2 ** 16):
        assert gray_to_binary(binary_to_gray(v)) == v
    for v in range(2 ** 16 - 1):
        assert bin(binary_to_gray(v) ^ binary_to_gray(v + 1)).count("1") == 1


def to_bits(u, n):
    return np.array([(u >> (n - 1 - k)) & 1 for k in range(n)], dtype=np.uint8)


def test_decode_var_examples():
    spec = GridSpec(0, 1, 0.5)
    assert bits_per_var(spec) == 2
    assert decode_var(np.zeros(2, np.uint8), spec, PLAIN) == 0.0
    assert decode_var(to_bits(2, 2), spec, PLAIN) == 1.0
    assert decode_var(to_bits(3, 2), spec, PLAIN) == 1.0  # clamped
    # gray code 11 decodes to binary 10 = 2
    assert decode_var(to_bits(3, 2), spec, GRAY) == 1.0
    assert decode_var(to_bits(1, 2), spec, GRAY) == 0.5


def test_decode_gray_matches_scalar_oracle():
    spec = GridSpec(-3, 5, 0.25)
    n = bits_per_var(spec)
    rng = np.random.default_rng(1)
    for _ in range(200):
        g = int(rng.integers(0, 2 ** n))
        v = min(gray_to_binary(g), spec.point_count - 1)
        assert decode_var(to_bits(g, n), spec, GRAY) == pytest.approx(-3 + 0.25 * v)


def test_decode_genome_examples():
    spec = GridSpec(-100, 100, 1e-4)
    x = decode_genome(np.zeros(3 * 21, np.uint8), spec, 3)
    assert x.tolist() == [-100.0, -100.0, -100.0]
    bits = np.random.default_rng(0).integers(0, 2, 21).astype(np.uint8)
    assert decode_genome(bits, spec, 1)[0] == decode_var(bits, spec, GRAY)


def test_decode_population_rows_match_single():
    spec = GridSpec(-100, 100, 1e-8)
    pop = np.random.default_rng(3).integers(0, 2, (7, 4 * 35)).astype(np.uint8)
    batch = decode_genome(pop, spec, 4)
    for row, x in zip(pop, batch):
        assert np.array_equal(decode_genome(row, spec, 4), x)


@settings(max_examples=200, deadline=None)
@given(lower=st.floats(-1e3, 1e3), width=st.floats(1e-2, 1e3), frac=st.floats(1e-4, 0.5),
       seed=st.integers(0, 2 ** 32 - 1), kind=st.sampled_from([PLAIN, GRAY]))
def test_decoded_values_on_lattice(lower, width, frac, seed, kind):
    spec = GridSpec(lower, lower + width, width * frac)
    dim = 3
    bits = np.random.default_rng(seed).integers(0, 2, dim * spec.bits).astype(np.uint8)
    x = decode_genome(bits, spec, dim, kind)
    assert np.all(x >= spec.lower) and np.all(x <= spec.upper)
    k = (x - spec.lower) / spec.step
    assert np.allclose(k, np.round(k), rtol=1e-9, atol=1e-6)


def test_bits_minimal_random_specs():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        lower = rng.uniform(-1e3, 1e3)
        spec = GridSpec(lower, lower + rng.uniform(0.1, 1e3), 10 ** rng.uniform(-8, 0))
        b = bits_per_var(spec)
        assert b == brute_bits(spec.point_count)


def test_random_genome_ones_statistics():
    rng = np.random.default_rng(11)
    length = 64
    ones = np.array([random_genome(PLAIN, length, rng).sum() for _ in range(10_000)])
    sigma = math.sqrt(length * 0.25 / 10_000)
    assert abs(ones.mean() - length / 2) < 3 * sigma


def test_random_permutation_valid():
    rng = np.random.default_rng(0)
    for _ in range(100):
        assert sorted(random_genome(PERMUTATION, 5, rng).tolist()) == [0, 1, 2, 3, 4]


def test_random_genome_rejects_empty():
    with pytest.raises(ConfigurationError):
        random_genome(PLAIN, 0, np.random.default_rng())
