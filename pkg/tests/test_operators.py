import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grayga import operators as ops
from grayga.errors import OperatorError


def bits(s):
    return np.array([int(c) for c in s], dtype=np.uint8)


def text(a):
    return "".join(str(int(v)) for v in a)


def empirical(sel, fit, draws=100_000, seed=0):
    idx = ops.select(sel, fit, draws, np.random.default_rng(seed))
    return np.bincount(idx, minlength=len(fit)) / draws


def within_3_sigma(freq, p, draws=100_000):
    sigma = np.sqrt(np.asarray(p) * (1 - np.asarray(p)) / draws)
    return np.all(np.abs(freq - p) <= 3 * sigma + 1e-12)


def test_roulette_probabilities():
    assert np.allclose(ops.selection_probabilities(ops.ROULETTE, [1, 1, 1, 1]), 0.25)
    assert np.allclose(ops.selection_probabilities(ops.ROULETTE, [3, 1]), [0.75, 0.25])


def test_ranked_probabilities():
    assert np.allclose(ops.selection_probabilities(ops.RANKED, [0.1, 0.2, 0.7]), [1 / 6, 2 / 6, 3 / 6])
    # tied block shares the mean rank (1.5 each)
    assert np.allclose(ops.selection_probabilities(ops.RANKED, [0.5, 0.5, 0.9]), [1.5 / 6, 1.5 / 6, 3 / 6])


def tournament_oracle(fit, size):
    """Exact per-draw probabilities by enumerating all ordered candidate tuples."""
    n = len(fit)
    p = np.zeros(n)
    for cands in itertools.product(range(n), repeat=size):
        best = max(fit[c] for c in cands)
        winners = sorted({c for c in cands if fit[c] == best})
        for w in winners:
            p[w] += 1 / len(winners)
    return p / n ** size


def test_tournament_best_probability():
    fit = np.arange(1, 11) / 10
    p = tournament_oracle(fit, 3)
    assert p[-1] == pytest.approx(1 - 0.9 ** 3)
    assert p[-1] == pytest.approx(0.271)
    assert within_3_sigma(empirical(ops.Selection(ops.TOURNAMENT, 3), fit), p)


def test_tournament_ties_uniform():
    fit = np.array([1.0, 1.0, 0.2, 0.1])
    assert within_3_sigma(empirical(ops.Selection(ops.TOURNAMENT, 2), fit, seed=4), tournament_oracle(fit, 2))


@pytest.mark.parametrize("kind, fit", [(ops.ROULETTE, [3.0, 1.0, 0.5, 2.5]), (ops.RANKED, [0.1, 0.2, 0.7])])
def test_selection_empirical(kind, fit):
    p = ops.selection_probabilities(kind, fit)
    assert within_3_sigma(empirical(ops.Selection(kind), fit, seed=2), p)


def test_selection_errors():
    rng = np.random.default_rng()
    with pytest.raises(OperatorError):
        ops.select(ops.Selection(ops.ROULETTE), [1.0, 0.0], 3, rng)
    with pytest.raises(OperatorError):
        ops.select(ops.Selection(ops.TOURNAMENT), [], 3, rng)
    with pytest.raises(OperatorError):
        ops.Selection(ops.TOURNAMENT, 1)


def test_one_point_example():
    c1, c2 = ops.crossover_binary(ops.ONE_POINT, bits("11111"), bits("00000"), None, cut=3)
    assert (text(c1), text(c2)) == ("11100", "00011")


def test_two_point_convention():
    # cuts (1, 3) exchange the half-open segment [1, 3): positions 1 and 2
    c1, c2 = ops.crossover_binary(ops.TWO_POINT, bits("10101"), bits("01010"), None, cuts=(1, 3))
    assert (text(c1), text(c2)) == ("11001", "00110")


def test_uniform_zero_mask_returns_parents():
    p1, p2 = bits("1100110"), bits("0101011")
    c1, c2 = ops.crossover_binary(ops.UNIFORM, p1, p2, None, mask=np.zeros(7, bool))
    assert np.array_equal(c1, p1) and np.array_equal(c2, p2)


def test_binary_crossover_errors():
    with pytest.raises(OperatorError):
        ops.crossover_binary(ops.ONE_POINT, bits("101"), bits("10"), np.random.default_rng())
    with pytest.raises(OperatorError):
        ops.crossover_binary(ops.ONE_POINT, bits("1"), bits("0"), np.random.default_rng())


@settings(max_examples=100, deadline=None)
@given(length=st.integers(2, 60), seed=st.integers(0, 2 ** 32 - 1),
       kind=st.sampled_from(ops.BINARY_CROSSOVERS))
def test_binary_crossover_locus_conservative(length, seed, kind):
    rng = np.random.default_rng(seed)
    p1 = rng.integers(0, 2, length).astype(np.uint8)
    p2 = rng.integers(0, 2, length).astype(np.uint8)
    c1, c2 = ops.crossover_binary(kind, p1, p2, rng)
    assert np.array_equal(np.sort(np.stack([c1, c2]), axis=0), np.sort(np.stack([p1, p2]), axis=0))


def naive_ox1(keep, fill, i, j):
    """Independent list-based OX1 trace."""
    n = len(keep)
    child = [None] * n
    child[i:j + 1] = keep[i:j + 1]
    order = fill[j + 1:] + fill[:j + 1]
    order = [v for v in order if v not in child[i:j + 1]]
    pos = (j + 1) % n
    for v in order:
        child[pos] = v
        pos = (pos + 1) % n
    return child


def test_ox1_worked_example():
    p1 = [1, 2, 3, 4, 5, 6, 7, 8, 9]
    p2 = [9, 3, 7, 8, 2, 6, 5, 1, 4]
    expected = [3, 8, 2, 4, 5, 6, 7, 1, 9]
    assert naive_ox1(p1, p2, 3, 6) == expected
    c1, c2 = ops.crossover_order(np.array(p1), np.array(p2), None, cuts=(3, 6))
    assert c1.tolist() == expected
    assert c2.tolist() == naive_ox1(p2, p1, 3, 6)


def test_ox1_degenerate_cases():
    p1 = np.array([2, 0, 3, 1, 4])
    p2 = np.array([4, 3, 2, 1, 0])
    c1, _ = ops.crossover_order(p1, p2, None, cuts=(0, 4))
    assert np.array_equal(c1, p1)
    c1, c2 = ops.crossover_order(p1, p1.copy(), np.random.default_rng(0))
    assert np.array_equal(c1, p1) and np.array_equal(c2, p1)
    with pytest.raises(OperatorError):
        ops.crossover_order(p1, p2[:4], None)


def test_ox1_matches_naive_random():
    rng = np.random.default_rng(5)
    for _ in range(300):
        n = int(rng.integers(2, 12))
        p1, p2 = rng.permutation(n), rng.permutation(n)
        i, j = sorted(rng.integers(0, n, 2).tolist())
        c1, c2 = ops.crossover_order(p1, p2, None, cuts=(i, j))
        assert c1.tolist() == naive_ox1(p1.tolist(), p2.tolist(), i, j)


def test_mutate_binary_extremes():
    g = bits("1011001")
    rng = np.random.default_rng(0)
    assert np.array_equal(ops.mutate_binary(g, 0.0, rng), g)
    assert np.array_equal(ops.mutate_binary(g, 1.0, rng), 1 - g)


def test_mutate_binary_flip_rate():
    length, calls = 350, 100_000
    rng = np.random.default_rng(9)
    pop = np.zeros((calls, length), np.uint8)
    flips = ops.mutate_binary(pop, 1 / length, rng).sum(axis=1)
    sigma = math.sqrt((1 - 1 / length) / calls)
    assert abs(flips.mean() - 1.0) < 3 * sigma


@pytest.mark.parametrize("kind, positions, expected", [
    (ops.INVERSION, (1, 3), [1, 4, 3, 2, 5]),
    (ops.SWAP, (0, 4), [5, 2, 3, 4, 1]),
    (ops.SHIFT, (0, 2), [2, 3, 1, 4, 5]),
    (ops.MOVEMENT, (0, 1, 2), [3, 4, 1, 2, 5]),
])
def test_permutation_mutation_examples(kind, positions, expected):
    out = ops.mutate_permutation(kind, np.array([1, 2, 3, 4, 5]), None, positions=positions)
    assert out.tolist() == expected


@pytest.mark.parametrize("kind", ops.PERMUTATION_MUTATIONS)
def test_permutation_mutations_valid(kind):
    rng = np.random.default_rng(13)
    for _ in range(2000):
        n = int(rng.integers(2, 10))
        p = rng.permutation(n)
        out = ops.mutate_permutation(kind, p, rng)
        assert sorted(out.tolist()) == list(range(n))
        assert not np.array_equal(out, p)


def test_permutation_mutation_too_short():
    with pytest.raises(OperatorError):
        ops.mutate_permutation(ops.SWAP, np.array([0]), np.random.default_rng())


@pytest.mark.parametrize("fraction, size, k", [(0.05, 25, 1), (0.05, 10, 1), (0.1, 25, 2), (0.0, 4, 1)])
def test_elite_count(fraction, size, k):
    assert ops.elite_count(fraction, size) == k


def test_elitism_keeps_previous_best():
    prev = np.array([0.2, 0.9, 0.5])
    off = np.array([0.1, 0.3, 0.05])
    donors, slots = ops.apply_elitism(prev, off, 0.05)
    assert donors.tolist() == [1] and slots.tolist() == [2]
    merged = off.copy()
    merged[slots] = prev[donors]
    assert merged.max() == 0.9


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 40), frac=st.floats(0, 0.5), seed=st.integers(0, 2 ** 32 - 1))
def test_elitism_never_lowers_best(n, frac, seed):
    rng = np.random.default_rng(seed)
    prev, off = rng.random(n), rng.random(n)
    donors, slots = ops.apply_elitism(prev, off, frac)
    merged = off.copy()
    merged[slots] = prev[donors]
    assert merged.max() >= prev.max()
    assert len(merged) == n


def test_elitism_size_mismatch():
    with pytest.raises(OperatorError):
        ops.apply_elitism([1.0, 2.0], [1.0], 0.05)
