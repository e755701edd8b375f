"""Selection, crossover, mutation and elitism operators.

Genomes are numpy arrays: ``uint8`` bit vectors for binary kinds and integer
permutations of ``range(n)`` for the permutation kind.  Every random choice
goes through the ``numpy.random.Generator`` passed in, so results are
reproducible from a seed.  Operators that take explicit cut points
(``cut=``, ``cuts=``) skip the random draw; tests use that to pin cases.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import OperatorError

TOURNAMENT = "tournament"
RANKED = "ranked"
ROULETTE = "roulette"
SELECTIONS = (TOURNAMENT, RANKED, ROULETTE)

ONE_POINT = "one_point"
TWO_POINT = "two_point"
UNIFORM = "uniform"
ORDER_OX1 = "ox1"
BINARY_CROSSOVERS = (ONE_POINT, TWO_POINT, UNIFORM)
CROSSOVERS = BINARY_CROSSOVERS + (ORDER_OX1,)

BITFLIP = "bitflip"
INVERSION = "inversion"
SWAP = "swap"
SHIFT = "shift"
MOVEMENT = "movement"
PERMUTATION_MUTATIONS = (INVERSION, SWAP, SHIFT, MOVEMENT)
MUTATIONS = (BITFLIP,) + PERMUTATION_MUTATIONS


@dataclass(frozen=True)
class Selection:
    kind: str = TOURNAMENT
    size: int = 3

    def __post_init__(self):
        if self.kind not in SELECTIONS:
            raise OperatorError(f"unknown selection {self.kind!r}")
        if self.kind == TOURNAMENT and self.size < 2:
            raise OperatorError("tournament size must be at least 2")


def selection_probabilities(kind: str, fitnesses) -> np.ndarray:
    """Closed-form per-draw selection probabilities for roulette and ranked."""
    f = np.asarray(fitnesses, dtype=float)
    if f.size == 0:
        raise OperatorError("cannot select from an empty population")
    if kind == ROULETTE:
        if np.any(f <= 0) or not np.all(np.isfinite(f)):
            raise OperatorError("roulette selection needs strictly positive finite fitness")
        return f / f.sum()
    if kind == RANKED:
        # ties share the mean rank of their block
        ranks = rankdata(f, method="average")
        return ranks / ranks.sum()
    raise OperatorError(f"no closed-form probabilities for {kind!r}")


def select(selection: Selection, fitnesses, count: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``count`` parents drawn independently; higher fitness is better."""
    f = np.asarray(fitnesses, dtype=float)
    n = f.size
    if n == 0:
        raise OperatorError("cannot select from an empty population")
    if selection.kind == TOURNAMENT:
        cands = rng.integers(0, n, size=(count, selection.size))
        cf = f[cands]
        is_best = cf == cf.max(axis=1, keepdims=True)
        # uniform tie-break: random key, zeroed for non-winners
        keys = rng.random(cands.shape) * is_best
        return cands[np.arange(count), keys.argmax(axis=1)]
    p = selection_probabilities(selection.kind, f)
    return rng.choice(n, size=count, p=p)


def _check_pair(p1: np.ndarray, p2: np.ndarray):
    if p1.shape != p2.shape or p1.ndim != 1:
        raise OperatorError(f"parent shape mismatch: {p1.shape} vs {p2.shape}")


def crossover_binary(kind: str, p1, p2, rng: np.random.Generator, *, cut=None, cuts=None, mask=None):
    """Recombine two bit strings, returning two children.

    one_point: cut ``c`` in [1, L-1]; child1 = p1[:c] + p2[c:].
    two_point: cuts ``i < j`` with i in [1, L-2], j in (i, L-1]; the
    half-open segment [i, j) is exchanged.
    uniform: fair-coin mask; child1 takes p2 where the mask is set.
    """
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    _check_pair(p1, p2)
    length = p1.size
    if length < 2:
        raise OperatorError("binary crossover needs genomes of length >= 2")
    c1 = p1.copy()
    c2 = p2.copy()
    if kind == ONE_POINT:
        c = int(rng.integers(1, length)) if cut is None else cut
        c1[c:] = p2[c:]
        c2[c:] = p1[c:]
    elif kind == TWO_POINT:
        if cuts is None:
            if length < 3:
                # no room for two interior cuts; fall back to a single cut
                i, j = 1, length
            else:
                i = int(rng.integers(1, length - 1))
                j = int(rng.integers(i + 1, length))
        else:
            i, j = cuts
        c1[i:j] = p2[i:j]
        c2[i:j] = p1[i:j]
    elif kind == UNIFORM:
        m = rng.random(length) < 0.5 if mask is None else np.asarray(mask, dtype=bool)
        c1[m] = p2[m]
        c2[m] = p1[m]
    else:
        raise OperatorError(f"{kind!r} is not a binary crossover")
    return c1, c2


def _ox1_child(keep, fill, i, j):
    n = keep.size
    child = np.empty_like(keep)
    child[i:j + 1] = keep[i:j + 1]
    present = set(keep[i:j + 1].tolist())
    donors = [v for v in np.roll(fill, -(j + 1)).tolist() if v not in present]
    slots = [(j + 1 + k) % n for k in range(n - (j - i + 1))]
    child[slots] = donors
    return child


def crossover_order(p1, p2, rng: np.random.Generator, *, cuts=None):
    """Order crossover (OX1) on two permutations.

    child1 keeps ``p1[i..j]`` (inclusive) in place and fills the remaining
    slots, starting after ``j`` and wrapping, with p2's other elements read
    in p2 order from position ``j + 1``.
    """
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    _check_pair(p1, p2)
    n = p1.size
    if n < 2:
        raise OperatorError("OX1 needs permutations of length >= 2")
    if cuts is None:
        i, j = sorted(int(a) for a in rng.integers(0, n, size=2))
    else:
        i, j = cuts
    return _ox1_child(p1, p2, i, j), _ox1_child(p2, p1, i, j)


def mutate_binary(genome, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit independently with probability ``rate``.

    Works on a single genome or a 2-D population alike.
    """
    g = np.asarray(genome, dtype=np.uint8)
    if not 0.0 <= rate <= 1.0:
        raise OperatorError(f"mutation rate {rate} outside [0, 1]")
    flips = rng.random(g.shape) < rate
    return g ^ flips.astype(np.uint8)


def _two_distinct(n, rng):
    i, j = rng.choice(n, size=2, replace=False)
    return int(i), int(j)


def mutate_permutation(kind: str, perm, rng: np.random.Generator, *, positions=None) -> np.ndarray:
    """Permutation mutations.

    inversion ``(i, j)``: reverse ``p[i..j]`` inclusive.
    swap ``(i, j)``: exchange two elements.
    shift ``(i, j)``: remove the element at ``i`` and reinsert it at index ``j``.
    movement ``(i, j, d)``: cut out the block ``p[i..j]`` and reinsert it at
    index ``d`` of the remainder, ``d != i``.
    """
    p = np.asarray(perm)
    n = p.size
    if n < 2:
        raise OperatorError("permutation mutation needs length >= 2")
    out = p.copy()
    if kind == INVERSION:
        i, j = positions if positions is not None else sorted(_two_distinct(n, rng))
        out[i:j + 1] = p[i:j + 1][::-1]
        return out
    if kind == SWAP:
        i, j = positions if positions is not None else _two_distinct(n, rng)
        out[i], out[j] = p[j], p[i]
        return out
    if kind == SHIFT:
        i, j = positions if positions is not None else _two_distinct(n, rng)
        rest = np.delete(p, i)
        return np.insert(rest, j, p[i])
    if kind == MOVEMENT:
        if positions is not None:
            i, j, d = positions
        else:
            # block shorter than n so there is somewhere else to put it
            i = int(rng.integers(0, n))
            j = int(rng.integers(i, min(n, i + n - 1)))
            choices = [d for d in range(n - (j - i + 1) + 1) if d != i]
            d = int(rng.choice(choices))
        block = p[i:j + 1]
        rest = np.concatenate([p[:i], p[j + 1:]])
        return np.concatenate([rest[:d], block, rest[d:]])
    raise OperatorError(f"unknown permutation mutation {kind!r}")


def elite_count(fraction: float, size: int) -> int:
    if not 0.0 <= fraction < 1.0:
        raise OperatorError(f"elitism fraction {fraction} outside [0, 1)")
    return max(1, int(np.floor(fraction * size)))


def apply_elitism(prev_fitness, offspring_fitness, fraction: float, rng=None, mode: str = "best"):
    """Plan the elite transfer between two generations.

    Returns ``(donors, slots)``: indices into the previous generation whose
    individuals overwrite the offspring at ``slots`` (the worst offspring).
    ``mode="random"`` transfers randomly chosen previous individuals instead
    of the best ones.
    """
    prev = np.asarray(prev_fitness, dtype=float)
    off = np.asarray(offspring_fitness, dtype=float)
    if prev.shape != off.shape:
        raise OperatorError(f"generation sizes differ: {prev.size} vs {off.size}")
    k = elite_count(fraction, prev.size)
    if mode == "best":
        donors = np.argsort(-prev, kind="stable")[:k]
    elif mode == "random":
        if rng is None:
            raise OperatorError("random elitism needs an rng")
        donors = rng.choice(prev.size, size=k, replace=False)
    else:
        raise OperatorError(f"unknown elitism mode {mode!r}")
    slots = np.argsort(off, kind="stable")[:k]
    return donors, slots
