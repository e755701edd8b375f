"""Grid encoding of real vectors as fixed-width bit strings.

Each variable is discretised on the lattice ``lower + v * step`` for
``v = 0 .. M-1`` and stored as ``bits_per_var`` bits, most significant bit
first.  Gray genomes store the reflected Gray code of ``v``.  Codes at or
above ``M`` (possible when ``M`` is not a power of two) are clamped to the
top lattice point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

PLAIN = "plain"
GRAY = "gray"
PERMUTATION = "permutation"
GENOME_KINDS = (PLAIN, GRAY, PERMUTATION)


@dataclass(frozen=True)
class GridSpec:
    lower: float
    upper: float
    step: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper) and math.isfinite(self.step)):
            raise ConfigurationError(f"non-finite grid {self}")
        if self.step <= 0:
            raise ConfigurationError(f"grid step must be positive, got {self.step}")
        if self.upper <= self.lower:
            raise ConfigurationError(f"upper ({self.upper}) must exceed lower ({self.lower})")
        if self.point_count < 2:
            raise ConfigurationError(f"grid {self} has fewer than two points")

    @property
    def point_count(self) -> int:
        span = (self.upper - self.lower) / self.step
        nearest = round(span)
        # 200 / 1e-4 lands a hair below 2e6 in floating point
        if abs(span - nearest) <= 1e-9 * max(1.0, span):
            return int(nearest) + 1
        return int(math.floor(span)) + 1

    @property
    def bits(self) -> int:
        return bits_per_var(self)


def bits_per_var(spec: GridSpec) -> int:
    """Smallest bit width whose code space covers every lattice point."""
    return (spec.point_count - 1).bit_length()


def binary_to_gray(v: int) -> int:
    return v ^ (v >> 1)


def gray_to_binary(g: int) -> int:
    v = g
    shift = g >> 1
    while shift:
        v ^= shift
        shift >>= 1
    return v


def _slice_values(bits: np.ndarray, nbits: int, kind: str) -> np.ndarray:
    """Unsigned integers held in the trailing axis of ``bits`` (shape (..., nbits))."""
    bits = np.asarray(bits, dtype=np.uint8)
    if kind == GRAY:
        # b_k = g_0 ^ g_1 ^ ... ^ g_k with MSB first
        bits = np.bitwise_xor.accumulate(bits, axis=-1)
    elif kind != PLAIN:
        raise ConfigurationError(f"cannot decode genome kind {kind!r}")
    weights = np.left_shift(np.uint64(1), np.arange(nbits - 1, -1, -1, dtype=np.uint64))
    return (bits.astype(np.uint64) * weights).sum(axis=-1, dtype=np.uint64)


def decode_var(bits, spec: GridSpec, kind: str = GRAY) -> float:
    nbits = bits_per_var(spec)
    bits = np.asarray(bits)
    if bits.shape != (nbits,):
        raise ConfigurationError(f"expected {nbits} bits, got shape {bits.shape}")
    u = int(_slice_values(bits, nbits, kind))
    v = min(u, spec.point_count - 1)
    return spec.lower + v * spec.step


def decode_genome(bits, spec: GridSpec, dim: int, kind: str = GRAY) -> np.ndarray:
    """Decode one genome (1-D) or a population (2-D, one genome per row).

    Returns an array of shape ``(dim,)`` or ``(n, dim)``.
    """
    nbits = bits_per_var(spec)
    bits = np.asarray(bits)
    if bits.shape[-1] != dim * nbits:
        raise ValueError(f"genome length {bits.shape[-1]} != {dim} x {nbits}")
    u = _slice_values(bits.reshape(bits.shape[:-1] + (dim, nbits)), nbits, kind)
    v = np.minimum(u, np.uint64(spec.point_count - 1)).astype(np.float64)
    x = spec.lower + v * spec.step
    # guard against rounding past the bounds at the top of the lattice
    return np.clip(x, spec.lower, spec.upper)


def random_genome(kind: str, length: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random genome: i.i.d. fair bits, or a uniform permutation of ``range(length)``."""
    if length <= 0:
        raise ConfigurationError("genome length must be positive")
    if kind == PERMUTATION:
        return rng.permutation(length)
    if kind not in (PLAIN, GRAY):
        raise ConfigurationError(f"unknown genome kind {kind!r}")
    return rng.integers(0, 2, size=length, dtype=np.uint8)


def random_population(kind: str, size: int, length: int, rng: np.random.Generator) -> np.ndarray:
    if kind == PERMUTATION:
        return np.stack([rng.permutation(length) for _ in range(size)])
    if kind not in (PLAIN, GRAY):
        raise ConfigurationError(f"unknown genome kind {kind!r}")
    return rng.integers(0, 2, size=(size, length), dtype=np.uint8)
