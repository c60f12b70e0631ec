"""Portable deterministic random numbers: SplitMix64 with Box-Muller gaussians.

SplitMix64 is counter-based (output i is a pure function of seed and i), so
streams can be generated sequentially or as vectorized slices with identical
results. Synthetic datasets built on it reproduce bit-for-bit across runs.
"""

from __future__ import annotations

import math

import numpy as np

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1

# 53-bit mantissa; uniforms are (z >> 11) * 2**-53 in [0, 1)
_U53 = 2.0**-53


def splitmix64_stream(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs [start, start+count) of the SplitMix64 sequence for `seed`.

    Returns a uint64 array. Output i equals what i+1 sequential state
    advances from `seed` would produce.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + idx * np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """float64 uniforms in [0, 1) from the SplitMix64 stream."""
    return (splitmix64_stream(seed, start, count) >> np.uint64(11)).astype(np.float64) * _U53


def gaussians(seed: int, start: int, count: int) -> np.ndarray:
    """Standard-normal draws via the Box-Muller transform.

    Consumes exactly 2*ceil(count/2) stream outputs beginning at `start`:
    each (u1, u2) pair yields r*cos and r*sin with r = sqrt(-2 ln u1).
    u1 is shifted into (0, 1] so the log is always finite.
    """
    n_pairs = (count + 1) // 2
    raw = splitmix64_stream(seed, start, 2 * n_pairs)
    u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
    u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * _U53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    out = np.empty(2 * n_pairs)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:count]


class SplitMix64:
    """Sequential view of the same stream, for draw-at-a-time consumers."""

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._pos = 0

    @property
    def position(self) -> int:
        return self._pos

    def next_uint64(self) -> int:
        s = (self._seed + (self._pos + 1) * _GAMMA) & _MASK64
        self._pos += 1
        z = ((s ^ (s >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_uint64() >> 11) * _U53

    def next_gaussian_pair(self) -> tuple[float, float]:
        u1 = ((self.next_uint64() >> 11) + 1) * _U53
        u2 = (self.next_uint64() >> 11) * _U53
        r = math.sqrt(-2.0 * math.log(u1))
        return r * math.cos(2.0 * math.pi * u2), r * math.sin(2.0 * math.pi * u2)
