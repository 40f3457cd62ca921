"""Morton (Z-order) encoding of velocities and radix sorting of the keys.

Maps 3-D velocity triples onto a one-dimensional, locality-preserving
ordering: normalize each component with the local mean and spread, quantize
to a 2^p grid, interleave the coordinate bits, then sort with an LSD radix
sort that returns a stable permutation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAX_BITS_PER_AXIS = 21  # 3p <= 63 so keys fit in uint64

_M0 = np.uint64(0x1FFFFF)
_M1 = np.uint64(0x1F00000000FFFF)
_M2 = np.uint64(0x1F0000FF0000FF)
_M3 = np.uint64(0x100F00F00F00F00F)
_M4 = np.uint64(0x10C30C30C30C30C3)
_M5 = np.uint64(0x1249249249249249)


def grid_resolution(n_particles: int) -> int:
    """Smallest p with 2^(3p) > n_particles (at least one grid cell spare)."""
    if n_particles < 1:
        raise ValueError("need at least one particle")
    p = (int(n_particles).bit_length() + 2) // 3
    return min(max(p, 1), MAX_BITS_PER_AXIS)


def normalize_velocity(v: np.ndarray, mean: np.ndarray, stddev: np.ndarray) -> np.ndarray:
    """Scale velocity components to [0,1] as (1 + (v - mean)/(3*stddev)) / 2.

    Out-of-range values are clipped.  Components with non-positive spread
    (degenerate single-particle cells) map to the grid center 0.5.
    """
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    mean = np.asarray(mean, dtype=np.float64)
    stddev = np.asarray(stddev, dtype=np.float64)
    ok = stddev > 0.0
    safe = np.where(ok, stddev, 1.0)
    scaled = 0.5 * (1.0 + (v - mean) / (3.0 * safe))
    scaled = np.where(ok, scaled, 0.5)
    return np.clip(scaled, 0.0, 1.0)


def _spread_bits(x: np.ndarray) -> np.ndarray:
    x = x & _M0
    x = (x | (x << np.uint64(32))) & _M1
    x = (x | (x << np.uint64(16))) & _M2
    x = (x | (x << np.uint64(8))) & _M3
    x = (x | (x << np.uint64(4))) & _M4
    x = (x | (x << np.uint64(2))) & _M5
    return x


def _compact_bits(x: np.ndarray) -> np.ndarray:
    x = x & _M5
    x = (x ^ (x >> np.uint64(2))) & _M4
    x = (x ^ (x >> np.uint64(4))) & _M3
    x = (x ^ (x >> np.uint64(8))) & _M2
    x = (x ^ (x >> np.uint64(16))) & _M1
    x = (x ^ (x >> np.uint64(32))) & _M0
    return x


def morton_encode(scaled: np.ndarray, p: int) -> np.ndarray:
    """Morton keys for unit-cube triples on a 2^p-per-axis grid.

    Quantization truncates, with scaled == 1 clamped onto the top grid cell.
    Within each 3-bit group the x coordinate occupies the least significant
    position, then y, then z.
    """
    if not 1 <= p <= MAX_BITS_PER_AXIS:
        raise ValueError(f"bits per axis must be in [1, {MAX_BITS_PER_AXIS}]")
    scaled = np.atleast_2d(np.asarray(scaled, dtype=np.float64))
    side = 1 << p
    i = np.minimum((scaled * side).astype(np.uint64), np.uint64(side - 1))
    return (_spread_bits(i[:, 0])
            | (_spread_bits(i[:, 1]) << np.uint64(1))
            | (_spread_bits(i[:, 2]) << np.uint64(2)))


def morton_decode(keys: np.ndarray) -> np.ndarray:
    """Integer (i_x, i_y, i_z) triples for the given keys, shape (n, 3)."""
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    return np.stack([_compact_bits(keys),
                     _compact_bits(keys >> np.uint64(1)),
                     _compact_bits(keys >> np.uint64(2))], axis=1)


@njit(cache=True)
def _radix_argsort(keys, n_passes):  # pragma: no cover - compiled
    n = keys.shape[0]
    perm = np.arange(n, dtype=np.int64)
    tmp = np.empty(n, dtype=np.int64)
    counts = np.empty(256, dtype=np.int64)
    for pidx in range(n_passes):
        shift = np.uint64(8 * pidx)
        counts[:] = 0
        for i in range(n):
            counts[(keys[perm[i]] >> shift) & np.uint64(0xFF)] += 1
        total = 0
        for v in range(256):
            c = counts[v]
            counts[v] = total
            total += c
        for i in range(n):
            d = (keys[perm[i]] >> shift) & np.uint64(0xFF)
            tmp[counts[d]] = perm[i]
            counts[d] += 1
        perm, tmp = tmp, perm
    return perm


def radix_sort_keys(keys: np.ndarray, key_bits: int | None = None) -> np.ndarray:
    """Stable ascending permutation of Morton keys via LSD counting passes.

    8-bit digits, ceil(key_bits/8) passes; equal keys keep input order.
    """
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    if keys.size == 0:
        return np.empty(0, dtype=np.int64)
    if key_bits is None:
        key_bits = max(int(keys.max()).bit_length(), 1)
    n_passes = (key_bits + 7) // 8
    return _radix_argsort(keys, n_passes)
