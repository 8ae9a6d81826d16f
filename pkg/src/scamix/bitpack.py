"""Bit packing and popcount for binary diagrams.

Binary space-time diagrams pack 64 cells per machine word so that Hamming
distances reduce to XOR plus popcount; that keeps the large pairwise-distance
grids cheap.
"""

from __future__ import annotations

import numpy as np

_WORD_BYTES = 8

if hasattr(np, "bitwise_count"):
    def popcount(words: np.ndarray) -> np.ndarray:
        return np.bitwise_count(words)
else:  # older numpy: 8-bit lookup table
    _TABLE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)

    def popcount(words: np.ndarray) -> np.ndarray:
        by = words.view(np.uint8).reshape(words.shape + (_WORD_BYTES,))
        return _TABLE[by].sum(axis=-1, dtype=np.int64)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack 0/1 cells along the last axis into uint64 words (zero padded)."""
    packed = np.packbits(bits.astype(np.uint8), axis=-1)
    pad = (-packed.shape[-1]) % _WORD_BYTES
    if pad:
        shape = packed.shape[:-1] + (pad,)
        packed = np.concatenate([packed, np.zeros(shape, dtype=np.uint8)], axis=-1)
    return np.ascontiguousarray(packed).view(np.uint64)


def hamming_packed(a: np.ndarray, b: np.ndarray) -> int:
    """Number of differing bits between two packed arrays of equal shape."""
    return int(popcount(np.bitwise_xor(a, b)).sum())
