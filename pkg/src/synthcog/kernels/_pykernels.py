"""Pure-Python reference implementations of the hot text kernels.

These define the semantics; the Cython module must agree bit-for-bit.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes, state: int = FNV_OFFSET) -> int:
    h = state
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK
    return h


def hashed_tf(tokens: Sequence[str], dim: int) -> np.ndarray:
    """Term-frequency counts of unigrams and bigrams hashed into ``dim`` buckets.

    A bigram hashes as ``"<left> <right>"`` encoded UTF-8.
    """
    out = np.zeros(dim, dtype=np.float64)
    prev = None
    for tok in tokens:
        raw = tok.encode("utf-8")
        h = fnv1a64(raw)
        out[h % dim] += 1.0
        if prev is not None:
            # bigram = FNV state of the left token, continued over b" " + right
            out[fnv1a64(raw, fnv1a64(b" ", prev)) % dim] += 1.0
        prev = h
    return out


def lcs_length(a: Sequence, b: Sequence) -> int:
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            if x == y:
                cur.append(prev[j] + 1)
            else:
                cur.append(cur[j] if cur[j] > prev[j + 1] else prev[j + 1])
        prev = cur
    return prev[-1]
