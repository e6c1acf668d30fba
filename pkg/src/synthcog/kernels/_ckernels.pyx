# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the text kernels in ``_pykernels``."""
import numpy as np

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, free

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL


cdef inline uint64_t _fnv(const unsigned char* data, Py_ssize_t n, uint64_t h) nogil:
    cdef Py_ssize_t i
    for i in range(n):
        h ^= data[i]
        h *= FNV_PRIME
    return h


def fnv1a64(bytes data, state=None):
    cdef uint64_t h = FNV_OFFSET if state is None else <uint64_t>state
    return _fnv(<const unsigned char*>data, len(data), h)


def hashed_tf(tokens, Py_ssize_t dim):
    out = np.zeros(dim, dtype=np.float64)
    cdef double[:] view = out
    cdef uint64_t h, prev = 0, space
    cdef bint have_prev = False
    cdef bytes raw
    cdef const unsigned char* sp = b" "
    for tok in tokens:
        raw = (<str>tok).encode("utf-8")
        h = _fnv(<const unsigned char*>raw, len(raw), FNV_OFFSET)
        view[h % <uint64_t>dim] += 1.0
        if have_prev:
            space = _fnv(sp, 1, prev)
            view[_fnv(<const unsigned char*>raw, len(raw), space) % <uint64_t>dim] += 1.0
        prev = h
        have_prev = True
    return out


def lcs_length(a, b):
    cdef Py_ssize_t n, m, i, j
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    ids = {}
    for x in b:
        if x not in ids:
            ids[x] = len(ids)
    n = len(a)
    m = len(b)
    cdef long* aa = <long*>malloc(n * sizeof(long))
    cdef long* bb = <long*>malloc(m * sizeof(long))
    cdef long* prev = <long*>malloc((m + 1) * sizeof(long))
    cdef long* cur = <long*>malloc((m + 1) * sizeof(long))
    cdef long* tmp
    cdef long result
    try:
        for i in range(n):
            aa[i] = ids.get(a[i], -1)
        for j in range(m):
            bb[j] = ids[b[j]]
        for j in range(m + 1):
            prev[j] = 0
        for i in range(n):
            cur[0] = 0
            for j in range(m):
                if aa[i] == bb[j]:
                    cur[j + 1] = prev[j] + 1
                elif cur[j] > prev[j + 1]:
                    cur[j + 1] = cur[j]
                else:
                    cur[j + 1] = prev[j + 1]
            tmp = prev
            prev = cur
            cur = tmp
        result = prev[m]
    finally:
        free(aa)
        free(bb)
        free(prev)
        free(cur)
    return result
