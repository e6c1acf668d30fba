import numpy as np
import pytest
from hypothesis import given, strategies as st

from synthcog import kernels
from synthcog.kernels import python_impl

compiled = kernels.compiled_impl
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")

tokens = st.lists(st.text(alphabet="abcxyzé", min_size=1, max_size=6), max_size=30)


def test_fnv_reference_vectors():
    # published FNV-1a 64-bit test vectors
    assert python_impl.fnv1a64(b"") == 0xCBF29CE484222325
    assert python_impl.fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert python_impl.fnv1a64(b"foobar") == 0x85944171F73967E8


def test_bigram_hash_is_joined_string():
    tf = python_impl.hashed_tf(["ab", "cd"], 1 << 16)
    expected = np.zeros(1 << 16)
    for s in (b"ab", b"cd", b"ab cd"):
        expected[python_impl.fnv1a64(s) % (1 << 16)] += 1
    assert np.array_equal(tf, expected)


def test_lcs_small_cases():
    assert python_impl.lcs_length("abcbdab", "bdcaba") == 4
    assert python_impl.lcs_length([], ["a"]) == 0


@needs_compiled
def test_backend_selected():
    assert kernels.BACKEND == "cython"


@needs_compiled
@given(st.binary(max_size=64))
def test_fnv_parity(data):
    assert compiled.fnv1a64(data) == python_impl.fnv1a64(data)


@needs_compiled
@given(tokens, st.integers(1, 512))
def test_hashed_tf_parity(toks, dim):
    assert np.array_equal(compiled.hashed_tf(toks, dim), python_impl.hashed_tf(toks, dim))


@needs_compiled
@given(tokens, tokens)
def test_lcs_parity(a, b):
    assert compiled.lcs_length(a, b) == python_impl.lcs_length(a, b)
