"""Hot text kernels: compiled when available, pure Python otherwise.

Set ``SYNTHCOG_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

from . import _pykernels as python_impl

compiled_impl = None
if os.environ.get("SYNTHCOG_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as compiled_impl
    except ImportError:  # extension not built
        compiled_impl = None

_impl = compiled_impl if compiled_impl is not None else python_impl

BACKEND = "cython" if compiled_impl is not None else "python"

fnv1a64 = _impl.fnv1a64
hashed_tf = _impl.hashed_tf
lcs_length = _impl.lcs_length

__all__ = ["BACKEND", "fnv1a64", "hashed_tf", "lcs_length", "python_impl", "compiled_impl"]
