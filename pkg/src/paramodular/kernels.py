"""Kernel dispatch: compiled int64 routines when available, Python otherwise.

The compiled module is optional.  ``BACKEND`` names the active choice and
the environment variable ``PARAMODULAR_KERNELS=python`` forces the fallback.
Compiled kernels raise OverflowError on int64 overflow; the wrappers here
retry with Python integers so callers always get exact results.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_c = None
if os.environ.get("PARAMODULAR_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _c
    except ImportError:  # pragma: no cover - depends on the build
        _c = None

BACKEND = "cython" if _c is not None else "python"

_I64 = np.int64


def to_i64(block):
    """Return an int64 copy/view of ``block`` or None if it does not fit."""
    if isinstance(block, np.ndarray) and block.dtype == _I64:
        return block
    try:
        return np.asarray(block, dtype=_I64)
    except (OverflowError, TypeError):
        return None


def to_obj(block):
    if block.dtype == object:
        return block
    return block.astype(object)


def set_backend(name: str):
    """Switch kernels at runtime (used by the benchmark and tests)."""
    global BACKEND
    if name == "cython" and _c is None:
        raise RuntimeError("compiled kernels are not built")
    if name not in ("cython", "python"):
        raise ValueError(name)
    BACKEND = name


def shift_accumulate(src, dst, terms):
    """Return ``dst + sum(c * shift(src, dq, dz))`` over ``terms``.

    ``terms`` is a list of (dq, dz, c); ``dst`` is not modified.
    """
    if not terms:
        return dst.copy()
    dq = np.array([t[0] for t in terms], dtype=_I64)
    dz = np.array([t[1] for t in terms], dtype=_I64)
    coefs = [t[2] for t in terms]
    if BACKEND == "cython":
        s64, d64 = to_i64(src), to_i64(dst)
        cf = to_i64(np.array(coefs, dtype=object))
        if s64 is not None and d64 is not None and cf is not None:
            out = np.ascontiguousarray(d64).copy()
            try:
                _c.shift_accumulate(np.ascontiguousarray(s64), out, dq, dz, cf)
                return out
            except OverflowError:
                pass
    out = to_obj(dst).copy()
    _pykernels.shift_accumulate(to_obj(src), out, dq, dz, coefs)
    return out


def conv2d(a, b, rows):
    if BACKEND == "cython":
        a64, b64 = to_i64(a), to_i64(b)
        if a64 is not None and b64 is not None:
            try:
                return _c.conv2d(np.ascontiguousarray(a64), np.ascontiguousarray(b64), rows)
            except OverflowError:
                pass
    return _pykernels.conv2d(to_obj(a), to_obj(b), rows)


def poly_divmod(a, b):
    if BACKEND == "cython":
        a64, b64 = to_i64(a), to_i64(b)
        if a64 is not None and b64 is not None:
            try:
                return _c.poly_divmod(np.ascontiguousarray(a64), np.ascontiguousarray(b64))
            except OverflowError:
                pass
    return _pykernels.poly_divmod(a, b)


def dfs_multisets(*args):
    """Compiled multiset search, or None when only the Python backend is active."""
    if BACKEND == "cython":
        return _c.dfs_multisets(*args)
    return None
