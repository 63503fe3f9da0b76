"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Set ``HLINV_KERNELS=python`` to force the pure-Python path.  Compiled calls
that overflow 64-bit arithmetic are transparently retried in Python, so the
results never depend on the backend.
"""
import os

from . import _kernels_py as _py

_c = None
if os.environ.get("HLINV_KERNELS", "").lower() not in ("py", "python", "pure"):
    try:
        from . import _kernels as _c
    except ImportError:  # extension not built
        _c = None

BACKEND = "cython" if _c is not None else "python"


def _dispatch(name, *args):
    if _c is not None:
        try:
            return getattr(_c, name)(*args)
        except OverflowError:
            pass
    return getattr(_py, name)(*args)


def selection_coefficients(levels, circles, signs, dims):
    return _dispatch("selection_coefficients", levels, circles, signs, tuple(dims))


def low_rank_scan(residual, dims, axis_vectors, start, stop, q):
    return _dispatch("low_rank_scan", residual, tuple(dims), axis_vectors, start, stop, q)


def hyperdet_fixed(entries, m, d):
    return _dispatch("hyperdet_fixed", entries, m, d)


is_rank_le_one = _py.is_rank_le_one
max_flattening_rank_le = _py.max_flattening_rank_le
