"""Kernel backend selection.

The compiled ``_kernels`` extension is used when importable; otherwise, or
when ``PODIUM_DP_PURE_PYTHON`` is set to a non-empty value, the numpy
implementations in ``_kernels_py`` are used. Both produce the same records up
to last-ulp differences in ``log1p``.
"""
import os

from . import _kernels_py

if os.environ.get("PODIUM_DP_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

podium_sample = _impl.podium_sample
laplace_sample = _impl.laplace_sample
staircase_sample = _impl.staircase_sample
pair_log_ratio_scan = _impl.pair_log_ratio_scan
