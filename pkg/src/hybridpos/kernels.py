"""Kernel selection.

The compiled extension is used when it was built; otherwise, or when
``HYBRIDPOS_PURE_PYTHON=1`` is set, the pure-Python implementations are used.
``BACKEND`` names the active choice.
"""
import os

from . import _kernels_py as python

compiled = None
if os.environ.get("HYBRIDPOS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else python
BACKEND = "compiled" if compiled is not None else "python"

first_primes = _impl.first_primes
quat_multiply = _impl.quat_multiply
quat_rotate = _impl.quat_rotate
quat_from_rotation_vector = _impl.quat_from_rotation_vector
apply_homography = _impl.apply_homography

__all__ = [
    "BACKEND", "compiled", "python", "first_primes", "quat_multiply", "quat_rotate",
    "quat_from_rotation_vector", "apply_homography",
]
