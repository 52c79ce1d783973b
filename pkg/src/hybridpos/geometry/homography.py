"""Planar perspective transforms from four point correspondences."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .. import kernels


class SingularTransformError(ValueError):
    """A transform (or the system defining it) is not invertible."""


def _collinear(a, b, c, tol=1e-9) -> bool:
    area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = max(1.0, abs(b[0] - a[0]) + abs(b[1] - a[1])) * max(1.0, abs(c[0] - a[0]) + abs(c[1] - a[1]))
    return abs(area2) <= tol * scale


def homography_from_points(src, dst) -> np.ndarray:
    """Return the 3x3 matrix ``H`` (``H[2, 2] == 1``) mapping each ``src`` point to ``dst``.

    Solves the 8x8 direct linear system for four correspondences. Raises
    :class:`SingularTransformError` when three points of either set are
    collinear.
    """
    src = [tuple(map(float, p[:2])) for p in src]
    dst = [tuple(map(float, p[:2])) for p in dst]
    if len(src) != 4 or len(dst) != 4:
        raise ValueError("exactly four correspondences are required")
    for pts, label in ((src, "source"), (dst, "destination")):
        for a, b, c in combinations(pts, 3):
            if _collinear(a, b, c):
                raise SingularTransformError(f"three {label} points are collinear")
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularTransformError(str(exc)) from None
    return np.append(h, 1.0).reshape(3, 3)


def apply_homography(h, point) -> tuple[float, float]:
    """Map a 2D point through ``h`` with projective division."""
    flat = h.ravel().tolist() if isinstance(h, np.ndarray) else list(h)
    w = flat[6] * point[0] + flat[7] * point[1] + flat[8]
    if abs(w) < 1e-15:
        raise SingularTransformError("point maps to infinity")
    return kernels.apply_homography(flat, float(point[0]), float(point[1]))


def invert_homography(h) -> np.ndarray:
    h = np.asarray(h, dtype=float).reshape(3, 3)
    if abs(np.linalg.det(h)) < 1e-12 * max(1.0, np.abs(h).max() ** 3):
        raise SingularTransformError("homography is singular")
    inv = np.linalg.inv(h)
    if abs(inv[2, 2]) > 1e-15:
        inv = inv / inv[2, 2]
    return inv
