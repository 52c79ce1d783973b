"""Trilateration (distances) and triangulation (bearings) against landmarks."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .. import units as u
from ..geometry.positions import Absolute2DPosition, AbsolutePosition, RelativePosition


class InsufficientObservationsError(ValueError):
    pass


class SingularGeometryError(ValueError):
    """Landmarks are collinear/coplanar or bearings parallel."""


def _landmark_position(landmark) -> AbsolutePosition:
    pos = getattr(landmark, "position", landmark)
    if not isinstance(pos, AbsolutePosition):
        raise TypeError("landmark must be an AbsolutePosition or carry one")
    return pos


def _unpack(observations, unit, base_unit):
    anchors, values = [], []
    ref = None
    for landmark, value in observations:
        pos = _landmark_position(landmark)
        ref = ref or pos
        anchors.append(pos)
        if isinstance(value, RelativePosition):
            value = value.value_in(unit)
        values.append(float(value))
    return ref, anchors, values


def _dims(anchors) -> int:
    return 2 if all(isinstance(a, Absolute2DPosition) for a in anchors) else 3


def trilaterate(observations: Sequence[tuple], refine: bool = True) -> AbsolutePosition:
    """Position from distances to landmarks.

    ``observations`` holds ``(landmark, distance)`` pairs; a landmark is a
    position or an object with a position, a distance is a float in the first
    landmark's unit or a :class:`RelativePosition`. The linearized system
    (each circle minus the first) is solved by least squares, then refined by
    Gauss-Newton on the range residuals. Accuracy is the RMS range residual.
    """
    if len(observations) < 3:
        raise InsufficientObservationsError("trilateration needs at least three observations")
    first = _landmark_position(observations[0][0])
    ref, anchors, d = _unpack(observations, first.unit, first.unit)
    dims = _dims(anchors)
    if dims == 3 and len(anchors) < 4:
        raise InsufficientObservationsError("3D trilateration needs at least four observations")
    a = np.array([list(p.to_vector3(ref.unit))[:dims] for p in anchors])
    d = np.asarray(d)
    m = 2.0 * (a[1:] - a[0])
    if np.linalg.matrix_rank(m, tol=1e-9 * max(1.0, np.abs(m).max())) < dims:
        raise SingularGeometryError("landmarks are degenerate (collinear or coplanar)")
    b = (d[0] ** 2 - d[1:] ** 2) + (a[1:] ** 2).sum(axis=1) - (a[0] ** 2).sum()
    x, *_ = np.linalg.lstsq(m, b, rcond=None)
    if refine:
        x = _gauss_newton(a, d, x)
    res = np.linalg.norm(a - x, axis=1) - d
    rms = math.sqrt(float(np.mean(res ** 2)))
    vec = list(x) + [0.0] * (3 - dims)
    cls = Absolute2DPosition if dims == 2 else type(ref)
    return cls(x=vec[0], y=vec[1], z=vec[2], unit=ref.unit, accuracy=rms, accuracy_unit=ref.unit,
               timestamp=max(p.timestamp for p in anchors), reference_space_uid=ref.reference_space_uid)


def _gauss_newton(a, d, x, iterations=50, tol=1e-14):
    for _ in range(iterations):
        diff = x - a
        r = np.linalg.norm(diff, axis=1)
        if np.any(r < 1e-15):
            break
        j = diff / r[:, None]
        step, *_ = np.linalg.lstsq(j, -(r - d), rcond=None)
        x = x + step
        if np.linalg.norm(step) <= tol * max(1.0, np.linalg.norm(x)):
            break
    return x


def triangulate(observations: Sequence[tuple], angle_unit=u.RADIAN) -> Absolute2DPosition:
    """Least-squares intersection of 2D bearing lines.

    Each observation is ``(landmark, bearing)`` with the bearing measured
    counter-clockwise from +x, in ``angle_unit`` when given as a float.
    Accuracy is the RMS point-to-line distance.
    """
    if len(observations) < 2:
        raise InsufficientObservationsError("triangulation needs at least two bearings")
    first = _landmark_position(observations[0][0])
    ref, anchors, angles = _unpack(observations, u.RADIAN, first.unit)
    if not any(isinstance(v, RelativePosition) for _, v in observations):
        angles = [u.convert(t, angle_unit, u.RADIAN) for t in angles]
    a = np.array([list(p.to_vector3(ref.unit))[:2] for p in anchors])
    n = np.array([[-math.sin(t), math.cos(t)] for t in angles])
    if np.linalg.matrix_rank(n, tol=1e-9) < 2:
        raise SingularGeometryError("bearing lines are parallel")
    b = (n * a).sum(axis=1)
    x, *_ = np.linalg.lstsq(n, b, rcond=None)
    res = n @ x - b
    rms = math.sqrt(float(np.mean(res ** 2)))
    return Absolute2DPosition(x=float(x[0]), y=float(x[1]), unit=ref.unit, accuracy=rms,
                              accuracy_unit=ref.unit, timestamp=max(p.timestamp for p in anchors),
                              reference_space_uid=ref.reference_space_uid)
