"""Vectors, quaternions and velocity value types."""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

from .. import kernels
from .. import units as u

_AXES = {"X": 0, "Y": 1, "Z": 2}
_ORDERS = ("XYZ", "XZY", "YXZ", "YZX", "ZXY", "ZYX")


class Vector3(NamedTuple):
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other):
        return type(self)(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return type(self)(self.x - other[0], self.y - other[1], self.z - other[2])

    def __mul__(self, k):
        return type(self)(self.x * k, self.y * k, self.z * k)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return type(self)(self.x / k, self.y / k, self.z / k)

    def __neg__(self):
        return type(self)(-self.x, -self.y, -self.z)

    def multiply(self, other) -> "Vector3":
        """Component-wise product."""
        return type(self)(self.x * other[0], self.y * other[1], self.z * other[2])

    def divide(self, other) -> "Vector3":
        return type(self)(self.x / other[0], self.y / other[1], self.z / other[2])

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1] + self.z * other[2]

    def cross(self, other) -> "Vector3":
        ox, oy, oz = other
        return type(self)(self.y * oz - self.z * oy, self.z * ox - self.x * oz, self.x * oy - self.y * ox)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance(self, other) -> float:
        return (self - other).norm()

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in self)


class LinearVelocity(Vector3):
    """Linear velocity in m/s, expressed in the object's own frame."""


class AngularVelocity(Vector3):
    """Angular velocity in rad/s, expressed in the object's own frame."""


class Quaternion(NamedTuple):
    """Rotation quaternion with scalar part last, ``(x, y, z, w)``."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    w: float = 1.0

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(0.0, 0.0, 0.0, 1.0)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(*kernels.quat_multiply(self, other))

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero quaternion")
        return Quaternion(self.x / n, self.y / n, self.z / n, self.w / n)

    def conjugate(self) -> "Quaternion":
        return Quaternion(-self.x, -self.y, -self.z, self.w)

    inverse = conjugate

    def dot(self, other) -> float:
        return self.x * other[0] + self.y * other[1] + self.z * other[2] + self.w * other[3]

    def rotate(self, v) -> Vector3:
        return Vector3(*kernels.quat_rotate(self, v))

    def angle_to(self, other: "Quaternion") -> float:
        # atan2 form stays accurate near zero, where acos(dot) loses half the digits
        a, b = self.normalized(), other.normalized()
        s = -1.0 if a.dot(b) < 0 else 1.0
        diff = math.sqrt(sum((p - s * q) ** 2 for p, q in zip(a, b)))
        summ = math.sqrt(sum((p + s * q) ** 2 for p, q in zip(a, b)))
        return 4.0 * math.atan2(diff, summ)

    @classmethod
    def from_rotation_vector(cls, rx: float, ry: float, rz: float) -> "Quaternion":
        """Quaternion exponential of a rotation vector (axis * angle, radians)."""
        return cls(*kernels.quat_from_rotation_vector(rx, ry, rz))

    @classmethod
    def from_axis_angle(cls, axis, angle: float, unit=u.RADIAN) -> "Quaternion":
        angle = u.convert(angle, unit, u.RADIAN)
        n = math.sqrt(axis[0] ** 2 + axis[1] ** 2 + axis[2] ** 2)
        if n == 0.0:
            raise ValueError("rotation axis must be non-zero")
        s = math.sin(angle / 2) / n
        return cls(axis[0] * s, axis[1] * s, axis[2] * s, math.cos(angle / 2))

    def to_axis_angle(self, unit=u.RADIAN) -> tuple[Vector3, float]:
        q = self.normalized()
        if q.w < 0:
            q = Quaternion(-q.x, -q.y, -q.z, -q.w)
        s = math.sqrt(q.x * q.x + q.y * q.y + q.z * q.z)
        angle = 2.0 * math.atan2(s, q.w)
        axis = Vector3(1.0, 0.0, 0.0) if s < 1e-15 else Vector3(q.x / s, q.y / s, q.z / s)
        return axis, u.convert(angle, u.RADIAN, unit)

    @classmethod
    def from_euler(cls, x: float = 0.0, y: float = 0.0, z: float = 0.0,
                   order: str = "XYZ", unit=u.RADIAN) -> "Quaternion":
        """Quaternion from intrinsic Tait-Bryan angles.

        Angles are given per axis; ``order`` is the intrinsic rotation
        sequence, so ``order="ZXY"`` yields ``qz * qx * qy``.
        """
        order = _check_order(order)
        angles = (u.convert(x, unit, u.RADIAN), u.convert(y, unit, u.RADIAN),
                  u.convert(z, unit, u.RADIAN))
        q = cls.identity()
        for axis in order:
            i = _AXES[axis]
            half = angles[i] / 2
            comps = [0.0, 0.0, 0.0, math.cos(half)]
            comps[i] = math.sin(half)
            q = q * Quaternion(*comps)
        return q.normalized()

    def to_euler(self, order: str = "XYZ", unit=u.RADIAN) -> Vector3:
        """Per-axis intrinsic angles for ``order``.

        At gimbal lock the X angle (roll) is pinned to zero when X is an
        outer axis of the sequence; otherwise the last angle is.
        """
        from scipy.spatial.transform import Rotation

        order = _check_order(order)
        q = self.normalized()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            seq = list(Rotation.from_quat(q).as_euler(order))
        if abs(abs(seq[1]) - math.pi / 2) < 1e-7:
            seq = _gimbal_angles(q, order, seq[1])
        angles = [0.0, 0.0, 0.0]
        for axis, angle in zip(order, seq):
            angles[_AXES[axis]] = u.convert(angle, u.RADIAN, unit)
        return Vector3(*angles)


def _check_order(order: str) -> str:
    order = order.upper()
    if order not in _ORDERS:
        raise ValueError(f"unsupported Euler order {order!r}")
    return order


def _axis_quat(axis: str, angle: float) -> Quaternion:
    comps = [0.0, 0.0, 0.0, math.cos(angle / 2)]
    comps[_AXES[axis]] = math.sin(angle / 2)
    return Quaternion(*comps)


def _axis_angle_of(q: Quaternion, axis: str) -> float:
    return 2.0 * math.atan2(q[_AXES[axis]], q.w)


def _gimbal_angles(q: Quaternion, order: str, middle: float) -> list[float]:
    a, b, c = order
    qb = _axis_quat(b, middle)
    if a == "X":
        # q = qb * qc  ->  qc = qb^-1 * q
        return [0.0, middle, _axis_angle_of(qb.conjugate() * q, c)]
    # q = qa * qb  ->  qa = q * qb^-1
    return [_axis_angle_of(q * qb.conjugate(), a), middle, 0.0]


Orientation = Quaternion
IDENTITY = Quaternion.identity()
ZERO_VECTOR = Vector3()
