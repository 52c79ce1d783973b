"""Dead reckoning: advance a position by its own velocity."""
from __future__ import annotations

import warnings

from .. import units as u
from ..geometry.positions import AbsolutePosition
from ..geometry.vectors import IDENTITY, Quaternion


def velocity_process(position: AbsolutePosition, dt: float) -> AbsolutePosition:
    """Advance ``position`` by ``dt`` seconds.

    The linear velocity (m/s, object frame) is rotated into the position's
    frame by the orientation and integrated; the orientation is advanced by
    the angular velocity (rad/s, object frame). A negative ``dt`` leaves the
    position unchanged and emits a :class:`RuntimeWarning`.
    """
    if dt < 0:
        warnings.warn(f"negative time step {dt} s ignored", RuntimeWarning, stacklevel=2)
        return position
    if dt == 0:
        return position
    q = position.orientation if position.orientation is not None else IDENTITY
    changes = {"timestamp": position.timestamp + int(round(dt * 1e6))}
    v = position.vector
    if position.linear_velocity is not None:
        k = u.convert(dt, u.METER, position.unit)  # metres travelled per (m/s) in position units
        v = v + q.rotate(position.linear_velocity) * k
    if position.angular_velocity is not None and position.orientation is not None:
        w = position.angular_velocity
        changes["orientation"] = (q * Quaternion.from_rotation_vector(w.x * dt, w.y * dt, w.z * dt)).normalized()
    return position.with_vector(v, **changes)
