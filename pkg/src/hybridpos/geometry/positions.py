"""Absolute and relative position value types."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import ClassVar

from .. import units as u
from ..serialization import DeserializationError, register, require, unit_from_json, unit_to_json
from .vectors import AngularVelocity, LinearVelocity, Quaternion, Vector3



@dataclass(frozen=True)
class AbsolutePosition:
    """A timestamped position in some reference space.

    ``timestamp`` is integer microseconds. ``accuracy`` is expressed in
    ``accuracy_unit`` and may be ``None`` when unknown. Orientation and
    velocities are ``None`` when the producer does not measure them.
    Velocities are in the object's own frame, linear in m/s and angular in
    rad/s.
    """

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    timestamp: int = 0
    accuracy: float | None = None
    accuracy_unit: u.Unit = u.METER
    unit: u.Unit = u.METER
    orientation: Quaternion | None = None
    linear_velocity: LinearVelocity | None = None
    angular_velocity: AngularVelocity | None = None
    reference_space_uid: str | None = None

    dimensions: ClassVar[int] = 3

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.accuracy is not None and self.accuracy < 0:
            raise ValueError(f"accuracy must be non-negative, got {self.accuracy}")
        if self.unit.base_name != "length" and not isinstance(self, GeographicalPosition):
            raise u.IncompatibleUnitError(f"position unit must be a length, got {self.unit.name!r}")

    @property
    def vector(self) -> Vector3:
        return Vector3(self.x, self.y, self.z)

    def to_vector3(self, unit: u.Unit | None = None) -> Vector3:
        if unit is None or unit is self.unit:
            return Vector3(self.x, self.y, self.z)
        k = u.convert(1.0, self.unit, unit)
        return Vector3(self.x * k, self.y * k, self.z * k)

    def with_vector(self, v, **changes) -> "AbsolutePosition":
        return dataclasses.replace(self, x=float(v[0]), y=float(v[1]), z=float(v[2]), **changes)

    def replace(self, **changes) -> "AbsolutePosition":
        return dataclasses.replace(self, **changes)

    def accuracy_in(self, unit: u.Unit, default: float = 1.0) -> float:
        """Accuracy converted to ``unit``; ``default`` (in ``unit``) when unknown."""
        if self.accuracy is None:
            return default
        return u.convert(self.accuracy, self.accuracy_unit, unit)

    def distance(self, other: "AbsolutePosition") -> float:
        return self.vector.distance(other.to_vector3(self.unit))


@dataclass(frozen=True)
class Absolute2DPosition(AbsolutePosition):
    dimensions: ClassVar[int] = 2

    def __post_init__(self):
        super().__post_init__()
        if self.z != 0.0:
            object.__setattr__(self, "z", 0.0)


@dataclass(frozen=True)
class Absolute3DPosition(AbsolutePosition):
    pass


@dataclass(frozen=True)
class GeographicalPosition(AbsolutePosition):
    """Latitude/longitude in degrees with elevation, stored as ``(x, y, z)``."""

    unit: u.Unit = u.DEGREE

    def __init__(self, latitude: float = 0.0, longitude: float = 0.0, elevation: float = 0.0, **kw):
        kw.setdefault("unit", u.DEGREE)
        for key, value in (("x", latitude), ("y", longitude), ("z", elevation)):
            kw.setdefault(key, value)
        AbsolutePosition.__init__(self, **kw)

    @property
    def latitude(self) -> float:
        return self.x

    @property
    def longitude(self) -> float:
        return self.y

    @property
    def elevation(self) -> float:
        return self.z


# -- relative positions ------------------------------------------------------

_TAG_DIMENSION = {"distance": "length", "angle": "angle", "velocity": "speed"}


@dataclass(frozen=True)
class RelativePosition:
    """Position relative to another object: a distance, angle or velocity."""

    reference_object_uid: str
    reference_value: float
    unit: u._UnitBase = u.METER
    timestamp: int = 0
    accuracy: float | None = None
    accuracy_unit: u._UnitBase | None = None

    tag: ClassVar[str] = ""

    def __post_init__(self):
        object.__setattr__(self, "reference_value", float(self.reference_value))
        want = _TAG_DIMENSION.get(self.tag)
        if want is not None and self.unit.base_name != want:
            raise u.IncompatibleUnitError(
                f"{type(self).__name__} needs a {want} unit, got {self.unit.name!r}"
            )
        if self.accuracy is not None and self.accuracy < 0:
            raise ValueError("accuracy must be non-negative")

    @property
    def key(self) -> tuple[str, str]:
        return (self.reference_object_uid, self.tag)

    def value_in(self, unit: u._UnitBase) -> float:
        return u.convert(self.reference_value, self.unit, unit)


@dataclass(frozen=True)
class RelativeDistance(RelativePosition):
    tag: ClassVar[str] = "distance"


@dataclass(frozen=True)
class RelativeAngle(RelativePosition):
    unit: u._UnitBase = u.RADIAN
    tag: ClassVar[str] = "angle"


@dataclass(frozen=True)
class RelativeVelocity(RelativePosition):
    unit: u._UnitBase = u.METER_PER_SECOND
    tag: ClassVar[str] = "velocity"


# -- serialization -----------------------------------------------------------

def _xyz(v) -> dict:
    return {"x": float(v[0]), "y": float(v[1]), "z": float(v[2])}


def _vec(data, cls, key):
    try:
        return cls(float(data["x"]), float(data["y"]), float(data["z"]))
    except (KeyError, TypeError):
        raise DeserializationError(f"malformed vector in {key!r}", key) from None


def _encode_position(p: AbsolutePosition) -> dict:
    if isinstance(p, GeographicalPosition):
        data = {"latitude": p.x, "longitude": p.y, "elevation": p.z}
    elif p.dimensions == 2:
        data = {"x": p.x, "y": p.y}
    else:
        data = {"x": p.x, "y": p.y, "z": p.z}
    data["timestamp"] = p.timestamp
    if p.accuracy is not None:
        data["accuracy"] = p.accuracy
    velocity = {}
    if p.linear_velocity is not None:
        velocity["linear"] = _xyz(p.linear_velocity)
    if p.angular_velocity is not None:
        velocity["angular"] = _xyz(p.angular_velocity)
    if velocity:
        data["velocity"] = velocity
    q = p.orientation
    if q is not None:
        data["orientation"] = {"x": q.x, "y": q.y, "z": q.z, "w": q.w}
    data["unit"] = unit_to_json(p.unit)
    if p.reference_space_uid is not None:
        data["referenceSpaceUID"] = p.reference_space_uid
    data["accuracyUnit"] = unit_to_json(p.accuracy_unit)
    return data


def _position_decoder(cls):
    def decode(data: dict):
        kw = {}
        if cls is GeographicalPosition:
            kw["latitude"] = float(require(data, "latitude"))
            kw["longitude"] = float(require(data, "longitude"))
            kw["elevation"] = float(data.get("elevation", 0.0))
        else:
            kw["x"] = float(require(data, "x"))
            kw["y"] = float(require(data, "y"))
            kw["z"] = float(data.get("z", 0.0))
        kw["timestamp"] = int(data.get("timestamp", 0))
        if "accuracy" in data:
            kw["accuracy"] = float(data["accuracy"])
        velocity = data.get("velocity")
        if velocity is not None:
            if "linear" in velocity:
                kw["linear_velocity"] = _vec(velocity["linear"], LinearVelocity, "velocity.linear")
            if "angular" in velocity:
                kw["angular_velocity"] = _vec(velocity["angular"], AngularVelocity, "velocity.angular")
        if "orientation" in data:
            o = data["orientation"]
            try:
                kw["orientation"] = Quaternion(float(o["x"]), float(o["y"]), float(o["z"]), float(o["w"]))
            except (KeyError, TypeError):
                raise DeserializationError("malformed orientation", "orientation") from None
        if "unit" in data:
            kw["unit"] = unit_from_json(data["unit"], "unit")
        if "accuracyUnit" in data:
            kw["accuracy_unit"] = unit_from_json(data["accuracyUnit"], "accuracyUnit")
        if "referenceSpaceUID" in data:
            kw["reference_space_uid"] = data["referenceSpaceUID"]
        return cls(**kw)

    return decode


for _cls in (AbsolutePosition, Absolute2DPosition, Absolute3DPosition, GeographicalPosition):
    register(_cls, _encode_position, _position_decoder(_cls))


def _encode_relative(p: RelativePosition) -> dict:
    data = {
        "referenceObjectUID": p.reference_object_uid,
        "referenceValue": p.reference_value,
        "unit": unit_to_json(p.unit),
        "timestamp": p.timestamp,
    }
    if p.accuracy is not None:
        data["accuracy"] = p.accuracy
    if p.accuracy_unit is not None:
        data["accuracyUnit"] = unit_to_json(p.accuracy_unit)
    return data


def _relative_decoder(cls):
    def decode(data: dict):
        kw = dict(
            reference_object_uid=require(data, "referenceObjectUID"),
            reference_value=float(require(data, "referenceValue")),
            timestamp=int(data.get("timestamp", 0)),
        )
        if "unit" in data:
            kw["unit"] = unit_from_json(data["unit"], "unit")
        if "accuracy" in data:
            kw["accuracy"] = float(data["accuracy"])
        if "accuracyUnit" in data:
            kw["accuracy_unit"] = unit_from_json(data["accuracyUnit"], "accuracyUnit")
        return cls(**kw)

    return decode


for _cls in (RelativeDistance, RelativeAngle, RelativeVelocity):
    register(_cls, _encode_relative, _relative_decoder(_cls))
del _cls


def is_finite_position(p: AbsolutePosition) -> bool:
    return math.isfinite(p.x) and math.isfinite(p.y) and math.isfinite(p.z)
