"""Data frames: timestamped containers moving through the graph."""
from __future__ import annotations

import numpy as np

from ..geometry.vectors import IDENTITY, Quaternion, Vector3
from ..serialization import DeserializationError, from_json, require, serializable, to_json
from .objects import DataObject
from .uid import new_uid, now_us


@serializable()
class DataFrame:
    """A uniquely identified, timestamped set of data objects.

    The source object is always part of :attr:`objects`. ``created_timestamp``
    (microseconds) is assigned once and is what processing nodes use for
    time-based computation.
    """

    def __init__(self, source: DataObject | None = None, objects=(), uid: str | None = None,
                 created_timestamp: int | None = None):
        self.uid = uid if uid is not None else new_uid()
        self.created_timestamp = created_timestamp if created_timestamp is not None else now_us()
        self._objects: dict[str, DataObject] = {}
        self._source_uid: str | None = None
        for obj in objects:
            self.add_object(obj)
        if source is not None:
            self.source = source

    def __repr__(self):
        return f"{type(self).__name__}(uid={self.uid!r}, source={self._source_uid!r}, n={len(self._objects)})"

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._state() == other._state()

    __hash__ = None

    def _state(self):
        return {k: v for k, v in self.__dict__.items()}

    @property
    def source(self) -> DataObject | None:
        return self._objects.get(self._source_uid) if self._source_uid is not None else None

    @source.setter
    def source(self, obj: DataObject) -> None:
        self.add_object(obj)
        self._source_uid = obj.uid

    @property
    def objects(self) -> list[DataObject]:
        return list(self._objects.values())

    def add_object(self, obj: DataObject) -> None:
        self._objects[obj.uid] = obj

    def get_object(self, uid: str) -> DataObject | None:
        return self._objects.get(uid)

    def remove_object(self, uid: str) -> None:
        if uid == self._source_uid:
            raise ValueError("cannot remove the source object")
        self._objects.pop(uid, None)

    def copy(self) -> "DataFrame":
        """Copy with independent (shallow-copied) objects, same uid and timestamp."""
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone._objects = {uid: obj.copy() for uid, obj in self._objects.items()}
        return clone

    def repack(self, now: int | None = None) -> "DataFrame":
        """Copy with a fresh uid and creation timestamp."""
        clone = self.copy()
        clone.uid = new_uid()
        clone.created_timestamp = now if now is not None else now_us()
        return clone

    # -- serialization --

    def _to_json(self) -> dict:
        data = {"createdTimestamp": self.created_timestamp, "uid": self.uid}
        if self._source_uid is not None:
            data["source"] = self._source_uid
        data["objects"] = [to_json(o) for o in self._objects.values()]
        data.update(self._payload_to_json())
        return data

    def _payload_to_json(self) -> dict:
        return {}

    @classmethod
    def _from_json(cls, data: dict) -> "DataFrame":
        frame = cls.__new__(cls)
        DataFrame.__init__(frame, uid=require(data, "uid"),
                           created_timestamp=int(data.get("createdTimestamp", 0)))
        for obj in data.get("objects", []):
            frame.add_object(from_json(obj, DataObject))
        src = data.get("source")
        if src is not None:
            if src not in frame._objects:
                raise DeserializationError(f"source {src!r} is not among the frame objects", "source")
            frame._source_uid = src
        frame._payload_from_json(data)
        return frame

    def _payload_from_json(self, data: dict) -> None:
        pass


def create_frame(source: DataObject, now: int | None = None, cls=DataFrame, **payload) -> DataFrame:
    """New frame for ``source`` stamped with the injected clock value ``now``."""
    frame = cls(source, created_timestamp=now)
    for key, value in payload.items():
        setattr(frame, key, value)
    return frame


def _vec_json(v) -> dict:
    return {"x": float(v[0]), "y": float(v[1]), "z": float(v[2])}


def _vec_from(d, default=(0.0, 0.0, 0.0)) -> Vector3:
    if d is None:
        return Vector3(*default)
    return Vector3(float(d["x"]), float(d["y"]), float(d["z"]))


@serializable()
class ImageFrame(DataFrame):
    """Frame carrying a camera image (``H x W`` or ``H x W x C`` array)."""

    image: np.ndarray | None = None
    fps: float | None = None

    def _state(self):
        state = dict(self.__dict__)
        img = state.pop("image", None)
        state["image"] = None if img is None else (img.shape, img.dtype.str, img.tobytes())
        return state

    def copy(self):
        clone = super().copy()
        if self.image is not None:
            clone.image = self.image.copy()
        return clone

    def _payload_to_json(self):
        data = {}
        if self.fps is not None:
            data["fps"] = self.fps
        if self.image is not None:
            data["image"] = {"shape": list(self.image.shape), "dtype": self.image.dtype.str,
                             "data": self.image.ravel().tolist()}
        return data

    def _payload_from_json(self, data):
        if "fps" in data:
            self.fps = data["fps"]
        img = data.get("image")
        if img is not None:
            self.image = np.asarray(img["data"], dtype=np.dtype(img["dtype"])).reshape(img["shape"])


@serializable()
class IMUDataFrame(DataFrame):
    """Inertial sample: acceleration (m/s^2), velocities and orientation, at ``frequency`` Hz."""

    acceleration: Vector3 = Vector3()
    linear_velocity: Vector3 = Vector3()
    angular_velocity: Vector3 = Vector3()
    orientation: Quaternion = IDENTITY
    frequency: float | None = None

    def _payload_to_json(self):
        q = self.orientation
        data = {
            "acceleration": _vec_json(self.acceleration),
            "linearVelocity": _vec_json(self.linear_velocity),
            "angularVelocity": _vec_json(self.angular_velocity),
            "orientation": {"x": q.x, "y": q.y, "z": q.z, "w": q.w},
        }
        if self.frequency is not None:
            data["frequency"] = self.frequency
        return data

    def _payload_from_json(self, data):
        self.acceleration = _vec_from(data.get("acceleration"))
        self.linear_velocity = _vec_from(data.get("linearVelocity"))
        self.angular_velocity = _vec_from(data.get("angularVelocity"))
        o = data.get("orientation")
        if o is not None:
            self.orientation = Quaternion(o["x"], o["y"], o["z"], o["w"])
        self.frequency = data.get("frequency")


@serializable()
class DetectionFrame(DataFrame):
    """Result of blob detection on a camera image: pixel centroid and area.

    ``centroid`` is ``None`` when nothing was detected.
    """

    centroid: tuple[float, float] | None = None
    area: float = 0.0

    def _payload_to_json(self):
        data = {"area": self.area}
        if self.centroid is not None:
            data["centroid"] = {"x": self.centroid[0], "y": self.centroid[1]}
        return data

    def _payload_from_json(self, data):
        self.area = float(data.get("area", 0.0))
        c = data.get("centroid")
        self.centroid = None if c is None else (float(c["x"]), float(c["y"]))
