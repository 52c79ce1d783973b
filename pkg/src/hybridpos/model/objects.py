"""Data objects: anything relevant to positioning."""
from __future__ import annotations

import copy as _copy

from ..geometry.positions import AbsolutePosition, RelativePosition
from ..serialization import from_json, require, serializable, to_json
from .uid import new_uid, now_us


@serializable()
class DataObject:
    """A tracked actor, tracking sensor or landmark.

    The stored position is always expressed in the global reference space;
    pass a space to :meth:`set_position` / :meth:`get_position` to work in
    local coordinates. At most one relative position is kept per
    ``(reference object, kind)`` pair.

    Parameters
    ----------
    uid
        Identifier; a random UUID when omitted.
    display_name
        Optional human-readable name.
    """

    def __init__(self, uid: str | None = None, display_name: str | None = None,
                 created_timestamp: int | None = None, parent_uid: str | None = None):
        self.uid = uid if uid is not None else new_uid()
        self.display_name = display_name
        self.created_timestamp = created_timestamp if created_timestamp is not None else now_us()
        self.parent_uid = parent_uid
        self.position: AbsolutePosition | None = None
        self._relative: dict[tuple[str, str], RelativePosition] = {}

    def __repr__(self):
        return f"{type(self).__name__}(uid={self.uid!r})"

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.__dict__ == other.__dict__

    __hash__ = None

    # -- positions --

    def set_position(self, position: AbsolutePosition, space=None) -> None:
        if space is not None:
            position = space.transform_to_global(position)
        self.position = position

    def get_position(self, space=None) -> AbsolutePosition | None:
        if self.position is None or space is None:
            return self.position
        return space.transform_from_global(self.position)

    @property
    def relative_positions(self) -> list[RelativePosition]:
        return list(self._relative.values())

    def add_relative_position(self, relative: RelativePosition) -> None:
        self._relative[relative.key] = relative

    def get_relative_positions(self, reference_uid: str | None = None,
                               kind: type | None = None) -> list[RelativePosition]:
        out = []
        for rel in self._relative.values():
            if reference_uid is not None and rel.reference_object_uid != reference_uid:
                continue
            if kind is not None and not isinstance(rel, kind):
                continue
            out.append(rel)
        return out

    def remove_relative_positions(self, reference_uid: str) -> None:
        self._relative = {k: v for k, v in self._relative.items() if k[0] != reference_uid}

    # -- copying / serialization --

    def copy(self) -> "DataObject":
        clone = _copy.copy(self)
        clone._relative = dict(self._relative)
        return clone

    def _to_json(self) -> dict:
        data = {"createdTimestamp": self.created_timestamp, "uid": self.uid}
        if self.display_name is not None:
            data["displayName"] = self.display_name
        if self.parent_uid is not None:
            data["parentUID"] = self.parent_uid
        if self.position is not None:
            data["position"] = to_json(self.position)
        data["relativePositions"] = [to_json(r) for r in self._relative.values()]
        return data

    @classmethod
    def _from_json(cls, data: dict) -> "DataObject":
        obj = cls.__new__(cls)
        obj._load_json(data)
        return obj

    def _load_json(self, data: dict) -> None:
        DataObject.__init__(
            self,
            uid=require(data, "uid"),
            display_name=data.get("displayName"),
            created_timestamp=int(data.get("createdTimestamp", 0)),
            parent_uid=data.get("parentUID"),
        )
        if data.get("position") is not None:
            self.position = from_json(data["position"], AbsolutePosition)
        for rel in data.get("relativePositions", []):
            self.add_relative_position(from_json(rel, RelativePosition))


@serializable()
class CameraObject(DataObject):
    """A camera; carries an optional 3x3 projection matrix."""

    def __init__(self, uid=None, display_name=None, projection=None, **kw):
        super().__init__(uid, display_name, **kw)
        self.projection = [list(map(float, row)) for row in projection] if projection is not None else None

    def _to_json(self):
        data = super()._to_json()
        if self.projection is not None:
            data["projection"] = self.projection
        return data

    def _load_json(self, data):
        super()._load_json(data)
        self.projection = data.get("projection")


@serializable()
class RFDataObject(DataObject):
    """Base of objects taking part in RF positioning."""


@serializable()
class RFTransmitterObject(RFDataObject):
    """A landmark emitting RF signals (access point, beacon)."""


@serializable()
class RFReceiverObject(RFDataObject):
    """A device measuring RF signals."""
