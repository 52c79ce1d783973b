"""Model-scoped services: object stores, node state, trajectories and time."""
from __future__ import annotations

import bisect
import json
import threading
from typing import Any, Callable, Iterable

from . import units as u
from .geometry.positions import AbsolutePosition
from .model.objects import DataObject
from .model.uid import now_us
from .serialization import TYPE_KEY, deserialize, from_json, registered_types, serialize, to_json


class StorageDriver:
    """Key/value text storage backing a data service."""

    def get(self, key: str) -> str | None:
        raise NotImplementedError

    def set(self, key: str, value: str) -> None:
        raise NotImplementedError

    def delete(self, key: str) -> None:
        raise NotImplementedError

    def keys(self) -> list[str]:
        raise NotImplementedError

    def clear(self) -> None:
        for key in self.keys():
            self.delete(key)


class MemoryDriver(StorageDriver):
    def __init__(self):
        self._data: dict[str, str] = {}

    def get(self, key):
        return self._data.get(key)

    def set(self, key, value):
        self._data[key] = value

    def delete(self, key):
        self._data.pop(key, None)

    def keys(self):
        return list(self._data)

    def clear(self):
        self._data.clear()


class Service:
    """Base class of everything registered on a model."""

    name: str = ""

    def __init__(self, name: str | None = None):
        self.name = name or type(self).__name__
        self.model = None

    def bind(self, model) -> None:
        self.model = model


class DataService(Service):
    """Store of serializable objects of ``data_type`` keyed by uid.

    Values are kept in serialized form and rebuilt on every read. Inserts are
    last-write-wins; ``insert`` listeners run serially after the commit.
    """

    def __init__(self, data_type: type = DataObject, driver: StorageDriver | None = None,
                 name: str | None = None):
        super().__init__(name or f"{data_type.__name__}Service")
        self.data_type = data_type
        self.driver = driver or MemoryDriver()
        self._lock = threading.RLock()
        self._listeners: dict[str, list[Callable]] = {}

    def on(self, event: str, listener: Callable) -> None:
        self._listeners.setdefault(event, []).append(listener)

    def off(self, event: str, listener: Callable) -> None:
        self._listeners.get(event, []).remove(listener)

    def _emit(self, event: str, *args) -> None:
        for listener in list(self._listeners.get(event, ())):
            listener(*args)

    def insert(self, obj) -> Any:
        text = serialize(obj)  # reject unserializable values before anything is stored
        with self._lock:
            self.driver.set(obj.uid, text)
            stored = deserialize(text)
            self._emit("insert", obj.uid, stored)
        return stored

    def find_by_uid(self, uid: str):
        text = self.driver.get(uid)
        return None if text is None else deserialize(text)

    def find_all(self, predicate: Callable[[Any], bool] | None = None) -> list:
        out = []
        for key in self.driver.keys():
            obj = self.find_by_uid(key)
            if obj is not None and (predicate is None or predicate(obj)):
                out.append(obj)
        return out

    def delete(self, uid: str) -> None:
        with self._lock:
            self.driver.delete(uid)
            self._emit("delete", uid)

    def delete_all(self) -> None:
        with self._lock:
            self.driver.clear()

    def count(self) -> int:
        return len(self.driver.keys())


class DataObjectService(DataService):
    def __init__(self, data_type: type = DataObject, driver: StorageDriver | None = None,
                 name: str | None = None):
        super().__init__(data_type, driver, name)


class NodeDataService(Service):
    """Per ``(node uid, object uid)`` scratch state for stateful nodes.

    Values are plain JSON data (dicts, lists, scalars) or registered serializable types.
    """

    def __init__(self, driver: StorageDriver | None = None, name: str | None = None):
        super().__init__(name)
        self.driver = driver or MemoryDriver()
        self._lock = threading.Lock()

    @staticmethod
    def _key(node_uid: str, object_uid: str) -> str:
        return json.dumps([node_uid, object_uid])

    @classmethod
    def _encode(cls, value):
        if isinstance(value, dict):
            return {str(k): cls._encode(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [cls._encode(v) for v in value]
        return to_json(value)

    @classmethod
    def _decode(cls, data):
        if isinstance(data, dict) and TYPE_KEY not in data:
            return {k: cls._decode(v) for k, v in data.items()}
        if isinstance(data, list):
            return [cls._decode(v) for v in data]
        return from_json(data)

    def get(self, node_uid: str, object_uid: str, default=None):
        text = self.driver.get(self._key(node_uid, object_uid))
        return default if text is None else self._decode(json.loads(text))

    def set(self, node_uid: str, object_uid: str, value) -> None:
        text = json.dumps(self._encode(value))
        with self._lock:
            self.driver.set(self._key(node_uid, object_uid), text)

    def delete(self, node_uid: str, object_uid: str) -> None:
        with self._lock:
            self.driver.delete(self._key(node_uid, object_uid))


class TrajectoryService(Service):
    """Append-only position history per object, queryable by time window."""

    def __init__(self, name: str | None = None):
        super().__init__(name)
        self._times: dict[str, list[int]] = {}
        self._samples: dict[str, list[str]] = {}
        self._lock = threading.Lock()

    def append(self, object_uid: str, position: AbsolutePosition, timestamp: int | None = None) -> None:
        t = position.timestamp if timestamp is None else timestamp
        with self._lock:
            times = self._times.setdefault(object_uid, [])
            if times and t < times[-1]:
                raise ValueError(f"trajectory of {object_uid!r} must be non-decreasing in time "
                                 f"({t} < {times[-1]})")
            times.append(t)
            self._samples.setdefault(object_uid, []).append(serialize(position))

    def query(self, object_uid: str, start: int | None = None, end: int | None = None
              ) -> list[tuple[int, AbsolutePosition]]:
        times = self._times.get(object_uid, [])
        lo = 0 if start is None else bisect.bisect_left(times, start)
        hi = len(times) if end is None else bisect.bisect_right(times, end)
        samples = self._samples.get(object_uid, [])
        return [(times[i], deserialize(samples[i])) for i in range(lo, hi)]

    def latest(self, object_uid: str) -> AbsolutePosition | None:
        samples = self._samples.get(object_uid)
        return deserialize(samples[-1]) if samples else None

    def object_uids(self) -> list[str]:
        return list(self._times)


class TimeService(Service):
    """Monotone clock returning integers in ``unit`` (microseconds by default)."""

    def __init__(self, clock: Callable[[], int] | None = None, unit: u.Unit = u.MICROSECOND,
                 name: str | None = None):
        super().__init__(name)
        self.clock = clock or now_us
        self.unit = unit
        self._last = None
        self._lock = threading.Lock()

    def now(self) -> int:
        with self._lock:
            t = int(self.clock())
            if self._last is not None and t < self._last:
                t = self._last
            self._last = t
            return t


class ServiceRegistry:
    """Services of a model, resolvable by type, instance or type name."""

    def __init__(self, services: Iterable[Service] = ()):
        self._services: list[Service] = []
        for s in services:
            self.add(s)

    def __iter__(self):
        return iter(self._services)

    def add(self, service: Service) -> None:
        self._services.append(service)

    def find_service(self, cls_or_name) -> Service | None:
        for s in self._services:
            if (isinstance(cls_or_name, str) and s.name == cls_or_name) or \
                    (isinstance(cls_or_name, type) and isinstance(s, cls_or_name)):
                return s
        return None

    def data_services(self) -> list[DataService]:
        return [s for s in self._services if isinstance(s, DataService)]

    def find_data_service(self, selector) -> DataService | None:
        """Most specific data service for a type, an instance or a type name."""
        services = self.data_services()
        if isinstance(selector, str):
            for s in services:
                if s.data_type.__name__ == selector:
                    return s
            cls = registered_types().get(selector)
            if cls is None:
                return None
        else:
            cls = selector if isinstance(selector, type) else type(selector)
        for base in cls.__mro__:
            for s in services:
                if s.data_type is base:
                    return s
        return None


def source_persistence_merge(frame, services: ServiceRegistry | None):
    """Fill fields missing on the frame's objects from their stored versions.

    Fresh values always win; only an absent position, display name, parent
    and relative positions of other kinds are taken from the store.
    """
    if services is None:
        return frame
    for obj in frame.objects:
        service = services.find_data_service(obj)
        if service is None:
            continue
        stored = service.find_by_uid(obj.uid)
        if stored is None:
            continue
        if obj.position is None and stored.position is not None:
            obj.position = stored.position
        if obj.display_name is None:
            obj.display_name = stored.display_name
        if obj.parent_uid is None:
            obj.parent_uid = stored.parent_uid
        for rel in stored.relative_positions:
            if rel.key not in obj._relative:
                obj.add_relative_position(rel)
    return frame
