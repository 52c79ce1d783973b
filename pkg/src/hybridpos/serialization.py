"""Polymorphic JSON serialization.

Every serializable class registers a codec under a type name. Encoded values
carry that name in a trailing ``"__type"`` key, so a decoder can rebuild the
concrete subtype without knowing it in advance. Units are encoded by name only
and resolved against the unit registry when decoding.
"""
from __future__ import annotations

import json
from typing import Any, Callable

from . import units as _units

TYPE_KEY = "__type"


class SerializationError(ValueError):
    pass


class DeserializationError(SerializationError):
    """Raised for unknown type tags, unknown unit names or malformed documents.

    ``key`` holds the offending type tag, unit name or field.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class _Codec:
    __slots__ = ("name", "cls", "encode", "decode")

    def __init__(self, name, cls, encode, decode):
        self.name = name
        self.cls = cls
        self.encode = encode
        self.decode = decode


_by_name: dict[str, _Codec] = {}
_by_class: dict[type, _Codec] = {}


def register(cls: type, encode: Callable[[Any], dict], decode: Callable[[dict], Any],
             name: str | None = None) -> type:
    name = name or cls.__name__
    existing = _by_name.get(name)
    if existing is not None and existing.cls is not cls:
        raise SerializationError(f"type name {name!r} already registered for {existing.cls!r}")
    codec = _Codec(name, cls, encode, decode)
    _by_name[name] = codec
    _by_class[cls] = codec
    return cls


def serializable(name: str | None = None):
    """Class decorator registering ``cls._to_json`` / ``cls._from_json``."""

    def wrap(cls):
        return register(cls, cls._to_json, cls._from_json, name)

    return wrap


def registered_types() -> dict[str, type]:
    return {name: codec.cls for name, codec in _by_name.items()}


def is_registered(value_or_type) -> bool:
    cls = value_or_type if isinstance(value_or_type, type) else type(value_or_type)
    return cls in _by_class


def to_json(value: Any) -> Any:
    """Encode a registered value to JSON-compatible data."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, (list, tuple)):
        return [to_json(v) for v in value]
    codec = _by_class.get(type(value))
    if codec is None:
        raise SerializationError(f"type {type(value).__name__!r} is not registered for serialization")
    data = codec.encode(value)
    data[TYPE_KEY] = codec.name
    return data


def from_json(data: Any, expected: type | None = None) -> Any:
    if isinstance(data, list):
        return [from_json(v) for v in data]
    if not isinstance(data, dict):
        return data
    name = data.get(TYPE_KEY)
    if name is None:
        raise DeserializationError(f"missing {TYPE_KEY!r} key", TYPE_KEY)
    codec = _by_name.get(name)
    if codec is None:
        raise DeserializationError(f"unknown type {name!r}", name)
    value = codec.decode(data)
    if expected is not None and not isinstance(value, expected):
        raise DeserializationError(f"expected {expected.__name__}, got {name!r}", name)
    return value


def serialize(value: Any) -> str:
    return json.dumps(to_json(value), separators=(",", ":"))


def deserialize(text: str | bytes, expected: type | None = None) -> Any:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DeserializationError(f"invalid JSON: {exc}") from exc
    return from_json(data, expected)


def unit_to_json(unit) -> dict:
    return {"name": unit.name}


def unit_from_json(data, field: str = "unit"):
    if not isinstance(data, dict) or "name" not in data:
        raise DeserializationError(f"malformed unit in {field!r}", field)
    try:
        return _units.lookup(data["name"])
    except _units.UnknownUnitError:
        raise DeserializationError(f"unknown unit {data['name']!r}", data["name"]) from None


def require(data: dict, key: str):
    try:
        return data[key]
    except KeyError:
        raise DeserializationError(f"missing field {key!r}", key) from None
