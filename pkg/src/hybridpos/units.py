"""Unit registry and conversion.

Units are linear scalings of a canonical unit per dimension (``base_name``).
Every registered unit carries an eagerly resolved ``factor`` to that
canonical unit, so a conversion is a single multiply/divide::

    >>> convert(2, MINUTE, SECOND)
    120.0
    >>> round(convert(1, RADIAN_PER_SECOND, DEGREE_PER_SECOND), 6)
    57.29578

Derived units are products of powered units and convert through the same
factor mechanism. Affine (offset) units are not supported.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "UnitError",
    "DuplicateUnitError",
    "UnknownUnitError",
    "UnsupportedPrefixError",
    "IncompatibleUnitError",
    "UnitPrefix",
    "PREFIXES",
    "Unit",
    "DerivedUnit",
    "UnitRegistry",
    "REGISTRY",
    "define_unit",
    "lookup",
    "convert",
    "derive_unit",
]


class UnitError(ValueError):
    pass


class DuplicateUnitError(UnitError):
    pass


class UnknownUnitError(UnitError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnsupportedPrefixError(UnitError):
    pass


class IncompatibleUnitError(UnitError):
    pass


@dataclass(frozen=True)
class UnitPrefix:
    name: str
    symbol: str
    magnitude: float

    def __post_init__(self):
        if not self.magnitude > 0:
            raise ValueError(f"prefix magnitude must be positive, got {self.magnitude}")


UnitPrefix.NONE = UnitPrefix("", "", 1.0)
_SI = [
    ("yocto", "y", 1e-24), ("zepto", "z", 1e-21), ("atto", "a", 1e-18),
    ("femto", "f", 1e-15), ("pico", "p", 1e-12), ("nano", "n", 1e-9),
    ("micro", "u", 1e-6), ("milli", "m", 1e-3), ("centi", "c", 1e-2),
    ("deci", "d", 1e-1), ("deca", "da", 1e1), ("hecto", "h", 1e2),
    ("kilo", "k", 1e3), ("mega", "M", 1e6), ("giga", "G", 1e9),
    ("tera", "T", 1e12), ("peta", "P", 1e15), ("exa", "E", 1e18),
    ("zetta", "Z", 1e21), ("yotta", "Y", 1e24),
]
PREFIXES: dict[str, UnitPrefix] = {}
for _name, _symbol, _mag in _SI:
    _p = UnitPrefix(_name, _symbol, _mag)
    PREFIXES[_name] = _p
    setattr(UnitPrefix, _name.upper(), _p)
del _name, _symbol, _mag, _p


class _UnitBase:
    name: str
    base_name: str
    aliases: tuple[str, ...]
    factor: float

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    def __str__(self):
        return self.name

    def convert(self, value: float, to: "_UnitBase") -> float:
        return convert(value, self, to)


class Unit(_UnitBase):
    """A named unit of one dimension.

    Parameters
    ----------
    name
        Unique unit name, also its serialized form.
    base_name
        Dimension key, e.g. ``"time"``. Units sharing a base name convert.
    aliases
        Alternative names that resolve to this unit.
    prefixes
        ``"decimal"`` enables SI-prefixed variants via :meth:`specifier`.
    definitions
        ``(magnitude, target_alias)`` pairs; ``60, "s"`` defines a minute.
        A unit without definitions is the canonical unit of its dimension.
    """

    def __init__(
        self,
        name: str,
        base_name: str,
        aliases: Iterable[str] = (),
        prefixes: str = "none",
        definitions: Sequence[tuple[float, str]] = (),
    ):
        if prefixes not in ("none", "decimal"):
            raise ValueError(f"unknown prefix support {prefixes!r}")
        self.name = name
        self.base_name = base_name
        self.aliases = tuple(aliases)
        self.prefixes = prefixes
        self.definitions = tuple((float(m), str(u)) for m, u in definitions)
        self.factor = 1.0 if not self.definitions else math.nan
        self.prefix = UnitPrefix.NONE
        self.parent: Unit | None = None
        self._variants: dict[str, Unit] = {}
        self._lock = threading.Lock()

    def specifier(self, prefix: UnitPrefix) -> "Unit":
        """Return the prefixed variant, e.g. ``SECOND.specifier(UnitPrefix.MILLI)``.

        Variants are cached so that every lookup of ``"ms"`` yields the same
        object.
        """
        if prefix.magnitude == 1.0 and not prefix.symbol:
            return self
        if self.prefixes != "decimal":
            raise UnsupportedPrefixError(f"unit {self.name!r} does not support prefixes")
        if self.parent is not None:
            raise UnsupportedPrefixError(f"unit {self.name!r} is already prefixed")
        with self._lock:
            unit = self._variants.get(prefix.name)
            if unit is None:
                unit = Unit(
                    prefix.name + self.name,
                    self.base_name,
                    aliases=[prefix.symbol + a for a in self.aliases]
                    + [prefix.name + a for a in self.aliases],
                )
                unit.prefix = prefix
                unit.parent = self
                unit.factor = self.factor * prefix.magnitude
                unit.definitions = ((prefix.magnitude, self.name),)
                self._variants[prefix.name] = unit
        return unit


class DerivedUnit(_UnitBase):
    """Product of powered units, e.g. radian^1 * second^-1."""

    def __init__(self, name: str, base_name: str, aliases: Iterable[str] = (),
                 components: Iterable[tuple[Unit, int]] = ()):
        self.name = name
        self.base_name = base_name
        self.aliases = tuple(aliases)
        self.components: list[tuple[Unit, int]] = []
        self.factor = 1.0
        for unit, power in components:
            self.add_unit(unit, power)

    def add_unit(self, unit: Unit, power: int) -> "DerivedUnit":
        if not isinstance(power, int) or power == 0:
            raise ValueError("component power must be a non-zero integer")
        self.components.append((unit, power))
        self.factor = math.prod(u.factor ** p for u, p in self.components)
        return self

    def swap(self, units: Sequence[Unit], name: str, aliases: Iterable[str] = (),
             base_name: str | None = None) -> "DerivedUnit":
        """Return a new derived unit with matching components replaced.

        Each replacement must share its ``base_name`` with exactly one
        component.
        """
        components = list(self.components)
        for replacement in units:
            matches = [i for i, (u, _) in enumerate(components) if u.base_name == replacement.base_name]
            if len(matches) != 1:
                raise IncompatibleUnitError(
                    f"{replacement.name!r} ({replacement.base_name}) matches "
                    f"{len(matches)} components of {self.name!r}"
                )
            i = matches[0]
            components[i] = (replacement, components[i][1])
        return DerivedUnit(name, base_name or self.base_name, aliases, components)


def _check_components(unit: DerivedUnit):
    if not unit.components:
        raise UnitError(f"derived unit {unit.name!r} has no components")


class UnitRegistry:
    """Name/alias index of units.

    Registration happens during setup; lookups afterwards are read-only and
    safe from any thread.
    """

    def __init__(self):
        self._units: dict[str, _UnitBase] = {}
        self._canonical: dict[str, Unit] = {}

    def __contains__(self, name: str) -> bool:
        try:
            self.lookup(name)
        except UnknownUnitError:
            return False
        return True

    def units(self) -> list[_UnitBase]:
        seen, out = set(), []
        for unit in self._units.values():
            if id(unit) not in seen:
                seen.add(id(unit))
                out.append(unit)
        return out

    def define(self, unit: _UnitBase) -> _UnitBase:
        keys = [unit.name, *unit.aliases]
        for key in keys:
            existing = self._units.get(key)
            if existing is not None and existing is not unit:
                raise DuplicateUnitError(f"{key!r} is already registered for {existing.name!r}")
        if isinstance(unit, Unit):
            self._resolve(unit)
        else:
            _check_components(unit)
        for key in keys:
            self._units[key] = unit
        return unit

    def _resolve(self, unit: Unit):
        if unit.parent is not None:
            return
        if not unit.definitions:
            current = self._canonical.get(unit.base_name)
            if current is not None and current is not unit:
                raise DuplicateUnitError(
                    f"dimension {unit.base_name!r} already has canonical unit {current.name!r}"
                )
            self._canonical[unit.base_name] = unit
            unit.factor = 1.0
            return
        factors = []
        for magnitude, target in unit.definitions:
            ref = self.lookup(target)
            if ref.base_name != unit.base_name:
                raise IncompatibleUnitError(
                    f"{unit.name!r} ({unit.base_name}) defined via {ref.name!r} ({ref.base_name})"
                )
            factors.append(magnitude * ref.factor)
        if any(not math.isclose(f, factors[0], rel_tol=1e-12) for f in factors[1:]):
            raise UnitError(f"definitions of {unit.name!r} disagree: {factors}")
        unit.factor = factors[0]

    def lookup(self, name: str) -> _UnitBase:
        unit = self._units.get(name)
        if unit is not None:
            return unit
        for prefix in PREFIXES.values():
            for head in (prefix.name, prefix.symbol):
                if name.startswith(head) and len(name) > len(head):
                    base = self._units.get(name[len(head):])
                    if isinstance(base, Unit) and base.prefixes == "decimal" and base.parent is None:
                        return base.specifier(prefix)
        raise UnknownUnitError(f"unknown unit {name!r}")


def convert(value: float, from_unit: _UnitBase, to_unit: _UnitBase) -> float:
    if from_unit is to_unit:
        return float(value)
    if from_unit.base_name != to_unit.base_name:
        raise IncompatibleUnitError(
            f"cannot convert {from_unit.name!r} ({from_unit.base_name}) "
            f"to {to_unit.name!r} ({to_unit.base_name})"
        )
    return value * from_unit.factor / to_unit.factor


REGISTRY = UnitRegistry()


def define_unit(unit: _UnitBase, registry: UnitRegistry = REGISTRY) -> _UnitBase:
    return registry.define(unit)


def lookup(name: str, registry: UnitRegistry = REGISTRY) -> _UnitBase:
    return registry.lookup(name)


def derive_unit(name: str, base_name: str, components: Iterable[tuple[Unit, int]],
                aliases: Iterable[str] = ()) -> DerivedUnit:
    return DerivedUnit(name, base_name, aliases, components)


# -- default units ----------------------------------------------------------

SECOND = define_unit(Unit("second", "time", ["s", "sec", "seconds"], prefixes="decimal"))
MILLISECOND = SECOND.specifier(UnitPrefix.MILLI)
MICROSECOND = SECOND.specifier(UnitPrefix.MICRO)
NANOSECOND = SECOND.specifier(UnitPrefix.NANO)
# "m" belongs to meter, so minute drops the short alias
MINUTE = define_unit(Unit("minute", "time", ["min", "minutes"], definitions=[(60, "s")]))
HOUR = define_unit(Unit("hour", "time", ["h", "hr", "hours"], definitions=[(60, "min")]))
DAY = define_unit(Unit("day", "time", ["d", "days"], definitions=[(24, "h")]))

METER = define_unit(Unit("meter", "length", ["m", "meters", "metre"], prefixes="decimal"))
CENTIMETER = METER.specifier(UnitPrefix.CENTI)
MILLIMETER = METER.specifier(UnitPrefix.MILLI)
KILOMETER = METER.specifier(UnitPrefix.KILO)
INCH = define_unit(Unit("inch", "length", ["in", "inches"], definitions=[(0.0254, "m")]))
FOOT = define_unit(Unit("foot", "length", ["ft", "feet"], definitions=[(12, "in")]))
MILE = define_unit(Unit("mile", "length", ["mi", "miles"], definitions=[(5280, "ft")]))

RADIAN = define_unit(Unit("radian", "angle", ["rad", "radians"], prefixes="decimal"))
DEGREE = define_unit(Unit("degree", "angle", ["deg", "degrees"], definitions=[(math.pi / 180, "rad")]))

UNITLESS = define_unit(Unit("unitless", "dimensionless", ["none"]))
DECIBEL_MILLIWATT = define_unit(Unit("decibel-milliwatt", "power-level", ["dBm"]))

METER_PER_SECOND = define_unit(
    DerivedUnit("meter per second", "speed", ["m/s", "meters per second"])
    .add_unit(METER, 1).add_unit(SECOND, -1)
)
CENTIMETER_PER_SECOND = define_unit(
    METER_PER_SECOND.swap([CENTIMETER], "centimeter per second", ["cm/s"])
)
KILOMETER_PER_HOUR = define_unit(
    METER_PER_SECOND.swap([KILOMETER, HOUR], "kilometer per hour", ["km/h", "kph"])
)
RADIAN_PER_SECOND = define_unit(
    DerivedUnit("radian per second", "angularvelocity", ["rad/s", "radians per second"])
    .add_unit(RADIAN, 1).add_unit(SECOND, -1)
)
DEGREE_PER_SECOND = define_unit(
    RADIAN_PER_SECOND.swap([DEGREE], "degree per second", ["deg/s", "degrees per second"])
)
DEGREE_PER_MINUTE = define_unit(
    RADIAN_PER_SECOND.swap([DEGREE, MINUTE], "degree per minute", ["deg/min", "degrees per minute"])
)
METER_PER_SECOND_SQUARED = define_unit(
    DerivedUnit("meter per second squared", "acceleration", ["m/s^2"])
    .add_unit(METER, 1).add_unit(SECOND, -2)
)

__all__ += [
    "SECOND", "MILLISECOND", "MICROSECOND", "NANOSECOND", "MINUTE", "HOUR", "DAY",
    "METER", "CENTIMETER", "MILLIMETER", "KILOMETER", "INCH", "FOOT", "MILE",
    "RADIAN", "DEGREE", "UNITLESS", "DECIBEL_MILLIWATT",
    "METER_PER_SECOND", "CENTIMETER_PER_SECOND", "KILOMETER_PER_HOUR",
    "RADIAN_PER_SECOND", "DEGREE_PER_SECOND", "DEGREE_PER_MINUTE",
    "METER_PER_SECOND_SQUARED",
]
