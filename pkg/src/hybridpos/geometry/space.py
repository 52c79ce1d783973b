"""Reference spaces: local coordinate systems chained to a global space."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .. import units as u
from ..model.objects import DataObject
from ..serialization import require, serializable, unit_from_json, unit_to_json
from .homography import SingularTransformError, apply_homography, invert_homography
from .positions import AbsolutePosition, GeographicalPosition
from .vectors import IDENTITY, AngularVelocity, LinearVelocity, Quaternion, Vector3


class DanglingSpaceError(LookupError):
    """A space refers to a parent that cannot be resolved."""


def _safe_scale(s: Vector3) -> Vector3:
    return Vector3(*(1.0 if c == 0.0 else c for c in s))


@serializable()
class ReferenceSpace(DataObject):
    """A coordinate system defined relative to a parent space.

    A point ``p`` given in this space maps to the parent as::

        p_parent = S^-1 R^-1 (H(p) - t)

    converted from :attr:`unit` to the parent's unit, where ``H`` is the
    optional perspective, ``t`` the translation, ``R`` the rotation and
    ``S`` the scale with zero components treated as one. The inverse mapping
    is used when reading positions back into this space.

    Parameters
    ----------
    parent
        Parent space; ``None`` creates a root (global) space.
    unit
        Length unit of coordinates in this space. Defaults to the parent's
        unit, or meter for a root space.
    """

    def __init__(self, parent: "ReferenceSpace | None" = None, uid: str | None = None,
                 unit: u.Unit | None = None, display_name: str | None = None, **kw):
        super().__init__(uid, display_name, parent_uid=parent.uid if parent is not None else None, **kw)
        self.parent = parent
        self.unit = unit if unit is not None else (parent.unit if parent is not None else u.METER)
        self.translation = Vector3()
        self.rotation = IDENTITY
        self.scale = Vector3(1.0, 1.0, 1.0)
        self.perspective: np.ndarray | None = None

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        a = {k: v for k, v in self.__dict__.items() if k not in ("parent", "perspective")}
        b = {k: v for k, v in other.__dict__.items() if k not in ("parent", "perspective")}
        if a != b:
            return False
        if (self.perspective is None) != (other.perspective is None):
            return False
        return self.perspective is None or np.array_equal(self.perspective, other.perspective)

    # -- fluent configuration --

    def set_unit(self, unit: u.Unit) -> "ReferenceSpace":
        if unit.base_name != "length":
            raise u.IncompatibleUnitError(f"space unit must be a length, got {unit.name!r}")
        self.unit = unit
        return self

    def set_translation(self, x: float, y: float, z: float = 0.0) -> "ReferenceSpace":
        self.translation = Vector3(float(x), float(y), float(z))
        return self

    def set_rotation(self, rotation: Quaternion) -> "ReferenceSpace":
        self.rotation = Quaternion(*rotation).normalized()
        return self

    def set_scale(self, x: float, y: float, z: float = 1.0) -> "ReferenceSpace":
        if min(x, y, z) < 0:
            raise ValueError("scale components must be non-negative")
        self.scale = Vector3(float(x), float(y), float(z))
        return self

    def set_perspective(self, matrix) -> "ReferenceSpace":
        if matrix is None:
            self.perspective = None
            return self
        h = np.asarray(matrix, dtype=float).reshape(3, 3)
        invert_homography(h)  # reject singular matrices early
        self.perspective = h
        return self

    def set_parent(self, parent: "ReferenceSpace | None") -> "ReferenceSpace":
        self.parent = parent
        self.parent_uid = parent.uid if parent is not None else None
        return self

    # -- single-step transforms --

    def _parent_unit(self) -> u.Unit:
        return self.parent.unit if self.parent is not None else self.unit

    def to_parent(self, p: AbsolutePosition, parent_unit: u.Unit | None = None) -> AbsolutePosition:
        """Map ``p`` from this space into its parent."""
        parent_unit = parent_unit or self._parent_unit()
        if isinstance(p, GeographicalPosition):
            return p.replace(reference_space_uid=self.parent_uid)
        v = p.to_vector3(self.unit)
        if self.perspective is not None:
            x, y = apply_homography(self.perspective, (v.x, v.y))
            v = Vector3(x, y, v.z)
        inv = self.rotation.conjugate()
        s = _safe_scale(self.scale)
        v = inv.rotate(v - self.translation).divide(s)
        k = u.convert(1.0, self.unit, parent_unit)
        acc = None if p.accuracy is None else p.accuracy / min(s)
        return p.with_vector(
            v * k,
            unit=parent_unit,
            accuracy=acc,
            orientation=None if p.orientation is None else (inv * p.orientation).normalized(),
            linear_velocity=None if p.linear_velocity is None else LinearVelocity(*Vector3(*p.linear_velocity).divide(s)),
            angular_velocity=None if p.angular_velocity is None else AngularVelocity(*inv.rotate(p.angular_velocity)),
            reference_space_uid=self.parent_uid,
        )

    def from_parent(self, p: AbsolutePosition, parent_unit: u.Unit | None = None) -> AbsolutePosition:
        """Map ``p`` from the parent into this space (inverse of :meth:`to_parent`)."""
        if isinstance(p, GeographicalPosition):
            return p.replace(reference_space_uid=self.uid)
        v = p.to_vector3(self.unit)
        s = _safe_scale(self.scale)
        r = self.rotation
        v = r.rotate(v.multiply(s)) + self.translation
        if self.perspective is not None:
            x, y = apply_homography(invert_homography(self.perspective), (v.x, v.y))
            v = Vector3(x, y, v.z)
        acc = None if p.accuracy is None else p.accuracy * min(s)
        return p.with_vector(
            v,
            unit=self.unit,
            accuracy=acc,
            orientation=None if p.orientation is None else (r * p.orientation).normalized(),
            linear_velocity=None if p.linear_velocity is None else LinearVelocity(*Vector3(*p.linear_velocity).multiply(s)),
            angular_velocity=None if p.angular_velocity is None else AngularVelocity(*r.rotate(p.angular_velocity)),
            reference_space_uid=self.uid,
        )

    # -- chain transforms --

    def chain(self, resolve: Callable[[str], "ReferenceSpace | None"] | None = None) -> list["ReferenceSpace"]:
        """Spaces from this one up to (and including) the root."""
        out = [self]
        seen = {self.uid}
        node = self
        while node.parent_uid is not None:
            parent = node.parent
            if parent is None and resolve is not None:
                parent = resolve(node.parent_uid)
            if parent is None:
                raise DanglingSpaceError(f"parent space {node.parent_uid!r} of {node.uid!r} is not available")
            if parent.uid in seen:
                raise DanglingSpaceError(f"reference space cycle through {parent.uid!r}")
            seen.add(parent.uid)
            out.append(parent)
            node = parent
        return out

    def transform_to_global(self, p: AbsolutePosition, resolve=None) -> AbsolutePosition:
        spaces = self.chain(resolve)
        for space, parent in zip(spaces, spaces[1:]):
            p = space.to_parent(p, parent.unit)
        return p.replace(reference_space_uid=spaces[-1].uid)

    def transform_from_global(self, p: AbsolutePosition, resolve=None) -> AbsolutePosition:
        spaces = self.chain(resolve)
        if len(spaces) == 1:
            return p.with_vector(p.to_vector3(self.unit), unit=self.unit, reference_space_uid=self.uid)
        for space in reversed(spaces[:-1]):
            p = space.from_parent(p)
        return p

    def matrix(self) -> np.ndarray:
        """4x4 affine matrix of :meth:`to_parent` (perspective and units excluded)."""
        from scipy.spatial.transform import Rotation

        r_inv = Rotation.from_quat(self.rotation.conjugate()).as_matrix()
        s_inv = np.diag(1.0 / np.asarray(_safe_scale(self.scale)))
        m = np.eye(4)
        m[:3, :3] = s_inv @ r_inv
        m[:3, 3] = -(s_inv @ r_inv @ np.asarray(self.translation))
        return m

    # -- serialization --

    def _to_json(self) -> dict:
        data = super()._to_json()
        data["unit"] = unit_to_json(self.unit)
        data["translation"] = {"x": self.translation.x, "y": self.translation.y, "z": self.translation.z}
        q = self.rotation
        data["rotation"] = {"x": q.x, "y": q.y, "z": q.z, "w": q.w}
        data["scale"] = {"x": self.scale.x, "y": self.scale.y, "z": self.scale.z}
        if self.perspective is not None:
            data["perspective"] = self.perspective.tolist()
        return data

    def _load_json(self, data: dict) -> None:
        super()._load_json(data)
        self.parent = None
        self.unit = unit_from_json(require(data, "unit"), "unit")
        t, r, s = data.get("translation", {}), data.get("rotation", {}), data.get("scale", {})
        self.translation = Vector3(t.get("x", 0.0), t.get("y", 0.0), t.get("z", 0.0))
        self.rotation = Quaternion(r.get("x", 0.0), r.get("y", 0.0), r.get("z", 0.0), r.get("w", 1.0))
        self.scale = Vector3(s.get("x", 1.0), s.get("y", 1.0), s.get("z", 1.0))
        p = data.get("perspective")
        self.perspective = None if p is None else np.asarray(p, dtype=float)


__all__ = ["ReferenceSpace", "DanglingSpaceError", "SingularTransformError"]
