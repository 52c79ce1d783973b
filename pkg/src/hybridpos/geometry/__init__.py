"""Vectors, positions, homographies and reference spaces."""
from .vectors import AngularVelocity, LinearVelocity, Orientation, Quaternion, Vector3
from .positions import (
    Absolute2DPosition, Absolute3DPosition, AbsolutePosition, GeographicalPosition,
    RelativeAngle, RelativeDistance, RelativePosition, RelativeVelocity,
)
from .homography import SingularTransformError, apply_homography, homography_from_points, invert_homography
from .space import DanglingSpaceError, ReferenceSpace

__all__ = [
    "Vector3", "Quaternion", "Orientation", "LinearVelocity", "AngularVelocity",
    "AbsolutePosition", "Absolute2DPosition", "Absolute3DPosition", "GeographicalPosition",
    "RelativePosition", "RelativeDistance", "RelativeAngle", "RelativeVelocity",
    "homography_from_points", "apply_homography", "invert_homography", "SingularTransformError",
    "ReferenceSpace", "DanglingSpaceError",
]
