"""Positioning algorithms and the nodes running them."""
from .filters import displacement_apply, sma_update
from .fingerprinting import Fingerprint, FingerprintDatabase
from .fusion import fuse_quaternions, fuse_weighted
from .lateration import InsufficientObservationsError, SingularGeometryError, triangulate, trilaterate
from .velocity import velocity_process

__all__ = [
    "fuse_weighted", "fuse_quaternions", "velocity_process", "trilaterate", "triangulate",
    "InsufficientObservationsError", "SingularGeometryError", "Fingerprint", "FingerprintDatabase",
    "sma_update", "displacement_apply",
]
