"""k-nearest-neighbour fingerprinting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from ..geometry.positions import AbsolutePosition
from ..model.uid import new_uid

MISSING_VALUE = -100.0


@dataclass(frozen=True)
class Fingerprint:
    """Features (e.g. RSSI per transmitter uid) recorded at a known position."""

    position: AbsolutePosition
    features: Mapping[str, float]
    uid: str = field(default_factory=new_uid)

    def __post_init__(self):
        if not self.features:
            raise ValueError("a fingerprint needs at least one feature")


class FingerprintDatabase:
    """Offline fingerprint store with online kNN lookup.

    Feature keys missing on either side are imputed with ``missing``.
    Equal distances are ordered by fingerprint uid.
    """

    def __init__(self, missing: float = MISSING_VALUE):
        self.missing = missing
        self._prints: list[Fingerprint] = []

    def __len__(self):
        return len(self._prints)

    def store(self, fingerprint: Fingerprint) -> None:
        self._prints.append(fingerprint)

    def distance(self, a: Mapping[str, float], b: Mapping[str, float]) -> float:
        keys = set(a) | set(b)
        return math.sqrt(sum((a.get(k, self.missing) - b.get(k, self.missing)) ** 2 for k in keys))

    def nearest(self, features: Mapping[str, float], k: int = 1) -> list[Fingerprint]:
        if not self._prints:
            raise LookupError("fingerprint database is empty")
        if k < 1:
            raise ValueError("k must be >= 1")
        ranked = sorted(self._prints, key=lambda fp: (self.distance(features, fp.features), fp.uid))
        return ranked[:k]

    def locate(self, features: Mapping[str, float], k: int = 1) -> AbsolutePosition:
        hits = self.nearest(features, k)
        unit = hits[0].position.unit
        vecs = [fp.position.to_vector3(unit) for fp in hits]
        mean = tuple(sum(v[i] for v in vecs) / len(vecs) for i in range(3))
        acc = sum(math.dist(v, mean) for v in vecs) / len(vecs)
        return hits[0].position.with_vector(mean, accuracy=acc, accuracy_unit=unit,
                                            orientation=None, linear_velocity=None, angular_velocity=None)
