"""Accuracy-weighted fusion of concurrent position estimates."""
from __future__ import annotations

from typing import Sequence

from ..geometry.positions import AbsolutePosition
from ..geometry.vectors import AngularVelocity, LinearVelocity, Quaternion

EPSILON = 1e-6


def _weighted_vec(pairs):
    total = sum(w for w, _ in pairs)
    return tuple(sum(w * v[i] for w, v in pairs) / total for i in range(3))


def fuse_quaternions(quats: Sequence[Quaternion], weights: Sequence[float]) -> Quaternion:
    """Weighted quaternion mean: align hemispheres with the first, sum, normalize."""
    ref = quats[0]
    acc = [0.0, 0.0, 0.0, 0.0]
    for q, w in zip(quats, weights):
        sign = -1.0 if ref.dot(q) < 0 else 1.0
        for i in range(4):
            acc[i] += sign * w * q[i]
    q = Quaternion(*acc)
    if q.norm() < 1e-12:
        return ref.normalized()
    return q.normalized()


def fuse_weighted(samples: Sequence[AbsolutePosition], epsilon: float = EPSILON) -> AbsolutePosition:
    """Fuse positions with weights ``1 / accuracy``.

    Units follow the first sample; accuracies are converted to its accuracy
    unit and clamped to ``epsilon`` when not positive. Unknown accuracies
    count as 1. Orientation and velocities are averaged over the samples that
    carry them. The result's accuracy is the weighted mean accuracy and its
    timestamp the latest sample timestamp.
    """
    if not samples:
        raise ValueError("at least one sample is required")
    if len(samples) == 1:
        return samples[0]
    first = samples[0]
    accs = [max(p.accuracy_in(first.accuracy_unit), epsilon) for p in samples]
    weights = [1.0 / a for a in accs]
    vecs = [p.to_vector3(first.unit) for p in samples]
    xyz = _weighted_vec(list(zip(weights, vecs)))
    total = sum(weights)
    changes = dict(
        accuracy=sum(w * a for w, a in zip(weights, accs)) / total,
        timestamp=max(p.timestamp for p in samples),
    )
    lin = [(w, p.linear_velocity) for w, p in zip(weights, samples) if p.linear_velocity is not None]
    if lin:
        changes["linear_velocity"] = LinearVelocity(*_weighted_vec(lin))
    ang = [(w, p.angular_velocity) for w, p in zip(weights, samples) if p.angular_velocity is not None]
    if ang:
        changes["angular_velocity"] = AngularVelocity(*_weighted_vec(ang))
    ori = [(w, p.orientation) for w, p in zip(weights, samples) if p.orientation is not None]
    if ori:
        changes["orientation"] = fuse_quaternions([q for _, q in ori], [w for w, _ in ori])
    return first.with_vector(xyz, **changes)
