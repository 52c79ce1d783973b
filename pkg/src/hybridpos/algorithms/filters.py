"""Stateless cores of the stateful filters (state is kept by the caller)."""
from __future__ import annotations

from collections.abc import Sequence

from ..geometry.vectors import Vector3


def sma_update(history: Sequence[float], value: float, window: int) -> tuple[float, list[float]]:
    """Append ``value`` to ``history`` and return (mean of last ``window``, new history)."""
    if window < 1:
        raise ValueError("window must be >= 1")
    kept = list(history)[-(window - 1):] if window > 1 else []
    kept.append(float(value))
    return sum(kept) / len(kept), kept


def displacement_apply(anchor: Vector3, anchor_t: int, prev: Vector3, prev_t: int,
                       cur: Vector3, cur_t: int) -> Vector3:
    """Apply the motion between two internal samples to ``anchor``.

    Only the part of the interval ``[prev_t, cur_t]`` after ``anchor_t`` is
    applied, assuming constant speed within the interval, since the anchor
    already accounts for motion up to its own timestamp.
    """
    delta = Vector3(*cur) - prev
    if cur_t > prev_t:
        frac = min(1.0, max(0.0, (anchor_t - prev_t) / (cur_t - prev_t)))
    else:
        frac = 0.0
    return Vector3(*anchor) + delta * (1.0 - frac)
