"""Built-in flow shapes: debounce, clone, timed pull, filter, space conversion, merge."""
from __future__ import annotations

from typing import Callable

from .. import units as u
from ..algorithms.fusion import fuse_weighted
from ..model.frames import DataFrame
from ..model.uid import new_uid
from .node import ProcessingNode


def _to_us(value: float, unit: u.Unit) -> int:
    us = u.convert(value, unit, u.MICROSECOND)
    if us <= 0:
        raise ValueError("interval must be positive")
    return int(round(us))


class DebounceNode(ProcessingNode):
    """Forwards at most one frame per ``interval`` per inlet; the rest are dropped."""

    def __init__(self, interval: float, unit: u.Unit = u.MILLISECOND, name=None, **kw):
        super().__init__(name=name, **kw)
        self.interval_us = _to_us(interval, unit)
        self._last: dict[str | None, int] = {}

    def process(self, frame, sender=None):
        key = sender.uid if sender is not None else None
        now = self.now()
        last = self._last.get(key)
        if last is not None and now - last < self.interval_us:
            return None
        self._last[key] = now
        return frame


class CloneNode(ProcessingNode):
    """Emits a copy; with ``repack`` the copy gets a fresh uid and timestamp."""

    def __init__(self, repack: bool = False, name=None, **kw):
        super().__init__(name=name, **kw)
        self.repack = repack

    def process(self, frame, sender=None):
        return frame.repack(self.now()) if self.repack else frame.copy()


class TimedPullNode(ProcessingNode):
    """Pulls upstream every ``interval`` while the model runs; passes frames through."""

    def __init__(self, interval: float, unit: u.Unit = u.MILLISECOND, name=None, **kw):
        super().__init__(name=name, **kw)
        self.interval_us = _to_us(interval, unit)
        self._timer = None
        self._running = False

    def on_start(self):
        self._running = True
        self._tick_later()

    def on_stop(self):
        self._running = False
        if self._timer is not None:
            self._timer.cancel()

    def _tick_later(self):
        self._timer = self.model.scheduler.call_later(self.interval_us, self._tick)

    def _tick(self):
        if not self._running:
            return
        self.pull()
        self._tick_later()


class FilterNode(ProcessingNode):
    def __init__(self, predicate: Callable[[DataFrame], bool], name=None, **kw):
        super().__init__(name=name, **kw)
        self.predicate = predicate

    def process(self, frame, sender=None):
        return frame if self.predicate(frame) else None


class ConvertFromSpaceNode(ProcessingNode):
    """Rewrites positions expressed in ``space`` (or untagged) into the global space."""

    def __init__(self, space, name=None, **kw):
        super().__init__(name=name, **kw)
        self.space = space

    def process(self, frame, sender=None):
        for obj in frame.objects:
            p = obj.position
            if p is not None and p.reference_space_uid in (None, self.space.uid):
                obj.position = self.space.transform_to_global(p)
        return frame


class ConvertToSpaceNode(ProcessingNode):
    """Rewrites global positions into ``space``."""

    def __init__(self, space, name=None, **kw):
        super().__init__(name=name, **kw)
        self.space = space

    def process(self, frame, sender=None):
        for obj in frame.objects:
            p = obj.position
            if p is not None and p.reference_space_uid != self.space.uid:
                obj.position = self.space.transform_from_global(p)
        return frame


def default_merge_key(frame: DataFrame):
    return frame.source.uid if frame.source is not None else frame.uid


class _Group:
    __slots__ = ("contributions", "timer")

    def __init__(self):
        self.contributions: dict[int, DataFrame] = {}
        self.timer = None


class MergeNode(ProcessingNode):
    """Combines frames arriving on different inlets that share a group key.

    A group is emitted as soon as every inlet contributed, or when
    ``timeout`` has elapsed since its first frame provided at least
    ``min_count`` inlets contributed; otherwise it is discarded. A later frame
    from the same inlet replaces the earlier one. In the merged frame, objects
    accepted by ``object_filter`` are combined with ``fuse`` (applied to their
    positions); all other objects are copied over once.

    Parameters
    ----------
    key
        ``key(frame) -> hashable``; the frame's source uid by default.
    timeout, timeout_unit
        Maximum wait after a group's first frame.
    min_count
        Contributions needed for a timed-out group to be emitted.
    object_filter
        Predicate selecting the objects to fuse; all objects by default.
    """

    def __init__(self, key: Callable[[DataFrame], object] | None = None, timeout: float = 20,
                 timeout_unit: u.Unit = u.MILLISECOND, min_count: int = 1,
                 object_filter: Callable | None = None, fuse=fuse_weighted, name=None, **kw):
        super().__init__(name=name, **kw)
        if min_count < 1:
            raise ValueError("min_count must be >= 1")
        self.key = key or default_merge_key
        self.timeout_us = _to_us(timeout, timeout_unit)
        self.min_count = min_count
        self.object_filter = object_filter or (lambda obj: True)
        self.fuse = fuse
        self._groups: dict[object, _Group] = {}

    def _inlet_index(self, sender) -> int:
        for i, inlet in enumerate(self.inlets):
            if inlet is sender:
                return i
        return len(self.inlets)  # external push

    def process(self, frame, sender=None):
        key = self.key(frame)
        group = self._groups.get(key)
        if group is None:
            group = self._groups[key] = _Group()
            group.timer = self.schedule(self.timeout_us, lambda: self._expire(key, group))
        group.contributions[self._inlet_index(sender)] = frame
        if len(group.contributions) >= max(1, len(self.inlets)):
            return self._close(key, group)
        return None

    def _expire(self, key, group):
        if self._groups.get(key) is not group:
            return None
        del self._groups[key]
        if len(group.contributions) < self.min_count:
            self.emit("discarded", key, len(group.contributions))
            return None
        self.forward(self.merge([group.contributions[i] for i in sorted(group.contributions)]))

    def _close(self, key, group):
        del self._groups[key]
        if group.timer is not None:
            group.timer.cancel()
        return self.merge([group.contributions[i] for i in sorted(group.contributions)])

    def merge(self, frames: list[DataFrame]) -> DataFrame:
        if len(frames) == 1:
            return frames[0]
        base = frames[0]
        merged = type(base).__new__(type(base))
        merged.__dict__.update(base.__dict__)
        merged.uid = new_uid()
        merged.created_timestamp = max(f.created_timestamp for f in frames)
        merged._objects = {}
        fused: dict[str, list] = {}
        for frame in frames:
            for obj in frame.objects:
                if self.object_filter(obj):
                    fused.setdefault(obj.uid, []).append(obj)
                elif obj.uid not in merged._objects:
                    merged._objects[obj.uid] = obj.copy()
        for uid, objs in fused.items():
            out = objs[0].copy()
            for other in objs[1:]:
                for rel in other.relative_positions:
                    if rel.key not in out._relative:
                        out.add_relative_position(rel)
            positions = [o.position for o in objs if o.position is not None]
            if positions:
                out.position = self.fuse(positions)
            merged._objects[uid] = out
        if merged._source_uid not in merged._objects:
            merged._source_uid = next(iter(merged._objects), None)
        return merged
