"""Graph nodes wrapping the positioning algorithms."""
from __future__ import annotations

from typing import Callable, Mapping

from ..geometry.positions import RelativeDistance
from ..geometry.space import ReferenceSpace
from ..geometry.vectors import Vector3
from ..graph.node import ProcessingNode
from .filters import displacement_apply, sma_update
from .fingerprinting import FingerprintDatabase
from .lateration import InsufficientObservationsError, SingularGeometryError, trilaterate
from .velocity import velocity_process


def _all(obj) -> bool:
    return True


class VelocityProcessingNode(ProcessingNode):
    """Dead reckoning: advances each position to the frame's creation time.

    Positions newer than the frame are left unchanged and a ``warning``
    event is emitted.
    """

    def __init__(self, object_filter: Callable = _all, name=None, **kw):
        super().__init__(name=name, **kw)
        self.object_filter = object_filter

    def process(self, frame, sender=None):
        for obj in frame.objects:
            p = obj.position
            if p is None or not self.object_filter(obj):
                continue
            dt = (frame.created_timestamp - p.timestamp) / 1e6
            if dt < 0:
                self.emit("warning", f"position of {obj.uid!r} is newer than frame {frame.uid!r}")
                continue
            obj.position = velocity_process(p, dt)
        return frame


class SMAFilterNode(ProcessingNode):
    """Simple moving average over the last ``window`` samples per object.

    ``target`` selects what is smoothed: ``"accuracy"`` or ``"position"``.
    State lives in the model's node data service.
    """

    def __init__(self, window: int, target: str = "accuracy", object_filter: Callable = _all,
                 name=None, **kw):
        super().__init__(name=name, **kw)
        if window < 1:
            raise ValueError("window must be >= 1")
        if target not in ("accuracy", "position"):
            raise ValueError("target must be 'accuracy' or 'position'")
        self.window = window
        self.target = target
        self.object_filter = object_filter

    def process(self, frame, sender=None):
        from ..services import NodeDataService

        store = self.model.find_service(NodeDataService)
        for obj in frame.objects:
            p = obj.position
            if p is None or not self.object_filter(obj):
                continue
            state = store.get(self.uid, obj.uid, {"accuracy": [], "x": [], "y": [], "z": []})
            if self.target == "accuracy":
                if p.accuracy is None:
                    continue
                value, state["accuracy"] = sma_update(state["accuracy"], p.accuracy, self.window)
                obj.position = p.replace(accuracy=value)
            else:
                out = []
                for axis, v in zip("xyz", p.vector):
                    value, state[axis] = sma_update(state[axis], v, self.window)
                    out.append(value)
                obj.position = p.with_vector(out)
            store.set(self.uid, obj.uid, state)
        return frame


class DisplacementNode(ProcessingNode):
    """Turns an absolute but drifting position stream into relative motion.

    The position carried by the frame is expressed in ``space`` (global when
    omitted). Only its change since the previous sample is used: it is added
    to the object's latest stored (fused) position. The first sample of each
    object only seeds the state and produces no output.
    """

    def __init__(self, space: ReferenceSpace | None = None, object_filter: Callable = _all,
                 name=None, **kw):
        super().__init__(name=name, **kw)
        self.space = space
        self.object_filter = object_filter

    def process(self, frame, sender=None):
        from ..services import NodeDataService

        store = self.model.find_service(NodeDataService)
        emitted = False
        for obj in frame.objects:
            p = obj.position
            if p is None or not self.object_filter(obj):
                continue
            if self.space is not None:
                p = self.space.transform_to_global(p)
            cur, t = p.vector, p.timestamp
            prev = store.get(self.uid, obj.uid)
            store.set(self.uid, obj.uid, {"v": list(cur), "t": t})
            if prev is None:
                continue
            service = self.model.find_data_service(obj)
            stored = service.find_by_uid(obj.uid) if service is not None else None
            anchor = stored.position if stored is not None else None
            if anchor is None:
                obj.position = p
            else:
                new = displacement_apply(anchor.to_vector3(p.unit), anchor.timestamp,
                                         Vector3(*prev["v"]), prev["t"], cur, t)
                obj.position = p.with_vector(new)
            emitted = True
        return frame if emitted else None


class TrilaterationNode(ProcessingNode):
    """Positions objects from their relative distances to stored landmarks."""

    def __init__(self, object_filter: Callable = _all, name=None, **kw):
        super().__init__(name=name, **kw)
        self.object_filter = object_filter

    def _landmark(self, uid, frame):
        obj = frame.get_object(uid)
        if obj is None or obj.position is None:
            service = self.model.find_data_service("DataObject")
            obj = service.find_by_uid(uid) if service is not None else None
        return obj if obj is not None and obj.position is not None else None

    def process(self, frame, sender=None):
        for obj in frame.objects:
            if not self.object_filter(obj):
                continue
            obs = []
            for rel in obj.get_relative_positions(kind=RelativeDistance):
                landmark = self._landmark(rel.reference_object_uid, frame)
                if landmark is not None:
                    obs.append((landmark.position, rel.value_in(landmark.position.unit)))
            if len(obs) < 3:
                continue
            try:
                obj.position = trilaterate(obs).replace(timestamp=frame.created_timestamp)
            except (InsufficientObservationsError, SingularGeometryError) as exc:
                self.emit("warning", str(exc))
        return frame


class FingerprintingNode(ProcessingNode):
    """Positions the frame source by kNN lookup of its feature vector.

    ``features(frame)`` extracts the online measurement; by default the
    frame's ``features`` attribute.
    """

    def __init__(self, database: FingerprintDatabase, k: int = 3,
                 features: Callable[[object], Mapping[str, float]] | None = None, name=None, **kw):
        super().__init__(name=name, **kw)
        self.database = database
        self.k = k
        self.features = features or (lambda frame: getattr(frame, "features", None))

    def process(self, frame, sender=None):
        feats = self.features(frame)
        if feats and frame.source is not None and len(self.database):
            k = min(self.k, len(self.database))
            frame.source.position = self.database.locate(feats, k).replace(timestamp=frame.created_timestamp)
        return frame
