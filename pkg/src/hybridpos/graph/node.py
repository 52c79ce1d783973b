"""Graph nodes: push/pull delivery, inboxes, completions and events."""
from __future__ import annotations

import logging
import threading
from collections import OrderedDict, deque
from concurrent.futures import Future
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from ..model.frames import DataFrame
from ..model.uid import new_uid
from ..services import source_persistence_merge

log = logging.getLogger(__name__)


class GraphError(RuntimeError):
    pass


class GraphBuildError(GraphError):
    pass


class GraphFrozenError(GraphError):
    pass


@dataclass(frozen=True)
class NodeError:
    """Payload of an ``error`` event: which frame failed where."""

    frame_uid: str | None
    node_uid: str
    error: BaseException


@dataclass(frozen=True)
class CompletedEvent:
    """Payload of a ``completed`` event emitted after a sink persisted a frame."""

    frame_uid: str
    object_uids: tuple[str, ...]
    sink_uid: str


def resolved(value=None) -> Future:
    fut = Future()
    fut.set_result(value)
    return fut


def gather(futures: Iterable[Future]) -> Future:
    """Future resolving with all results, or rejecting with the first failure."""
    futures = list(futures)
    out = Future()
    if not futures:
        out.set_result([])
        return out
    remaining = [len(futures)]
    lock = threading.Lock()

    def done(_):
        with lock:
            remaining[0] -= 1
            last = remaining[0] == 0
        if out.done():
            return
        for f in futures:
            if f.done() and f.exception() is not None:
                try:
                    out.set_exception(f.exception())
                except Exception:
                    pass
                return
        if last:
            try:
                out.set_result([f.result() for f in futures])
            except Exception:
                pass

    for f in futures:
        f.add_done_callback(done)
    return out


# -- inbox policies -----------------------------------------------------------

class InboxPolicy:
    """What to do with queued frames when a node is busy."""

    def overflow(self, queued: int) -> int:
        """Number of oldest queued frames to drop before adding a new one."""
        return 0


class Unbounded(InboxPolicy):
    pass


@dataclass(frozen=True)
class DropOldest(InboxPolicy):
    capacity: int

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")

    def overflow(self, queued):
        return max(0, queued - self.capacity + 1)


class LatestOnly(DropOldest):
    def __init__(self):
        super().__init__(1)


class Node:
    """A vertex of the positioning graph.

    Frames arrive through :meth:`push` into an inbox and are handled one at a
    time by :meth:`process`; whatever it returns is pushed to every outlet.
    A push issued while the node is already busy (for example from inside a
    feedback loop) is queued rather than run re-entrantly. The returned
    future resolves once this node has finished with the frame, which says
    nothing about the rest of the graph.

    Failures of a downstream push are reported as ``error`` events on this
    node and, unless :attr:`chain_errors` is false, on every upstream node.

    Parameters
    ----------
    name
        Optional name; other shapes can refer to the node by it.
    inbox
        Queue policy while busy, :class:`Unbounded` by default.
    """

    chain_errors = True
    can_originate = False  # may produce frames without inlets (e.g. a worker wrapping sources)

    def __init__(self, name: str | None = None, uid: str | None = None,
                 inbox: InboxPolicy | None = None):
        self.uid = uid or new_uid()
        self.name = name
        self.inbox_policy = inbox or Unbounded()
        self.inlets: list[Node] = []
        self.outlets: list[Node] = []
        self.model = None
        self._listeners: dict[str, list[Callable]] = {}
        self._inbox: deque = deque()
        self._inbox_lock = threading.Lock()
        self._busy = threading.Lock()

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<{type(self).__name__}{label}>"

    # -- events --

    def on(self, event: str, listener: Callable) -> "Node":
        self._listeners.setdefault(event, []).append(listener)
        return self

    def emit(self, event: str, *args) -> None:
        for listener in list(self._listeners.get(event, ())):
            try:
                listener(*args)
            except Exception:
                log.exception("%r listener for %r failed", self, event)

    # -- lifecycle --

    def bind(self, model) -> None:
        self.model = model

    def on_start(self) -> None:
        pass

    def on_stop(self) -> None:
        pass

    def now(self) -> int:
        return self.model.now()

    def schedule(self, delay_us: int, fn: Callable[[], None]):
        """Run ``fn`` after ``delay_us`` on the model clock, serialized with frame handling."""
        return self.model.scheduler.call_later(delay_us, lambda: self.call(fn))

    def call(self, fn: Callable[[], None]) -> Future:
        """Queue ``fn`` in the inbox, behind any frames already waiting."""
        fut = Future()
        with self._inbox_lock:
            self._inbox.append(("call", fn, None, fut))
        self._drain()
        return fut

    # -- push --

    def push(self, frame: DataFrame, sender: "Node | None" = None) -> Future:
        fut = Future()
        dropped = []
        with self._inbox_lock:
            n = self.inbox_policy.overflow(sum(1 for i in self._inbox if i[0] == "frame"))
            if n:
                kept = deque()
                for item in self._inbox:
                    if n and item[0] == "frame":
                        dropped.append(item)
                        n -= 1
                    else:
                        kept.append(item)
                self._inbox = kept
            self._inbox.append(("frame", frame, sender, fut))
        for item in dropped:
            item[3].set_result(None)
            self.emit("dropped", item[1])
        self._drain()
        return fut

    def _drain(self) -> None:
        while True:
            if not self._busy.acquire(blocking=False):
                return
            try:
                while True:
                    with self._inbox_lock:
                        if not self._inbox:
                            break
                        item = self._inbox.popleft()
                    self._handle(item)
            finally:
                self._busy.release()
            with self._inbox_lock:
                if not self._inbox:
                    return

    def _handle(self, item) -> None:
        kind, payload, sender, fut = item
        try:
            if kind == "call":
                result = payload()
                fut.set_result(result)
                return
            result = self.process(payload, sender)
            sent = self.forward(result)
            self._complete(fut, sent)
        except Exception as exc:
            log.debug("%r failed on frame", self, exc_info=True)
            if not fut.done():
                fut.set_exception(exc)

    def _complete(self, fut: Future, sent: list[Future]) -> None:
        fut.set_result(None)

    def process(self, frame: DataFrame, sender: "Node | None" = None):
        """Handle one frame; return a frame, a list of frames or ``None``."""
        return frame

    def forward(self, result) -> list[Future]:
        if result is None:
            return []
        frames = result if isinstance(result, (list, tuple)) else [result]
        futures = []
        for frame in frames:
            futures.extend(self.send(frame))
        return futures

    def send(self, frame: DataFrame) -> list[Future]:
        """Push ``frame`` to every outlet (a private copy for all but the first)."""
        futures = []
        for i, outlet in enumerate(self.outlets):
            fut = outlet.push(frame if i == 0 else frame.copy(), self)
            fut.add_done_callback(lambda f, fr=frame, o=outlet: self._downstream_done(f, fr, o))
            futures.append(fut)
        return futures

    def _downstream_done(self, fut: Future, frame: DataFrame, outlet: "Node") -> None:
        exc = fut.exception()
        if exc is None:
            return
        self.raise_error(NodeError(frame.uid, outlet.uid, exc))

    def raise_error(self, err: NodeError, _visited: set | None = None) -> None:
        visited = _visited if _visited is not None else set()
        if self.uid in visited:
            return
        visited.add(self.uid)
        self.emit("error", err)
        if self.chain_errors:
            for inlet in self.inlets:
                inlet.raise_error(err, visited)

    # -- pull --

    def pull(self, **options) -> Future:
        """Forward a pull request upstream; resolves when every inlet has answered."""
        return gather(inlet.pull(**options) for inlet in self.inlets)


class SourceNode(Node):
    """Produces frames. Sources have no inlets.

    A pull-based source overrides :meth:`on_pull`; a push-based one calls
    :meth:`push` itself (typically from a timer started in :meth:`on_start`).
    Before a frame leaves the source its objects are completed from the
    model's data services (see :func:`source_persistence_merge`). Its push
    completion resolves once all outlets finished with the frame.
    """

    def __init__(self, source=None, name: str | None = None, persistence: bool = True, **kw):
        super().__init__(name=name, **kw)
        self.source = source
        self.persistence = persistence

    def process(self, frame, sender=None):
        if self.persistence and self.model is not None:
            source_persistence_merge(frame, self.model.services)
        return frame

    def _complete(self, fut, sent):
        gather(sent).add_done_callback(
            lambda g: fut.set_exception(g.exception()) if g.exception() else fut.set_result(None))

    def on_pull(self, **options) -> DataFrame | None:
        return None

    def pull(self, **options) -> Future:
        try:
            frame = self.on_pull(**options)
        except Exception as exc:
            fut = Future()
            fut.set_exception(exc)
            return fut
        if frame is None:
            return resolved(None)
        out = Future()
        self.push(frame).add_done_callback(
            lambda f: out.set_exception(f.exception()) if f.exception() else out.set_result(frame))
        return out


class ProcessingNode(Node):
    """Transforms frames; override :meth:`process`."""


class FunctionNode(ProcessingNode):
    """Processing node wrapping ``fn(frame) -> frame | list | None``."""

    def __init__(self, fn: Callable[[DataFrame], Any], name: str | None = None, **kw):
        super().__init__(name=name, **kw)
        self.fn = fn

    def process(self, frame, sender=None):
        return self.fn(frame)


class SinkNode(Node):
    """Persists every object of a frame, then emits ``completed`` on the model.

    Objects go to the data service resolved for their type and, if a
    trajectory service exists, positions are appended to it. Subclasses add
    their own output in :meth:`on_push`. A frame uid that reaches the sink
    again (over a second path of a diamond) is persisted again but reported
    as completed only once; the last ``remember`` uids are tracked.
    """

    def __init__(self, name: str | None = None, persist: bool = True, remember: int = 4096, **kw):
        super().__init__(name=name, **kw)
        self.persist = persist
        self._seen: OrderedDict[str, None] = OrderedDict()
        self._remember = remember

    def process(self, frame, sender=None):
        model = self.model
        if self.persist and model is not None:
            from ..services import TrajectoryService
            trajectory = model.services.find_service(TrajectoryService)
            for obj in frame.objects:
                service = model.services.find_data_service(obj)
                if service is not None:
                    service.insert(obj)
                if trajectory is not None and obj.position is not None:
                    trajectory.append(obj.uid, obj.position)
        self.on_push(frame)
        if frame.uid in self._seen:
            self._seen.move_to_end(frame.uid)
            return None
        self._seen[frame.uid] = None
        if len(self._seen) > self._remember:
            self._seen.popitem(last=False)
        if model is not None:
            model.emit("completed", CompletedEvent(frame.uid, tuple(o.uid for o in frame.objects), self.uid))
        return None

    def on_push(self, frame: DataFrame) -> None:
        pass


class CallbackSinkNode(SinkNode):
    def __init__(self, callback: Callable[[DataFrame], None], name: str | None = None, **kw):
        super().__init__(name=name, **kw)
        self.callback = callback

    def on_push(self, frame):
        self.callback(frame)


class MemorySinkNode(SinkNode):
    """Keeps every received frame in :attr:`frames`."""

    def __init__(self, name: str | None = None, **kw):
        super().__init__(name=name, **kw)
        self.frames: list[DataFrame] = []

    def on_push(self, frame):
        self.frames.append(frame)


class PlaceholderNode(ProcessingNode):
    """Pass-through node created for a name that no real node claims."""


class InputNode(ProcessingNode):
    """Open entry of a sub-graph; frames pushed into the model start here."""


class OutputNode(ProcessingNode):
    """Open exit of a sub-graph; frames reaching it go to :attr:`callbacks`."""

    def __init__(self, name=None, **kw):
        super().__init__(name=name, **kw)
        self.callbacks: list[Callable[[DataFrame], None]] = []

    def process(self, frame, sender=None):
        for cb in self.callbacks:
            cb(frame)
        return frame
