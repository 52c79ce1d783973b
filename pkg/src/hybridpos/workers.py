"""Run part of a graph on a pool of worker processes.

Frames cross the process boundary as serialized JSON text. The main
process assigns frames round-robin, with at most one frame in flight per
worker. Inside a worker, the sub-graph reaches the main model's data
services through a synchronous request/response proxy.
"""
from __future__ import annotations

import importlib
import itertools
import json
import logging
import multiprocessing as mp
import threading
import time
from collections import deque
from concurrent.futures import Future
from typing import Callable, Union

from . import kernels
from .graph.builder import GraphBuilder
from .graph.node import Node, NodeError, ProcessingNode, SinkNode, SourceNode, gather
from .graph.scheduler import RealtimeScheduler
from .model.frames import DataFrame
from .model.objects import DataObject
from .serialization import deserialize, from_json, registered_types, serialize, to_json
from .services import DataService, NodeDataService

log = logging.getLogger(__name__)

GraphDefinition = Union[str, Callable[[GraphBuilder], object]]


class WorkerCrashedError(RuntimeError):
    pass


class RemoteError(RuntimeError):
    """An exception raised inside a worker, re-raised in the main process."""


def resolve_definition(definition: GraphDefinition) -> Callable[[GraphBuilder], object]:
    """``"package.module:attr"`` or a callable taking a :class:`GraphBuilder`."""
    if callable(definition):
        return definition
    module, _, attr = definition.partition(":")
    if not attr:
        raise ValueError(f"graph definition {definition!r} must look like 'module:attr'")
    obj = importlib.import_module(module)
    for part in attr.split("."):
        obj = getattr(obj, part)
    return obj


# -- worker-side service proxies -------------------------------------------------

class _Channel:
    def __init__(self, conn):
        self.conn = conn
        self.ids = itertools.count()
        self.deferred: deque = deque()

    def request(self, service: str, method: str, *args):
        rid = next(self.ids)
        self.conn.send(("service", rid, service, method, json.dumps(args)))
        while True:
            msg = self.conn.recv()
            if msg[0] == "service_result" and msg[1] == rid:
                ok, payload = msg[2], msg[3]
                if not ok:
                    raise RemoteError(payload)
                return json.loads(payload)
            self.deferred.append(msg)


class DataServiceProxy(DataService):
    def __init__(self, channel: _Channel, name: str, data_type: type):
        super().__init__(data_type, name=name)
        self._channel = channel

    def insert(self, obj):
        data = self._channel.request(self.name, "insert", to_json(obj))
        return from_json(data)

    def find_by_uid(self, uid):
        data = self._channel.request(self.name, "find_by_uid", uid)
        return None if data is None else from_json(data)

    def find_all(self, predicate=None):
        items = [from_json(d) for d in self._channel.request(self.name, "find_all")]
        return [o for o in items if predicate is None or predicate(o)]

    def delete(self, uid):
        self._channel.request(self.name, "delete", uid)

    def count(self):
        return self._channel.request(self.name, "count")


class NodeDataServiceProxy(NodeDataService):
    def __init__(self, channel: _Channel, name: str):
        super().__init__(name=name)
        self._channel = channel

    def get(self, node_uid, object_uid, default=None):
        data = self._channel.request(self.name, "get", node_uid, object_uid)
        return default if data is None else from_json(data)

    def set(self, node_uid, object_uid, value):
        self._channel.request(self.name, "set", node_uid, object_uid, to_json(value))

    def delete(self, node_uid, object_uid):
        self._channel.request(self.name, "delete", node_uid, object_uid)


def _serve(service, method: str, args: list):
    """Execute a proxied call against a main-process service."""
    if isinstance(service, DataService):
        if method == "insert":
            return to_json(service.insert(from_json(args[0])))
        if method == "find_by_uid":
            return to_json(service.find_by_uid(args[0]))
        if method == "find_all":
            return [to_json(o) for o in service.find_all()]
        if method == "delete":
            return service.delete(args[0])
        if method == "count":
            return service.count()
    elif isinstance(service, NodeDataService):
        if method == "get":
            return to_json(service.get(args[0], args[1]))
        if method == "set":
            return service.set(args[0], args[1], from_json(args[2]))
        if method == "delete":
            return service.delete(args[0], args[1])
    raise AttributeError(f"{type(service).__name__} does not support remote {method!r}")


def _worker_main(conn, definition, service_specs) -> None:
    """Entry point of a worker process."""
    channel = _Channel(conn)
    proxies = []
    types = registered_types()
    for kind, name, type_name in service_specs:
        if kind == "data":
            proxies.append(DataServiceProxy(channel, name, types.get(type_name, DataObject)))
        elif kind == "node":
            proxies.append(NodeDataServiceProxy(channel, name))
    builder = GraphBuilder.create()
    result = resolve_definition(definition)(builder)
    if isinstance(result, GraphBuilder):
        builder = result
    model = builder.build(services=proxies, scheduler=RealtimeScheduler())
    for out in model.outputs():
        out.callbacks.append(lambda frame: conn.send(("result", serialize(frame))))
    failures: list[NodeError] = []
    for inp in model.inputs():
        inp.on("error", failures.append)
    model.start()
    conn.send(("ready",))
    try:
        while True:
            msg = channel.deferred.popleft() if channel.deferred else conn.recv()
            kind = msg[0]
            if kind == "stop":
                break
            if kind == "frame":
                uid, text = msg[1], msg[2]
                failures.clear()
                try:
                    model.push(deserialize(text)).result()
                    # a failure deeper in the sub-graph is still this node's failure
                    if failures:
                        raise failures[0].error
                    conn.send(("done", uid))
                except Exception as exc:
                    conn.send(("failed", uid, f"{type(exc).__name__}: {exc}"))
            elif kind == "pull":
                try:
                    model.pull().result()
                    conn.send(("pulled", msg[1], None))
                except Exception as exc:
                    conn.send(("pulled", msg[1], f"{type(exc).__name__}: {exc}"))
    except (EOFError, KeyboardInterrupt):
        pass
    finally:
        model.stop()
        conn.close()


class _Worker:
    def __init__(self, index: int):
        self.index = index
        self.process = None
        self.conn = None
        self.thread = None
        self.queue: deque = deque()
        self.in_flight = None  # (uid, future)
        self.pulls: dict[int, Future] = {}
        self.alive = False
        self.send_lock = threading.Lock()


class WorkerNode(ProcessingNode):
    """Processing node whose work is done by a sub-graph in worker processes.

    Parameters
    ----------
    definition
        ``"module:attr"`` naming a function that fills a :class:`GraphBuilder`
        (open ``from_()`` / ``to()`` ends), or such a function itself; it must
        be importable by name in a spawned process.
    pool_size
        Number of worker processes.
    """

    can_originate = True

    def __init__(self, definition: GraphDefinition, pool_size: int = 1, name=None,
                 start_method: str = "spawn", **kw):
        super().__init__(name=name, **kw)
        if pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        self.definition = definition
        self.pool_size = pool_size
        self.start_method = start_method
        self._workers: list[_Worker] = []
        self._rr = itertools.count()
        self._pull_ids = itertools.count()
        self._lock = threading.Lock()
        self._started = False

    # -- lifecycle --

    def _service_specs(self):
        specs = []
        if self.model is None:
            return specs
        for s in self.model.services:
            if isinstance(s, DataService):
                specs.append(("data", s.name, s.data_type.__name__))
            elif isinstance(s, NodeDataService):
                specs.append(("node", s.name, None))
        return specs

    def on_start(self):
        with self._lock:
            if self._started:
                return
            self._started = True
        ctx = mp.get_context(self.start_method)
        specs = self._service_specs()
        for i in range(self.pool_size):
            w = _Worker(i)
            parent, child = ctx.Pipe()
            w.process = ctx.Process(target=_worker_main, args=(child, self.definition, specs), daemon=True)
            w.process.start()
            child.close()
            w.conn = parent
            msg = parent.recv()
            if msg[0] != "ready":
                raise WorkerCrashedError(f"worker {i} failed to start: {msg!r}")
            w.alive = True
            w.thread = threading.Thread(target=self._receive, args=(w,), daemon=True,
                                        name=f"worker-{i}-receiver")
            w.thread.start()
            self._workers.append(w)

    def on_stop(self):
        for w in self._workers:
            if w.alive:
                try:
                    with w.send_lock:
                        w.conn.send(("stop",))
                except (OSError, BrokenPipeError):
                    pass
        for w in self._workers:
            w.process.join(timeout=5)
            if w.process.is_alive():
                w.process.terminate()
            w.alive = False
        self._workers = []
        self._started = False

    # -- push / pull --

    def push(self, frame: DataFrame, sender: Node | None = None) -> Future:
        if not self._started:
            self.on_start()
        fut = Future()
        try:
            text = serialize(frame)
        except Exception as exc:
            fut.set_exception(exc)
            return fut
        w = self._workers[next(self._rr) % len(self._workers)]
        with self._lock:
            if not w.alive:
                fut.set_exception(WorkerCrashedError(f"worker {w.index} is not running"))
                return fut
            w.queue.append((frame.uid, text, fut))
            if w.in_flight is None:
                self._dispatch(w)
        return fut

    def _dispatch(self, w: _Worker) -> None:
        # caller holds self._lock
        if not w.queue:
            return
        uid, text, fut = w.queue.popleft()
        w.in_flight = (uid, fut)
        try:
            with w.send_lock:
                w.conn.send(("frame", uid, text))
        except OSError as exc:
            w.in_flight = None
            fut.set_exception(WorkerCrashedError(f"worker {w.index} is gone: {exc}"))

    def pull(self, **options) -> Future:
        if not self._started:
            self.on_start()
        upstream = [inlet.pull(**options) for inlet in self.inlets]
        w = self._workers[next(self._rr) % len(self._workers)]
        fut = Future()
        rid = next(self._pull_ids)
        with self._lock:
            w.pulls[rid] = fut
            with w.send_lock:
                w.conn.send(("pull", rid))
        return gather(upstream + [fut])

    # -- results --

    def _receive(self, w: _Worker) -> None:
        model = self.model
        services = model.services if model is not None else None
        while True:
            try:
                msg = w.conn.recv()
            except (EOFError, OSError):
                self._crashed(w)
                return
            kind = msg[0]
            if kind == "result":
                frame = deserialize(msg[1])
                self.send(frame)
            elif kind in ("done", "failed"):
                with self._lock:
                    uid, fut = w.in_flight
                    w.in_flight = None
                    self._dispatch(w)
                if kind == "done":
                    fut.set_result(None)
                else:
                    exc = RemoteError(msg[2])
                    fut.set_exception(exc)
            elif kind == "pulled":
                fut = w.pulls.pop(msg[1], None)
                if fut is not None:
                    fut.set_exception(RemoteError(msg[2])) if msg[2] else fut.set_result(None)
            elif kind == "service":
                _, rid, name, method, args = msg
                try:
                    service = services.find_service(name) if services is not None else None
                    if service is None:
                        raise LookupError(f"no service named {name!r}")
                    reply = ("service_result", rid, True, json.dumps(_serve(service, method, json.loads(args))))
                except Exception as exc:
                    reply = ("service_result", rid, False, f"{type(exc).__name__}: {exc}")
                with w.send_lock:
                    w.conn.send(reply)

    def _crashed(self, w: _Worker) -> None:
        if not w.alive:
            return
        w.alive = False
        with self._lock:
            pending = []
            if w.in_flight is not None:
                pending.append(w.in_flight)
                w.in_flight = None
            pending.extend((uid, fut) for uid, _, fut in w.queue)
            w.queue.clear()
        for uid, fut in pending:
            exc = WorkerCrashedError(f"worker {w.index} exited while processing frame {uid}")
            fut.set_exception(exc)
            self.raise_error(NodeError(uid, self.uid, exc))
        for fut in w.pulls.values():
            fut.set_exception(WorkerCrashedError(f"worker {w.index} exited"))
        w.pulls.clear()


# -- benchmark -----------------------------------------------------------------

PRIME_COUNT = 5000


class PrimeNode(ProcessingNode):
    """CPU-bound stand-in: computes the first ``count`` primes per frame."""

    def __init__(self, count: int = PRIME_COUNT, name=None, **kw):
        super().__init__(name=name, **kw)
        self.count = count

    def process(self, frame, sender=None):
        kernels.first_primes(self.count)
        return frame


def prime_subgraph(builder: GraphBuilder) -> None:
    builder.from_().via(PrimeNode()).to()


class _CountingSink(SinkNode):
    def __init__(self):
        super().__init__(persist=False)
        self.count = 0
        self.cond = threading.Condition()

    def on_push(self, frame):
        with self.cond:
            self.count += 1
            self.cond.notify_all()


def benchmark_frame() -> DataFrame:
    """Frame with a source object carrying a position and velocities."""
    from .geometry.positions import Absolute3DPosition
    from .geometry.vectors import AngularVelocity, LinearVelocity, Quaternion

    obj = DataObject("bench-source", display_name="bench")
    obj.position = Absolute3DPosition(
        1.5, 2.5, 0.5, timestamp=1, accuracy=0.1,
        orientation=Quaternion.from_euler(0.1, 0.2, 0.3),
        linear_velocity=LinearVelocity(0.3, 0.1, 0.0),
        angular_velocity=AngularVelocity(0.0, 0.0, 0.2),
    )
    return DataFrame(obj)


def _measure(model, source, sink, duration: float, window: int) -> float:
    model.start()
    try:
        # warm-up
        for _ in range(window):
            source.push(benchmark_frame())
        with sink.cond:
            sink.cond.wait_for(lambda: sink.count >= window, timeout=60)
        start_count = sink.count
        pushed = 0
        t0 = time.perf_counter()
        deadline = t0 + duration
        while time.perf_counter() < deadline:
            with sink.cond:
                sink.cond.wait_for(lambda: pushed + start_count - sink.count < window, timeout=1.0)
            source.push(benchmark_frame())
            pushed += 1
        elapsed = time.perf_counter() - t0
        done = sink.count - start_count
        return done / elapsed
    finally:
        model.stop()


def benchmark(pool_sizes=(1, 2, 4), duration: float = 3.0, prime_count: int = PRIME_COUNT,
              definition: GraphDefinition = "hybridpos.workers:prime_subgraph") -> list[dict]:
    """Frames per second of the prime workload, sequential and per pool size.

    Returns rows ``{"workers", "fps", "speedup"}``; the first row is the
    sequential run (``workers == 0``) and speedups are relative to it.
    """
    from .graph.builder import ModelBuilder

    source, sink = SourceNode(persistence=False), _CountingSink()
    model = ModelBuilder.create().from_(source).via(PrimeNode(prime_count)).to(sink).build()
    seq = _measure(model, source, sink, duration, window=1)
    rows = [{"workers": 0, "fps": seq, "speedup": 1.0}]
    for k in pool_sizes:
        source, sink = SourceNode(persistence=False), _CountingSink()
        worker = WorkerNode(definition, pool_size=k)
        model = ModelBuilder.create().from_(source).via(worker).to(sink).build()
        fps = _measure(model, source, sink, duration, window=2 * k)
        rows.append({"workers": k, "fps": fps, "speedup": fps / seq if seq else float("nan")})
    return rows


def write_csv(rows, fh) -> None:
    fh.write("workers,fps,speedup\n")
    for r in rows:
        label = "sequential" if r["workers"] == 0 else str(r["workers"])
        fh.write(f"{label},{r['fps']:.2f},{r['speedup']:.3f}\n")
