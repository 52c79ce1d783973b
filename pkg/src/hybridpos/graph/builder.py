"""Fluent graph construction and the immutable positioning model."""
from __future__ import annotations

from concurrent.futures import Future
from typing import Callable, Iterable, Union

import networkx as nx

from .. import units as u
from ..geometry.space import ReferenceSpace
from ..services import DataObjectService, NodeDataService, Service, ServiceRegistry, TimeService
from .node import (
    GraphBuildError, GraphFrozenError, InputNode, Node, OutputNode, PlaceholderNode, SinkNode,
    SourceNode, gather,
)
from .scheduler import RealtimeScheduler, Scheduler
from .shapes import (
    CloneNode, ConvertFromSpaceNode, ConvertToSpaceNode, DebounceNode, FilterNode, MergeNode,
    TimedPullNode,
)

NodeRef = Union[Node, str]


class GraphBuilder:
    """Describes a graph shape as chains of nodes.

    ``from_(...)`` starts a chain, ``via(...)`` appends processing nodes and
    ``to(...)`` ends it with sinks. A string stands for the node with that
    name; when no node claims the name a pass-through node is created, which
    is how feedback loops are closed. ``from_()`` and ``to()`` without
    arguments leave the chain open (for sub-graphs run by worker nodes).
    """

    def __init__(self):
        self._nodes: list[Node] = []
        self._edges: list[tuple[NodeRef, NodeRef]] = []
        self._current: list[NodeRef] = []
        self._frozen = False

    @classmethod
    def create(cls):
        return cls()

    def _check(self):
        if self._frozen:
            raise GraphFrozenError("builder was already used to build a model")

    def _register(self, ref: NodeRef) -> NodeRef:
        if isinstance(ref, Node):
            if not any(n is ref for n in self._nodes):
                self._nodes.append(ref)
        elif not isinstance(ref, str):
            raise TypeError(f"expected a node or a node name, got {ref!r}")
        return ref

    def add_node(self, node: Node):
        self._check()
        self._register(node)
        return self

    def add_shape(self, shape: "GraphBuilder"):
        self._check()
        for node in shape._nodes:
            self._register(node)
        self._edges.extend(shape._edges)
        return self

    def from_(self, *refs: NodeRef):
        self._check()
        if not refs:
            refs = (InputNode(),)
        self._current = [self._register(r) for r in refs]
        return self

    def via(self, *refs: NodeRef):
        self._check()
        if not self._current:
            raise GraphBuildError("via() before from_()")
        new = [self._register(r) for r in refs]
        for a in self._current:
            for b in new:
                self._edges.append((a, b))
        self._current = new
        return self

    def to(self, *refs: NodeRef):
        if not refs:
            refs = (OutputNode(),)
        self.via(*refs)
        self._current = []
        return self

    # shape shortcuts

    def debounce(self, interval: float, unit: u.Unit = u.MILLISECOND):
        return self.via(DebounceNode(interval, unit))

    def clone(self, repack: bool = False):
        return self.via(CloneNode(repack=repack))

    def timed_pull(self, interval: float, unit: u.Unit = u.MILLISECOND):
        return self.via(TimedPullNode(interval, unit))

    def filter(self, predicate: Callable):
        return self.via(FilterNode(predicate))

    def convert_from_space(self, space: ReferenceSpace):
        return self.via(ConvertFromSpaceNode(space))

    def convert_to_space(self, space: ReferenceSpace):
        return self.via(ConvertToSpaceNode(space))

    def merge(self, key: Callable | None = None, **options):
        return self.via(MergeNode(key, **options))

    def build(self, **kw) -> "Model":
        return ModelBuilder._build_from(self, open_ends=True, **kw)


class ModelBuilder(GraphBuilder):
    """Builder of a complete :class:`Model` with services and a global space."""

    def __init__(self):
        super().__init__()
        self._services: list[Service] = []
        self._space: ReferenceSpace | None = None
        self._scheduler: Scheduler | None = None

    def add_service(self, service: Service):
        self._check()
        self._services.append(service)
        return self

    def with_reference_space(self, space: ReferenceSpace):
        self._check()
        self._space = space
        return self

    def with_scheduler(self, scheduler: Scheduler):
        self._check()
        self._scheduler = scheduler
        return self

    def build(self) -> "Model":
        return self._build_from(self, open_ends=False, services=self._services,
                                space=self._space, scheduler=self._scheduler)

    @staticmethod
    def _build_from(builder: GraphBuilder, open_ends: bool, services=(), space=None,
                    scheduler=None) -> "Model":
        builder._check()
        named: dict[str, Node] = {}
        for node in builder._nodes:
            if node.name is not None:
                if node.name in named and named[node.name] is not node:
                    raise GraphBuildError(f"two nodes are named {node.name!r}")
                named[node.name] = node
        placeholders: dict[str, PlaceholderNode] = {}
        by_name: set[int] = set()

        def resolve(ref: NodeRef) -> Node:
            if isinstance(ref, Node):
                return ref
            node = named.get(ref)
            if node is None:
                node = placeholders.get(ref)
                if node is None:
                    node = placeholders[ref] = PlaceholderNode(name=ref)
            by_name.add(id(node))
            return node

        nodes: list[Node] = list(builder._nodes)
        edges = []
        for a, b in builder._edges:
            na, nb = resolve(a), resolve(b)
            if (na, nb) not in edges:
                edges.append((na, nb))
        nodes.extend(placeholders.values())
        for node in nodes:
            node.inlets, node.outlets = [], []
        for a, b in edges:
            a.outlets.append(b)
            b.inlets.append(a)

        for node in nodes:
            if isinstance(node, SourceNode) and node.inlets:
                raise GraphBuildError(f"source {node!r} cannot have inlets")
            if isinstance(node, SinkNode) and node.outlets:
                raise GraphBuildError(f"sink {node!r} cannot have outlets")
            if isinstance(node, PlaceholderNode) and not (node.inlets and node.outlets):
                raise GraphBuildError(f"unresolved node name {node.name!r}")
            if open_ends or isinstance(node, (SourceNode, SinkNode, InputNode, OutputNode)):
                continue
            if not node.inlets and not node.outlets and node.name is not None:
                continue  # standalone named node not wired into any shape
            if (not node.inlets and not node.can_originate) or not node.outlets:
                raise GraphBuildError(f"{node!r} needs at least one inlet and one outlet")

        graph = nx.DiGraph()
        graph.add_nodes_from(id(n) for n in nodes)
        graph.add_edges_from((id(a), id(b)) for a, b in edges)
        lookup = {id(n): n for n in nodes}
        for scc in nx.strongly_connected_components(graph):
            members = [lookup[i] for i in scc]
            if len(members) == 1 and not graph.has_edge(next(iter(scc)), next(iter(scc))):
                continue
            if not any(id(m) in by_name for m in members):
                raise GraphBuildError("cycles must be closed through a named node reference")
            if not any(isinstance(m, (DebounceNode, CloneNode)) for m in members):
                raise GraphBuildError("a feedback cycle must contain a debounce or clone node")

        builder._frozen = True
        model = Model(nodes, services, space, scheduler)
        return model


class Model:
    """An immutable positioning graph with its services and global space.

    Attributes
    ----------
    reference_space
        Root space; stored positions are expressed in it.
    services
        :class:`ServiceRegistry` shared by all nodes.
    scheduler
        Clock and timers used by every node.
    """

    def __init__(self, nodes: Iterable[Node], services: Iterable[Service] = (),
                 space: ReferenceSpace | None = None, scheduler: Scheduler | None = None):
        self._nodes = tuple(nodes)
        self.scheduler = scheduler or RealtimeScheduler()
        self.reference_space = space or ReferenceSpace(unit=u.METER, display_name="global")
        self.services = ServiceRegistry(services)
        if self.services.find_data_service("DataObject") is None:
            self.services.add(DataObjectService())
        if self.services.find_service(NodeDataService) is None:
            self.services.add(NodeDataService())
        if self.services.find_service(TimeService) is None:
            self.services.add(TimeService(clock=self.scheduler.now))
        self._listeners: dict[str, list[Callable]] = {}
        self._started = False
        for service in self.services:
            service.bind(self)
        for node in self._nodes:
            node.bind(self)

    @property
    def nodes(self) -> tuple[Node, ...]:
        return self._nodes

    def add_node(self, node: Node):
        raise GraphFrozenError("a built model is immutable")

    def now(self) -> int:
        return self.scheduler.now()

    def find_node(self, name_or_uid: str) -> Node | None:
        for node in self._nodes:
            if node.name == name_or_uid or node.uid == name_or_uid:
                return node
        return None

    def find_data_service(self, selector):
        return self.services.find_data_service(selector)

    def find_service(self, selector):
        return self.services.find_service(selector)

    def sources(self) -> list[SourceNode]:
        return [n for n in self._nodes if isinstance(n, SourceNode)]

    def sinks(self) -> list[SinkNode]:
        return [n for n in self._nodes if isinstance(n, SinkNode)]

    def inputs(self) -> list[InputNode]:
        return [n for n in self._nodes if isinstance(n, InputNode)]

    def outputs(self) -> list[OutputNode]:
        return [n for n in self._nodes if isinstance(n, OutputNode)]

    # -- events --

    def on(self, event: str, listener: Callable) -> "Model":
        self._listeners.setdefault(event, []).append(listener)
        return self

    def emit(self, event: str, *args) -> None:
        for listener in list(self._listeners.get(event, ())):
            listener(*args)

    # -- lifecycle and data flow --

    def start(self) -> "Model":
        if not self._started:
            self._started = True
            self.scheduler.start()
            for node in self._nodes:
                node.on_start()
        return self

    def stop(self) -> None:
        if self._started:
            for node in self._nodes:
                node.on_stop()
            self.scheduler.stop()
            self._started = False

    def push(self, frame) -> Future:
        """Push into the open inputs, or into every source when there are none."""
        targets = self.inputs() or self.sources()
        return gather(t.push(frame if i == 0 else frame.copy()) for i, t in enumerate(targets))

    def pull(self, **options) -> Future:
        """Pull through every sink (or open output)."""
        targets = self.sinks() or self.outputs()
        return gather(t.pull(**options) for t in targets)
