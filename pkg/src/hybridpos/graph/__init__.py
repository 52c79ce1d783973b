"""Push/pull dataflow graph engine."""
from .builder import GraphBuilder, Model, ModelBuilder
from .node import (
    CallbackSinkNode, CompletedEvent, DropOldest, FunctionNode, GraphBuildError, GraphError,
    GraphFrozenError, InputNode, LatestOnly, MemorySinkNode, Node, NodeError, OutputNode,
    PlaceholderNode, ProcessingNode, SinkNode, SourceNode, Unbounded, gather, resolved,
)
from .scheduler import RealtimeScheduler, Scheduler, VirtualScheduler
from .shapes import (
    CloneNode, ConvertFromSpaceNode, ConvertToSpaceNode, DebounceNode, FilterNode, MergeNode,
    TimedPullNode,
)
from .sinks import CSVSinkNode

__all__ = [name for name in dir() if not name.startswith("_")]
