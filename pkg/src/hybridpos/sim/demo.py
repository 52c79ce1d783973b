"""The demonstrator fusion model and a deterministic simulated run."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import units as u
from ..algorithms.nodes import DisplacementNode, SMAFilterNode, VelocityProcessingNode
from ..geometry.positions import Absolute2DPosition
from ..geometry.space import ReferenceSpace
from ..graph.builder import Model, ModelBuilder
from ..graph.scheduler import VirtualScheduler
from ..graph.sinks import CSVSinkNode
from ..model.uid import seeded_uids
from ..services import DataObjectService
from .config import SOURCES, ScenarioConfig
from .sources import (
    TRACKED_UID, BlobNode, IMUPositionNode, IMUSourceNode, InputSourceNode, InternalPositionSourceNode,
    PerspectiveNode, VideoSourceNode, heading_quaternion, internal_space, tracked, video_homography,
    video_space,
)
from .trajectory import GroundTruth

CSV_COLUMNS = ("timestamp", "x", "y")


def merge_key(frame):
    """Frames about the tracked robot share one group whatever their source."""
    return TRACKED_UID if frame.get_object(TRACKED_UID) is not None else frame.uid


def is_tracked(obj) -> bool:
    return obj.uid == TRACKED_UID


def csv_row(frame):
    obj = frame.get_object(TRACKED_UID)
    if obj is None or obj.position is None:
        return None
    p = obj.position.to_vector3(u.CENTIMETER)
    return {"timestamp": int(obj.position.timestamp), "x": float(p.x), "y": float(p.y)}


@dataclass
class DemoRun:
    """Result of :func:`run_demo`: the model after the run and what it produced."""

    model: Model
    truth: GroundTruth
    sink: CSVSinkNode
    sources: dict

    @property
    def rows(self) -> int:
        return self.sink.rows


def _rngs(seed: int) -> dict[str, np.random.Generator]:
    # one independent stream per source, fixed order, so disabling a source
    # does not change the noise drawn by the others
    children = np.random.SeedSequence(seed).spawn(len(SOURCES))
    return {name: np.random.default_rng(s) for name, s in zip(SOURCES, children)}


def build_demo_model(cfg: ScenarioConfig, out_csv, only: str | None = None,
                     scheduler: VirtualScheduler | None = None) -> tuple[Model, dict, GroundTruth, CSVSinkNode]:
    """Assemble the fusion model.

    Every enabled source feeds one merge node keyed on the tracked robot.
    The merged frame goes to a CSV sink and, debounced and re-stamped, is
    dead reckoned back into the merge as a fifth input. With ``only`` set,
    that single source's shape is wired straight to the sink instead.
    """
    truth = GroundTruth(cfg)
    scheduler = scheduler or VirtualScheduler(truth.start)
    world = ReferenceSpace(uid="global", unit=u.CENTIMETER, display_name="area")
    vspace = video_space(world, cfg)
    ispace = internal_space(world, cfg)
    rngs = _rngs(cfg.seed)

    store = DataObjectService()
    start = tracked(truth.start, Absolute2DPosition(
        *truth.points[0], timestamp=truth.start, accuracy=1.0, accuracy_unit=u.CENTIMETER,
        unit=u.CENTIMETER, orientation=heading_quaternion(truth.headings[0]),
        reference_space_uid=world.uid))
    store.insert(start)

    sink = CSVSinkNode(out_csv, CSV_COLUMNS, csv_row, name="position.csv")
    b = ModelBuilder().with_reference_space(world).with_scheduler(scheduler).add_service(store)
    sources = {}

    def shape(name):
        if name == "video":
            src = VideoSourceNode(truth, cfg, rngs[name], vspace, name="video_source")
            b.from_(src).via(PerspectiveNode(video_homography(cfg)), BlobNode(vspace))
            b.via(SMAFilterNode(cfg.video_sma_window, "accuracy", is_tracked))
            b.convert_from_space(vspace)
        elif name == "sphero_position":
            src = InternalPositionSourceNode(truth, cfg, rngs[name], ispace, name="internal_source")
            b.from_(src).via(DisplacementNode(ispace, is_tracked))
        elif name == "input":
            src = InputSourceNode(truth, cfg, rngs[name], name="input_source")
            b.from_(src)
        else:
            src = IMUSourceNode(truth, cfg, rngs[name], name="imu_source")
            b.from_(src).via(IMUPositionNode(cfg.velocity_accuracy), VelocityProcessingNode(is_tracked))
        sources[name] = src

    if only is not None:
        if only not in SOURCES:
            raise ValueError(f"unknown source {only!r}; expected one of {', '.join(SOURCES)}")
        shape(only)
        b.to(sink)
    else:
        merge_inlets = []
        for name in SOURCES:
            if cfg.enabled(name):
                shape(name)
                b.to(name)
                merge_inlets.append(name)
        b.from_(*merge_inlets, "feedback").merge(
            merge_key, timeout=cfg.merge_timeout, min_count=cfg.min_count,
            object_filter=is_tracked).via("merged")
        b.to(sink)
        (b.from_("merged").debounce(cfg.debounce).clone(repack=True)
         .via(VelocityProcessingNode(is_tracked)).to("feedback"))
    return b.build(), sources, truth, sink


def run_demo(cfg: ScenarioConfig, out_csv, only: str | None = None) -> DemoRun:
    """Run the whole scenario on a virtual clock and write ``timestamp,x,y`` rows."""
    with seeded_uids(cfg.seed):
        model, sources, truth, sink = build_demo_model(cfg, out_csv, only)
        model.start()
        model.scheduler.run()
        model.stop()
    return DemoRun(model, truth, sink, sources)


def write_ground_truth(truth: GroundTruth, path) -> None:
    """Vertices of the true trajectory as ``timestamp,x,y`` (exact under linear interpolation)."""
    with open(Path(path), "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for t, x, y in truth.vertices():
            fh.write(f"{int(t)},{float(x)!r},{float(y)!r}\n")
