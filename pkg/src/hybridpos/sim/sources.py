"""Synthetic sources of the tracking demonstrator and the video pipeline nodes."""
from __future__ import annotations

import math

import numpy as np

from .. import units as u
from ..geometry.homography import apply_homography, homography_from_points, invert_homography
from ..geometry.positions import Absolute2DPosition
from ..geometry.space import ReferenceSpace
from ..geometry.vectors import LinearVelocity, Quaternion
from ..graph.node import ProcessingNode, SourceNode
from ..model.frames import DataFrame, DetectionFrame, IMUDataFrame, create_frame
from ..model.objects import CameraObject, DataObject
from .config import ScenarioConfig
from .trajectory import GroundTruth

TRACKED_UID = "sphero"
CAMERA_UID = "sphero_video"


def video_homography(cfg: ScenarioConfig) -> np.ndarray:
    """Maps raw camera pixels onto the rectified ``camera_width x camera_height`` image."""
    w, h = cfg.camera_width, cfg.camera_height
    return homography_from_points(cfg.camera_corners, [(0, 0), (w, 0), (w, h), (0, h)])


def video_space(global_space: ReferenceSpace, cfg: ScenarioConfig) -> ReferenceSpace:
    """Rectified image space: 4 px per cm, rotated 180 degrees about the area."""
    return (ReferenceSpace(global_space, uid="video_space", unit=u.CENTIMETER)
            .set_translation(cfg.camera_width, cfg.camera_height, 0)
            .set_rotation(Quaternion.from_euler(180, 180, 0, order="ZXY", unit=u.DEGREE))
            .set_scale(cfg.camera_width / cfg.area_width, cfg.camera_height / cfg.area_height, 1))


def internal_space(global_space: ReferenceSpace, cfg: ScenarioConfig) -> ReferenceSpace:
    """Frame in which the robot reports its own (drifting) position."""
    return (ReferenceSpace(global_space, uid="sphero_space", unit=u.CENTIMETER)
            .set_translation(*cfg.internal_offset, 0)
            .set_rotation(Quaternion.from_euler(0, 0, cfg.internal_rotation, unit=u.DEGREE)))


def in_blind_spot(cfg: ScenarioConfig, x: float, y: float) -> bool:
    return any(bx <= x <= bx + bw and by <= y <= by + bh for bx, by, bw, bh in cfg.blind_spots)


def tracked(t: int, position=None) -> DataObject:
    obj = DataObject(TRACKED_UID, created_timestamp=t)
    obj.position = position
    return obj


def heading_quaternion(degrees: float) -> Quaternion:
    return Quaternion.from_euler(0, 0, degrees, unit=u.DEGREE)


class TimedSourceNode(SourceNode):
    """Source producing a frame every ``period_us`` on the model clock.

    Ticks run from ``start + offset`` while the ground truth is moving.
    Subclasses implement :meth:`make_frame`; returning ``None`` skips a tick.
    """

    def __init__(self, truth: GroundTruth, cfg: ScenarioConfig, rate_hz: float, rng: np.random.Generator,
                 offset_us: int = 0, name=None, **kw):
        super().__init__(name=name, **kw)
        self.truth = truth
        self.cfg = cfg
        self.rate_hz = rate_hz
        self.rng = rng
        self.offset_us = offset_us
        self._tick = 0
        self._timer = None
        self.produced = 0

    def tick_time(self, k: int) -> int:
        return self.truth.start + self.offset_us + int(round(k * 1e6 / self.rate_hz))

    def on_start(self):
        self._schedule()

    def on_stop(self):
        if self._timer is not None:
            self._timer.cancel()

    def _schedule(self):
        when = self.tick_time(self._tick)
        if when > self.truth.end:
            return
        self._timer = self.model.scheduler.call_at(when, self._fire)

    def _fire(self):
        t = self.model.now()
        self._tick += 1
        frame = self.make_frame(t)
        if frame is not None:
            self.produced += 1
            self.push(frame)
        self._schedule()

    def make_frame(self, t: int) -> DataFrame | None:
        raise NotImplementedError


class VideoSourceNode(TimedSourceNode):
    """Blob detections of the robot as seen by the (un-rectified) camera."""

    def __init__(self, truth, cfg, rng, space: ReferenceSpace, **kw):
        super().__init__(truth, cfg, cfg.video_fps, rng, **kw)
        self.space = space
        self.camera = CameraObject(CAMERA_UID, created_timestamp=truth.start)
        self.inverse = invert_homography(video_homography(cfg))

    def make_frame(self, t):
        x, y = self.truth.position(t)
        noise = self.rng.normal(0.0, 1.0, 3)  # drawn every tick so blind spots do not shift the stream
        if in_blind_spot(self.cfg, x, y):
            return None
        rect = self.space.transform_from_global(
            Absolute2DPosition(x, y, unit=u.CENTIMETER, reference_space_uid=None))
        px, py = apply_homography(self.inverse, (rect.x, rect.y))
        sigma = self.cfg.video_noise_px
        area = max(1.0, self.cfg.blob_area + self.cfg.blob_area_noise * noise[2])
        frame = create_frame(self.camera.copy(), t, DetectionFrame,
                             centroid=(px + sigma * noise[0], py + sigma * noise[1]), area=area)
        frame.add_object(tracked(t))
        return frame


class PerspectiveNode(ProcessingNode):
    """Rectifies detection centroids with a homography."""

    def __init__(self, homography, name=None, **kw):
        super().__init__(name=name, **kw)
        self.homography = np.asarray(homography, dtype=float)

    def process(self, frame, sender=None):
        if getattr(frame, "centroid", None) is not None:
            frame.centroid = apply_homography(self.homography, frame.centroid)
        return frame


class BlobNode(ProcessingNode):
    """Turns a rectified centroid into the tracked object's position.

    The position is in rectified image coordinates (tagged with ``space``);
    its accuracy is the square root of the blob area.
    """

    def __init__(self, space: ReferenceSpace, object_uid: str = TRACKED_UID, name=None, **kw):
        super().__init__(name=name, **kw)
        self.space = space
        self.object_uid = object_uid

    def process(self, frame, sender=None):
        centroid = getattr(frame, "centroid", None)
        obj = frame.get_object(self.object_uid)
        if centroid is None or obj is None:
            return None
        obj.position = Absolute2DPosition(
            centroid[0], centroid[1], timestamp=frame.created_timestamp,
            accuracy=math.sqrt(frame.area), accuracy_unit=self.space.unit, unit=self.space.unit,
            reference_space_uid=self.space.uid)
        return frame


class InputSourceNode(TimedSourceNode):
    """Position obtained by integrating the command program.

    ``input_speed_scale`` models the mismatch between commanded and actual
    speed; with a scale of one it reproduces the ground truth. Open-loop
    integration gets less certain with distance, so the reported accuracy
    grows by ``input_accuracy_growth`` per cm travelled.
    """

    def __init__(self, truth, cfg, rng, **kw):
        super().__init__(truth, cfg, cfg.input_rate, rng, offset_us=int(cfg.input_offset * 1000), **kw)

    def make_frame(self, t):
        x0, y0 = self.truth.points[0]
        x, y = self.truth.position(t)
        k = self.cfg.input_speed_scale
        travelled = self.truth.speed * 100 * (min(t, self.truth.end) - self.truth.start) / 1e6
        acc = self.cfg.input_accuracy + self.cfg.input_accuracy_growth * travelled
        p = Absolute2DPosition(x0 + k * (x - x0), y0 + k * (y - y0), timestamp=t,
                               accuracy=acc, accuracy_unit=u.CENTIMETER,
                               unit=u.CENTIMETER, orientation=heading_quaternion(self.truth.heading(t)))
        return create_frame(tracked(t, p), t)


class IMUSourceNode(TimedSourceNode):
    """Measured body speed and heading; the position comes from the store."""

    def __init__(self, truth, cfg, rng, **kw):
        super().__init__(truth, cfg, cfg.imu_rate, rng, **kw)

    def make_frame(self, t):
        noise = self.rng.normal(0.0, 1.0, 2)
        speed = self.truth.speed_at(t) + self.cfg.velocity_noise * noise[0]
        heading = self.truth.heading(t) + self.cfg.heading_noise * noise[1]
        return create_frame(tracked(t), t, IMUDataFrame,
                            linear_velocity=LinearVelocity(speed, 0.0, 0.0),
                            orientation=heading_quaternion(heading), frequency=self.rate_hz)


class IMUPositionNode(ProcessingNode):
    """Attaches the IMU frame's velocity and orientation to the object's last position."""

    def __init__(self, accuracy: float, object_uid: str = TRACKED_UID, name=None, **kw):
        super().__init__(name=name, **kw)
        self.accuracy = accuracy
        self.object_uid = object_uid

    def process(self, frame, sender=None):
        obj = frame.get_object(self.object_uid)
        if obj is None or obj.position is None:
            return None
        obj.position = obj.position.replace(
            orientation=frame.orientation, linear_velocity=frame.linear_velocity,
            accuracy=self.accuracy, accuracy_unit=u.CENTIMETER)
        return frame


class InternalPositionSourceNode(TimedSourceNode):
    """Robot-reported position in its own frame, with a random-walk drift."""

    def __init__(self, truth, cfg, rng, space: ReferenceSpace, **kw):
        super().__init__(truth, cfg, cfg.imu_rate, rng, **kw)
        self.space = space
        self._drift = np.zeros(2)

    def make_frame(self, t):
        step = self.cfg.internal_drift * math.sqrt(1.0 / self.rate_hz)
        self._drift = self._drift + step * self.rng.normal(0.0, 1.0, 2)
        x, y = self.truth.position(t)
        local = self.space.transform_from_global(Absolute2DPosition(x, y, unit=u.CENTIMETER))
        p = Absolute2DPosition(local.x + self._drift[0], local.y + self._drift[1], timestamp=t,
                               accuracy=self.cfg.internal_accuracy, accuracy_unit=u.CENTIMETER,
                               unit=u.CENTIMETER, reference_space_uid=self.space.uid)
        return create_frame(tracked(t, p), t)
