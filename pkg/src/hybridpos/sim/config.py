"""Scenario configuration for the tracking demonstrator simulation."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

SOURCES = ("video", "sphero_position", "input", "sphero_velocity")

# Blind spot covering the camera's left third. The camera looks at the
# area rotated by 180 degrees, so image-left is the high-x end of the area.
LEFT_BLIND_SPOT = (260.0 * 2 / 3, 0.0, 260.0 / 3, 200.0)


@dataclass
class ScenarioConfig:
    """All knobs of a simulated run. Lengths in cm, durations in ms.

    ``blind_spots`` are ``(x, y, width, height)`` rectangles in the global
    (area) frame where the camera detects nothing.
    """

    area_width: float = 260.0
    area_height: float = 200.0
    camera_width: int = 1040
    camera_height: int = 800
    camera_corners: tuple = ((307.0, 120.0), (1473.0, 87.0), (1899.0, 891.0), (20.0, 1024.0))
    video_fps: float = 30.0
    merge_timeout: float = 20.0
    min_count: int = 2
    debounce: float = 10.0
    speed_setting: int = 150
    max_speed: float = 1.0  # m/s at setting 255
    leg_x: float = 4200.0
    leg_y: float = 3200.0
    dec_x: float = 168.0
    dec_y: float = 128.0
    start_time: int = 0  # virtual clock origin, microseconds
    imu_rate: float = 20.0  # Hz, also used by the internal position source
    input_rate: float = 20.0
    input_offset: float = 25.0  # ms after the IMU samples
    blind_spots: list = field(default_factory=list)
    disabled_sources: list = field(default_factory=list)
    seed: int = 42
    # noise
    video_noise_px: float = 2.0
    blob_area: float = 100.0
    blob_area_noise: float = 10.0
    velocity_noise: float = 0.02  # m/s
    heading_noise: float = 2.0  # degrees
    internal_drift: float = 0.5  # cm per sqrt(s), random walk per axis
    input_speed_scale: float = 1.05
    # accuracies (cm) assigned by the non-visual sources
    input_accuracy: float = 10.0
    input_accuracy_growth: float = 0.1  # cm of input accuracy lost per cm travelled
    velocity_accuracy: float = 5.0
    internal_accuracy: float = 5.0
    video_sma_window: int = 5
    # internal (robot) frame relative to the area
    internal_rotation: float = 90.0  # degrees about z
    internal_offset: tuple = (30.0, -20.0)
    # evaluation
    key_point_interval: float = 51.0
    key_point_count: int = 100

    @classmethod
    def noiseless(cls, **overrides) -> "ScenarioConfig":
        values = dict(video_noise_px=0.0, blob_area_noise=0.0, velocity_noise=0.0, heading_noise=0.0,
                      internal_drift=0.0, input_speed_scale=1.0)
        values.update(overrides)
        return cls(**values)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @property
    def speed(self) -> float:
        """Robot speed in m/s; the setting is truncated to whole cm/s."""
        return int(self.speed_setting / 255 * self.max_speed * 100) / 100

    def enabled(self, source: str) -> bool:
        return source not in self.disabled_sources


_TUPLE_FIELDS = {"camera_corners", "internal_offset"}


def _parse_value(name: str, text: str, current):
    text = text.strip()
    if name == "blind_spots":
        return [tuple(float(v) for v in part.split(",")) for part in text.split(";") if part.strip()]
    if name == "disabled_sources":
        return [s.strip() for s in text.split(",") if s.strip()]
    if name == "camera_corners":
        pts = [tuple(float(v) for v in part.split(",")) for part in text.split(";")]
        return tuple(pts)
    if name in _TUPLE_FIELDS:
        return tuple(float(v) for v in text.split(","))
    if isinstance(current, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float):
        return float(text)
    return text


def load_config(path: str | Path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Read ``key = value`` lines (``#`` starts a comment) over ``base``.

    Lists use ``;`` between items and ``,`` inside an item, e.g.
    ``blind_spots = 173.3,0,86.7,200``.
    """
    cfg = base or ScenarioConfig()
    known = {f.name for f in dataclasses.fields(cfg)}
    changes = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ValueError(f"{path}:{lineno}: unknown setting {key!r}")
        changes[key] = _parse_value(key, value, getattr(cfg, key))
    return cfg.replace(**changes)


def dump_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "blind_spots":
            v = ";".join(",".join(str(c) for c in r) for r in v)
        elif f.name == "disabled_sources":
            v = ",".join(v)
        elif f.name == "camera_corners":
            v = ";".join(",".join(str(c) for c in p) for p in v)
        elif f.name in _TUPLE_FIELDS:
            v = ",".join(str(c) for c in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
