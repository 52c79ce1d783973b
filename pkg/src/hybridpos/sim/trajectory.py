"""Input program and the piecewise-linear ground truth it produces."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig


@dataclass(frozen=True)
class Command:
    heading: float  # degrees, counter-clockwise from +x
    speed: int  # 0-255 setting
    duration: float  # ms


def generate_input_program(cfg: ScenarioConfig) -> list[Command]:
    """Alternating X/Y legs turning 90 degrees each time, every leg pair shorter.

    X legs last ``leg_x - k * dec_x`` ms and Y legs ``leg_y - k * dec_y`` ms;
    the program ends at the first non-positive duration.
    """
    program = []
    k = 0
    while True:
        for base, dec, axis in ((cfg.leg_x, cfg.dec_x, 0), (cfg.leg_y, cfg.dec_y, 1)):
            duration = base - k * dec
            if duration <= 0:
                return program
            heading = (90.0 * len(program)) % 360.0
            program.append(Command(heading, cfg.speed_setting, duration))
        k += 1


class GroundTruth:
    """Position, heading and speed of the robot over time (cm, degrees, m/s).

    Turns and speed changes are instantaneous, so positions are linear
    between the vertices of the program.
    """

    def __init__(self, cfg: ScenarioConfig, program: list[Command] | None = None,
                 start=(0.0, 0.0)):
        self.cfg = cfg
        self.program = program if program is not None else generate_input_program(cfg)
        speed_cm_per_us = cfg.speed * 100 / 1e6
        t = int(cfg.start_time)
        x, y = map(float, start)
        self.times = [t]
        self.points = [(x, y)]
        self.headings = []
        for cmd in self.program:
            dt = int(round(cmd.duration * 1000))
            h = math.radians(cmd.heading)
            x += math.cos(h) * speed_cm_per_us * dt
            y += math.sin(h) * speed_cm_per_us * dt
            # snap away float dust from cos/sin of multiples of 90 degrees
            x, y = round(x, 9), round(y, 9)
            t += dt
            self.times.append(t)
            self.points.append((x, y))
            self.headings.append(cmd.heading)
        self.speed = cfg.speed

    @property
    def start(self) -> int:
        return self.times[0]

    @property
    def end(self) -> int:
        return self.times[-1]

    def _segment(self, t: int) -> int:
        i = bisect.bisect_right(self.times, t) - 1
        return min(max(i, 0), len(self.headings) - 1)

    def position(self, t: int) -> tuple[float, float]:
        if t <= self.times[0]:
            return self.points[0]
        if t >= self.times[-1]:
            return self.points[-1]
        i = self._segment(t)
        t0, t1 = self.times[i], self.times[i + 1]
        (x0, y0), (x1, y1) = self.points[i], self.points[i + 1]
        f = (t - t0) / (t1 - t0)
        return x0 + (x1 - x0) * f, y0 + (y1 - y0) * f

    def heading(self, t: int) -> float:
        return self.headings[self._segment(t)]

    def speed_at(self, t: int) -> float:
        return self.speed if self.times[0] <= t < self.times[-1] else 0.0

    def vertices(self) -> np.ndarray:
        """Rows ``(timestamp, x, y)``."""
        return np.array([(t, x, y) for t, (x, y) in zip(self.times, self.points)], dtype=float)
