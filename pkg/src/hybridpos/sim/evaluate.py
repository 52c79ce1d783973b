"""Trajectory comparison at evenly spaced key points."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .config import ScenarioConfig


class InsufficientSpanError(ValueError):
    """A trajectory does not cover all key points."""


def read_csv(path) -> np.ndarray:
    """Rows ``(timestamp, x, y)`` sorted by time; for equal timestamps the last row wins."""
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [(int(r["timestamp"]), float(r["x"]), float(r["y"])) for r in reader]
    return _clean(np.array(rows, dtype=float).reshape(-1, 3))


def _clean(traj: np.ndarray) -> np.ndarray:
    traj = np.asarray(traj, dtype=float).reshape(-1, 3)
    order = np.argsort(traj[:, 0], kind="stable")
    traj = traj[order]
    if len(traj) == 0:
        return traj
    keep = np.append(traj[1:, 0] != traj[:-1, 0], True)
    return traj[keep]


def key_times(a: np.ndarray, b: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        raise InsufficientSpanError("empty trajectory")
    t0 = max(a[0, 0], b[0, 0])
    step = cfg.key_point_interval * 1000
    times = t0 + step * np.arange(cfg.key_point_count)
    end = min(a[-1, 0], b[-1, 0])
    if times[-1] > end:
        raise InsufficientSpanError(
            f"trajectories overlap for {(end - t0) / 1e3:.0f} ms, "
            f"{(times[-1] - t0) / 1e3:.0f} ms needed")
    return times


def sample(traj: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Linear interpolation of ``traj`` at ``times``; rows ``(x, y)``."""
    return np.column_stack([np.interp(times, traj[:, 0], traj[:, 1]),
                            np.interp(times, traj[:, 0], traj[:, 2])])


def evaluate(a, b, cfg: ScenarioConfig | None = None) -> tuple[float, float]:
    """Mean and maximum planar distance (cm) between two trajectories.

    ``a`` and ``b`` are CSV paths or ``(timestamp, x, y)`` arrays. Both are
    sampled at ``key_point_count`` instants ``key_point_interval`` ms apart,
    starting when both have begun.
    """
    cfg = cfg or ScenarioConfig()
    ta = read_csv(a) if isinstance(a, (str, Path)) else _clean(a)
    tb = read_csv(b) if isinstance(b, (str, Path)) else _clean(b)
    times = key_times(ta, tb, cfg)
    d = np.hypot(*(sample(ta, times) - sample(tb, times)).T)
    return float(d.mean()), float(d.max())


def max_gap_us(traj) -> float:
    """Largest interval between consecutive rows, in microseconds."""
    t = (read_csv(traj) if isinstance(traj, (str, Path)) else _clean(traj))[:, 0]
    return float(np.diff(t).max()) if len(t) > 1 else float("inf")
