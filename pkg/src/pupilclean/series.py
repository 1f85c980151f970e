"""Envelope downsampling and pupil-size statistics over decoded recordings.

Rendering uses per-bucket min/max so the extremes a researcher must see
(spikes, dropouts) survive downsampling exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import Recording, Series

MAX_POINTS_LIMIT = 100_000

SCALAR_CHANNELS = ("pupil_left", "pupil_right", "gaze_left_x", "gaze_left_y",
                   "gaze_right_x", "gaze_right_y")


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class Bucket:
    start_ms: float
    end_ms: float
    min: Optional[float]
    max: Optional[float]
    empty: bool


@dataclass(frozen=True)
class SeriesEnvelope:
    channel: str
    from_ms: float
    to_ms: float
    total_samples: int
    buckets: list[Bucket]

    def to_dict(self) -> dict:
        return {
            "channel": self.channel,
            "from_ms": self.from_ms,
            "to_ms": self.to_ms,
            "total_samples": self.total_samples,
            "buckets": [
                {"start_ms": b.start_ms, "end_ms": b.end_ms,
                 "min": b.min, "max": b.max, "empty": b.empty}
                for b in self.buckets
            ],
        }


def _scalar_series(recording: Recording, channel: str) -> Series:
    if channel in ("pupil_left", "pupil_right"):
        s = getattr(recording, channel)
    elif channel in SCALAR_CHANNELS:
        eye = "left" if "left" in channel else "right"
        g = getattr(recording, f"gaze_{eye}")
        s = None if g is None else (g.x if channel.endswith("_x") else g.y)
    else:
        raise SeriesError(f"unknown channel {channel!r}")
    if s is None:
        raise SeriesError(f"channel {channel!r} not carried by this file")
    return s


def build_envelope(recording: Recording, channel: str,
                   from_ms: Optional[float] = None,
                   to_ms: Optional[float] = None,
                   max_points: int = 2000) -> SeriesEnvelope:
    """Partition the window into ceil(max_points/2) equal-time buckets and
    return exact per-bucket extremes over present samples."""
    if not (2 <= max_points <= MAX_POINTS_LIMIT):
        raise SeriesError(f"max_points must be in [2, {MAX_POINTS_LIMIT}]")
    s = _scalar_series(recording, channel)
    ts = recording.timestamps_ms
    lo = float(ts[0]) if from_ms is None else float(from_ms)
    hi = float(ts[-1]) if to_ms is None else float(to_ms)
    if hi <= lo:
        raise SeriesError("empty window: to_ms must be greater than from_ms")

    n_buckets = int(np.ceil(max_points / 2))
    edges = np.linspace(lo, hi, n_buckets + 1)

    in_window = (ts >= lo) & (ts <= hi) & s.present
    wt = ts[in_window]
    wv = s.values[in_window]
    # Right-open buckets; the window end folds into the last bucket.
    which = np.clip(np.searchsorted(edges, wt, side="right") - 1, 0, n_buckets - 1)

    buckets: list[Bucket] = []
    order = np.argsort(which, kind="stable")
    which_sorted = which[order]
    values_sorted = wv[order]
    bounds = np.searchsorted(which_sorted, np.arange(n_buckets + 1))
    for i in range(n_buckets):
        chunk = values_sorted[bounds[i]:bounds[i + 1]]
        if chunk.size == 0:
            buckets.append(Bucket(float(edges[i]), float(edges[i + 1]), None, None, True))
        else:
            buckets.append(Bucket(float(edges[i]), float(edges[i + 1]),
                                  float(chunk.min()), float(chunk.max()), False))
    return SeriesEnvelope(channel=channel, from_ms=lo, to_ms=hi,
                          total_samples=len(recording), buckets=buckets)


def average_pupil(recording: Recording, mode: str = "both") -> float:
    """Mean pupil size in mm over present samples.

    mode "both" averages (left + right) / 2 over samples where both eyes
    are present.
    """
    if mode not in ("both", "left", "right"):
        raise SeriesError(f"unknown mode {mode!r}")
    if mode in ("left", "right"):
        s = getattr(recording, f"pupil_{mode}")
        if s is None:
            raise SeriesError(f"pupil_{mode} not carried by this file")
        vals = s.values[s.present]
        if vals.size == 0:
            raise SeriesError(f"pupil_{mode} has no present samples")
        return float(np.mean(vals))
    left, right = recording.pupil_left, recording.pupil_right
    if left is None or right is None:
        raise SeriesError("mode 'both' requires both pupil channels")
    both = left.present & right.present
    if not both.any():
        raise SeriesError("no samples where both pupils are present")
    return float(np.mean((left.values[both] + right.values[both]) / 2.0))
