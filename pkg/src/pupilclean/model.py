"""Domain model: samples, recordings and per-channel missingness.

Missing values are an explicit state (a boolean presence mask next to the
value array), never a sentinel magnitude. NaN only appears in the on-disk
compressed format, see codec.py.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterator, Optional, Sequence

import numpy as np


class Channel(Enum):
    PUPIL_LEFT = "pupil_left"
    PUPIL_RIGHT = "pupil_right"
    GAZE_LEFT = "gaze_left"
    GAZE_RIGHT = "gaze_right"


PUPIL_CHANNELS = (Channel.PUPIL_LEFT, Channel.PUPIL_RIGHT)
GAZE_CHANNELS = (Channel.GAZE_LEFT, Channel.GAZE_RIGHT)


class ModelError(ValueError):
    """Invalid domain object (bad timestamps, non-finite values, ...)."""


@dataclass(frozen=True)
class GazePoint:
    """Screen coordinates in px; either coordinate may be absent."""

    x: Optional[float] = None
    y: Optional[float] = None

    @property
    def missing(self) -> bool:
        # A gaze point is missing when either coordinate is missing.
        return self.x is None or self.y is None


@dataclass(frozen=True)
class Sample:
    """One eye-tracker measurement at a point in time (ms since start)."""

    timestamp_ms: float
    pupil_left: Optional[float] = None
    pupil_right: Optional[float] = None
    gaze_left: Optional[GazePoint] = None
    gaze_right: Optional[GazePoint] = None


def is_missing(sample: Sample, channel: Channel) -> bool:
    """True iff the channel carries no usable value in this sample."""
    if channel is Channel.PUPIL_LEFT:
        return sample.pupil_left is None
    if channel is Channel.PUPIL_RIGHT:
        return sample.pupil_right is None
    if channel is Channel.GAZE_LEFT:
        return sample.gaze_left is None or sample.gaze_left.missing
    return sample.gaze_right is None or sample.gaze_right.missing


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Series:
    """A value array paired with a presence mask. Values at non-present
    positions are unspecified and must never be read."""

    values: np.ndarray
    present: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(np.asarray(self.values, dtype=np.float64)))
        object.__setattr__(self, "present", _readonly(np.asarray(self.present, dtype=bool)))
        if self.values.shape != self.present.shape or self.values.ndim != 1:
            raise ModelError("series values/present shape mismatch")
        if not np.all(np.isfinite(self.values[self.present])):
            raise ModelError("present series value is non-finite")

    def __len__(self) -> int:
        return len(self.values)

    def value_at(self, i: int) -> Optional[float]:
        return float(self.values[i]) if self.present[i] else None

    @staticmethod
    def from_optional(values: Sequence[Optional[float]]) -> "Series":
        present = np.array([v is not None for v in values], dtype=bool)
        vals = np.array([0.0 if v is None else float(v) for v in values])
        return Series(vals, present)


@dataclass(frozen=True)
class GazeSeries:
    """Per-eye gaze track; x and y carry independent presence."""

    x: Series
    y: Series

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ModelError("gaze x/y length mismatch")

    def __len__(self) -> int:
        return len(self.x)

    @property
    def pair_present(self) -> np.ndarray:
        return self.x.present & self.y.present

    def point_at(self, i: int) -> Optional[GazePoint]:
        if not (self.x.present[i] or self.y.present[i]):
            return None
        return GazePoint(self.x.value_at(i), self.y.value_at(i))


def _pupil_series(values: Sequence[Optional[float]]) -> Series:
    s = Series.from_optional(values)
    if np.any(s.values[s.present] <= 0):
        raise ModelError("present pupil diameter must be > 0 mm")
    return s


@dataclass(frozen=True)
class Recording:
    """Ordered sample series plus sampling-rate metadata.

    Immutable after construction; safe to share across workers.
    """

    timestamps_ms: np.ndarray
    sample_rate_hz: float
    pupil_left: Optional[Series] = None
    pupil_right: Optional[Series] = None
    gaze_left: Optional[GazeSeries] = None
    gaze_right: Optional[GazeSeries] = None

    def __post_init__(self):
        ts = _readonly(np.asarray(self.timestamps_ms, dtype=np.float64))
        object.__setattr__(self, "timestamps_ms", ts)
        if ts.ndim != 1:
            raise ModelError("timestamps must be one-dimensional")
        if ts.size == 0:
            raise ModelError("recording has no samples")
        if self.sample_rate_hz <= 0 or not np.isfinite(self.sample_rate_hz):
            raise ModelError("sample rate must be a positive real")
        if not np.all(np.isfinite(ts)) or np.any(ts < 0):
            raise ModelError("timestamps must be finite and non-negative")
        bad = np.nonzero(np.diff(ts) <= 0)[0]
        if bad.size:
            raise ModelError(f"non-increasing timestamp at index {int(bad[0]) + 1}")
        for name in ("pupil_left", "pupil_right"):
            s = getattr(self, name)
            if s is not None:
                if len(s) != len(ts):
                    raise ModelError(f"{name} length mismatch")
                if np.any(s.values[s.present] <= 0):
                    raise ModelError("present pupil diameter must be > 0 mm")
        for name in ("gaze_left", "gaze_right"):
            g = getattr(self, name)
            if g is not None and len(g) != len(ts):
                raise ModelError(f"{name} length mismatch")

    def __len__(self) -> int:
        return len(self.timestamps_ms)

    @property
    def channels_present(self) -> frozenset[Channel]:
        out = set()
        if self.pupil_left is not None:
            out.add(Channel.PUPIL_LEFT)
        if self.pupil_right is not None:
            out.add(Channel.PUPIL_RIGHT)
        if self.gaze_left is not None:
            out.add(Channel.GAZE_LEFT)
        if self.gaze_right is not None:
            out.add(Channel.GAZE_RIGHT)
        return frozenset(out)

    def sample(self, i: int) -> Sample:
        return Sample(
            timestamp_ms=float(self.timestamps_ms[i]),
            pupil_left=self.pupil_left.value_at(i) if self.pupil_left is not None else None,
            pupil_right=self.pupil_right.value_at(i) if self.pupil_right is not None else None,
            gaze_left=self.gaze_left.point_at(i) if self.gaze_left is not None else None,
            gaze_right=self.gaze_right.point_at(i) if self.gaze_right is not None else None,
        )

    def samples(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self.sample(i)

    def with_series(self, **kwargs) -> "Recording":
        """Copy of this recording with some channel series swapped out."""
        return replace(self, **kwargs)


def validate_recording(samples: Sequence[Sample], sample_rate_hz: float) -> Recording:
    """Build a Recording from row-wise samples, checking all invariants.

    Channels are considered carried when any sample has a value for them.
    """
    if not samples:
        raise ModelError("recording has no samples")
    ts = [s.timestamp_ms for s in samples]

    def opt(vals):
        return None if all(v is None for v in vals) else _pupil_series(vals)

    pl = opt([s.pupil_left for s in samples])
    pr = opt([s.pupil_right for s in samples])

    def gaze(points: Sequence[Optional[GazePoint]]) -> Optional[GazeSeries]:
        if all(p is None for p in points):
            return None
        xs = [None if p is None else p.x for p in points]
        ys = [None if p is None else p.y for p in points]
        return GazeSeries(Series.from_optional(xs), Series.from_optional(ys))

    gl = gaze([s.gaze_left for s in samples])
    gr = gaze([s.gaze_right for s in samples])
    return Recording(
        timestamps_ms=np.array(ts, dtype=np.float64),
        sample_rate_hz=float(sample_rate_hz),
        pupil_left=pl,
        pupil_right=pr,
        gaze_left=gl,
        gaze_right=gr,
    )
