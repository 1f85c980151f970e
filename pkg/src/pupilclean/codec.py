"""Compressed columnar series file.

Layout (all little-endian):
  magic "CEPW" | version u32 (=1) | channel bitmask u32 | sample count u64 |
  timestamp array | one float64 array per set bitmask bit, in bit order.
Array elements are IEEE-754 binary64; NaN encodes a missing value (on disk
only, decoded back into presence masks). Timestamps are in ms.
"""

from __future__ import annotations

import struct

import numpy as np

from .model import GazeSeries, Recording, Series

MAGIC = b"CEPW"
VERSION = 1

BIT_PUPIL_LEFT = 1 << 0
BIT_PUPIL_RIGHT = 1 << 1
BIT_GAZE_LEFT_X = 1 << 2
BIT_GAZE_LEFT_Y = 1 << 3
BIT_GAZE_RIGHT_X = 1 << 4
BIT_GAZE_RIGHT_Y = 1 << 5

_HEADER = struct.Struct("<4sIIQ")


class CodecError(ValueError):
    """Malformed compressed series stream."""


def _encode_series(s: Series) -> bytes:
    vals = s.values.copy()
    vals[~s.present] = np.nan
    return vals.astype("<f8").tobytes()


def _decode_series(raw: np.ndarray) -> Series:
    present = ~np.isnan(raw)
    vals = raw.copy()
    vals[~present] = 0.0
    return Series(vals, present)


def write_compressed(recording: Recording) -> bytes:
    mask = 0
    columns: list[bytes] = []

    def add(bit: int, s: Series) -> None:
        nonlocal mask
        mask |= bit
        columns.append(_encode_series(s))

    if recording.pupil_left is not None:
        add(BIT_PUPIL_LEFT, recording.pupil_left)
    if recording.pupil_right is not None:
        add(BIT_PUPIL_RIGHT, recording.pupil_right)
    if recording.gaze_left is not None:
        add(BIT_GAZE_LEFT_X, recording.gaze_left.x)
        add(BIT_GAZE_LEFT_Y, recording.gaze_left.y)
    if recording.gaze_right is not None:
        add(BIT_GAZE_RIGHT_X, recording.gaze_right.x)
        add(BIT_GAZE_RIGHT_Y, recording.gaze_right.y)

    n = len(recording)
    header = _HEADER.pack(MAGIC, VERSION, mask, n)
    ts = recording.timestamps_ms.astype("<f8").tobytes()
    return b"".join([header, ts] + columns)


def read_compressed(data: bytes) -> Recording:
    if len(data) < _HEADER.size:
        raise CodecError("truncated stream: header incomplete")
    magic, version, mask, n = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CodecError("not a compressed series file (bad magic)")
    if version != VERSION:
        raise CodecError(f"unsupported version {version}")
    if mask >> 6:
        raise CodecError("unknown channel bits set")

    offset = _HEADER.size
    n_arrays = 1 + bin(mask).count("1")
    expected = offset + 8 * n * n_arrays
    if len(data) < expected:
        raise CodecError(
            f"count mismatch: header declares {n} samples but stream is short"
        )
    if len(data) > expected:
        raise CodecError("trailing bytes after declared arrays")

    def take() -> np.ndarray:
        nonlocal offset
        arr = np.frombuffer(data, dtype="<f8", count=n, offset=offset).astype(np.float64)
        offset += 8 * n
        return arr

    ts = take()
    # The format carries no rate field; recover the nominal rate from the
    # median sample spacing (timestamps are in ms).
    rate = 1.0
    if n >= 2:
        md = float(np.median(np.diff(ts)))
        if md > 0:
            rate = 1000.0 / md
    series: dict[int, Series] = {}
    for bit in (BIT_PUPIL_LEFT, BIT_PUPIL_RIGHT, BIT_GAZE_LEFT_X,
                BIT_GAZE_LEFT_Y, BIT_GAZE_RIGHT_X, BIT_GAZE_RIGHT_Y):
        if mask & bit:
            series[bit] = _decode_series(take())

    if (mask & BIT_GAZE_LEFT_X) != 0 and (mask & BIT_GAZE_LEFT_Y) == 0:
        raise CodecError("gaze left x present without y")
    if (mask & BIT_GAZE_RIGHT_X) != 0 and (mask & BIT_GAZE_RIGHT_Y) == 0:
        raise CodecError("gaze right x present without y")
    if (mask & BIT_GAZE_LEFT_Y) != 0 and (mask & BIT_GAZE_LEFT_X) == 0:
        raise CodecError("gaze left y present without x")
    if (mask & BIT_GAZE_RIGHT_Y) != 0 and (mask & BIT_GAZE_RIGHT_X) == 0:
        raise CodecError("gaze right y present without x")

    try:
        return Recording(
            timestamps_ms=ts,
            sample_rate_hz=rate,
            pupil_left=series.get(BIT_PUPIL_LEFT),
            pupil_right=series.get(BIT_PUPIL_RIGHT),
            gaze_left=(
                GazeSeries(series[BIT_GAZE_LEFT_X], series[BIT_GAZE_LEFT_Y])
                if mask & BIT_GAZE_LEFT_X
                else None
            ),
            gaze_right=(
                GazeSeries(series[BIT_GAZE_RIGHT_X], series[BIT_GAZE_RIGHT_Y])
                if mask & BIT_GAZE_RIGHT_X
                else None
            ),
        )
    except ValueError as e:
        raise CodecError(f"decoded stream violates recording invariants: {e}") from e
