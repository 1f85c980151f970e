"""Cleaning filters for pupillary recordings.

Each filter is a pure function Recording -> Recording: sample count and
timestamps are preserved exactly, only values and their presence change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter, lfilter_zi

from .model import Channel, GazeSeries, Recording, Series


class FilterError(ValueError):
    """Filter precondition violated (missing channels, gaps, ...)."""


@dataclass(frozen=True)
class StdDevParams:
    k: float = 3.0

    def __post_init__(self):
        if self.k <= 0:
            raise FilterError("stddev multiplier must be > 0")


@dataclass(frozen=True)
class BlinkParams:
    min_blink_ms: float = 50.0
    max_blink_ms: float = 500.0
    margin_before_ms: float = 100.0
    margin_after_ms: float = 100.0
    clip_long_gaps: bool = False

    def __post_init__(self):
        if not (0 < self.min_blink_ms <= self.max_blink_ms):
            raise FilterError("need 0 < min_blink_ms <= max_blink_ms")
        if self.margin_before_ms < 0 or self.margin_after_ms < 0:
            raise FilterError("margins must be >= 0")


@dataclass(frozen=True)
class ButterworthParams:
    cutoff_hz: float = 4.0
    compensate_phase: bool = True
    order: int = 3  # only third order is supported

    def __post_init__(self):
        if self.cutoff_hz <= 0:
            raise FilterError("cutoff must be > 0")
        if self.order != 3:
            raise FilterError("only a third-order filter is supported")


@dataclass(frozen=True)
class ChannelStats:
    mean: float
    sigma: float  # population standard deviation
    n: int


def pupil_substitution(recording: Recording) -> Recording:
    """Fill one eye's missing pupil value with the other eye's measurement."""
    left, right = recording.pupil_left, recording.pupil_right
    if left is None or right is None:
        raise FilterError("pupil substitution requires a binocular recording")
    lp, rp = left.present, right.present

    take_right = ~lp & rp
    new_left = Series(np.where(take_right, right.values, left.values), lp | take_right)
    take_left = ~rp & lp
    new_right = Series(np.where(take_left, left.values, right.values), rp | take_left)
    return recording.with_series(pupil_left=new_left, pupil_right=new_right)


def gaze_substitution(recording: Recording) -> Recording:
    """Substitute whole gaze points (x, y pairs) across eyes."""
    left, right = recording.gaze_left, recording.gaze_right
    if left is None or right is None:
        raise FilterError("gaze substitution requires both gaze channels")
    lp, rp = left.pair_present, right.pair_present

    def merged(dst: GazeSeries, src: GazeSeries, take: np.ndarray) -> GazeSeries:
        return GazeSeries(
            Series(np.where(take, src.x.values, dst.x.values), dst.x.present | take),
            Series(np.where(take, src.y.values, dst.y.values), dst.y.present | take),
        )

    new_left = merged(left, right, ~lp & rp)
    new_right = merged(right, left, ~rp & lp)
    return recording.with_series(gaze_left=new_left, gaze_right=new_right)


def _pupil(recording: Recording, channel: Channel) -> Series:
    s = {Channel.PUPIL_LEFT: recording.pupil_left,
         Channel.PUPIL_RIGHT: recording.pupil_right}.get(channel)
    if s is None:
        raise FilterError(f"channel {channel.value} not carried by recording")
    return s


def channel_stats(recording: Recording, channel: Channel) -> ChannelStats:
    """Mean and population standard deviation over present samples."""
    if channel not in (Channel.PUPIL_LEFT, Channel.PUPIL_RIGHT):
        raise FilterError("stats are defined for pupil channels only")
    s = _pupil(recording, channel)
    vals = s.values[s.present]
    if vals.size == 0:
        raise FilterError(f"channel {channel.value} has no present samples")
    return ChannelStats(mean=float(np.mean(vals)), sigma=float(np.std(vals)), n=int(vals.size))


def stddev_filter(recording: Recording, params: StdDevParams = StdDevParams()) -> Recording:
    """Drop pupil values strictly outside mean +- k*sigma.

    Stats are computed once on the input per channel; boundary-equal values
    are kept. Gaze channels are untouched. An entirely-missing channel is
    passed through unchanged.
    """
    updates = {}
    for field_name, channel in (("pupil_left", Channel.PUPIL_LEFT),
                                ("pupil_right", Channel.PUPIL_RIGHT)):
        s = getattr(recording, field_name)
        if s is None or not s.present.any():
            continue
        stats = channel_stats(recording, channel)
        hi = stats.mean + params.k * stats.sigma
        lo = stats.mean - params.k * stats.sigma
        outlier = s.present & ((s.values > hi) | (s.values < lo))
        updates[field_name] = Series(s.values, s.present & ~outlier)
    return recording.with_series(**updates)


def _eye_missing_mask(recording: Recording, eye: str) -> np.ndarray:
    pupil: Series = getattr(recording, f"pupil_{eye}")
    miss = ~pupil.present
    gaze: GazeSeries | None = getattr(recording, f"gaze_{eye}")
    if gaze is not None:
        miss = miss | ~gaze.pair_present
    return miss


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True as (start, end) inclusive index pairs."""
    if not mask.any():
        return []
    padded = np.concatenate([[False], mask, [False]])
    edges = np.diff(padded.astype(np.int8))
    starts = np.nonzero(edges == 1)[0]
    ends = np.nonzero(edges == -1)[0] - 1
    return list(zip(starts.tolist(), ends.tolist()))


def blink_detection(recording: Recording, params: BlinkParams = BlinkParams()) -> Recording:
    """Clip blinks: gaps of blink-typical duration plus margins around them.

    A sample counts as missing for an eye when its pupil is missing or, if
    gaze is carried, its same-eye gaze point is missing. Gap duration is the
    timestamp span of the run plus one nominal sample period.
    """
    ts = recording.timestamps_ms
    period_ms = 1000.0 / recording.sample_rate_hz
    updates = {}
    for eye in ("left", "right"):
        pupil: Series | None = getattr(recording, f"pupil_{eye}")
        if pupil is None:
            continue
        miss = _eye_missing_mask(recording, eye)
        clip = np.zeros(len(ts), dtype=bool)
        for start, end in _runs(miss):
            duration = ts[end] - ts[start] + period_ms
            is_blink = params.min_blink_ms <= duration <= params.max_blink_ms
            is_long = duration > params.max_blink_ms and params.clip_long_gaps
            if not (is_blink or is_long):
                continue
            before = (ts >= ts[start] - params.margin_before_ms) & (ts < ts[start])
            after = (ts > ts[end]) & (ts <= ts[end] + params.margin_after_ms)
            clip |= before | after
            clip[start:end + 1] = True  # the gap itself is part of the blink
        if not clip.any():
            continue
        updates[f"pupil_{eye}"] = Series(pupil.values, pupil.present & ~clip)
        gaze: GazeSeries | None = getattr(recording, f"gaze_{eye}")
        if gaze is not None:
            updates[f"gaze_{eye}"] = GazeSeries(
                Series(gaze.x.values, gaze.x.present & ~clip),
                Series(gaze.y.values, gaze.y.present & ~clip),
            )
    return recording.with_series(**updates)


def _interp_series(ts: np.ndarray, s: Series) -> Series:
    present = s.present
    if present.all() or not present.any():
        return s
    idx = np.nonzero(present)[0]
    first, last = idx[0], idx[-1]
    # Only interior gaps have anchors on both sides; edges stay missing.
    interior = np.zeros_like(present)
    interior[first:last + 1] = True
    fill = interior & ~present
    values = s.values.copy()
    values[fill] = np.interp(ts[fill], ts[present], s.values[present])
    return Series(values, present | fill)


def linear_interpolation(recording: Recording) -> Recording:
    """Fill interior missing runs linearly between their bounding anchors,
    using true timestamps. Leading/trailing runs remain missing."""
    ts = recording.timestamps_ms
    updates = {}
    for name in ("pupil_left", "pupil_right"):
        s = getattr(recording, name)
        if s is not None:
            updates[name] = _interp_series(ts, s)
    for name in ("gaze_left", "gaze_right"):
        g = getattr(recording, name)
        if g is not None:
            updates[name] = GazeSeries(_interp_series(ts, g.x), _interp_series(ts, g.y))
    return recording.with_series(**updates)


@dataclass(frozen=True)
class FilterCoefficients:
    """Discrete transfer function b(z)/a(z), a[0] = 1."""

    b: tuple[float, ...]
    a: tuple[float, ...]


def design_butterworth(cutoff_hz: float, sample_rate_hz: float) -> FilterCoefficients:
    """Third-order lowpass Butterworth via bilinear transform with prewarp.

    Analog prototype denominator: s^3 + 2s^2 + 2s + 1 (frequency scaled),
    mapped with s = K (1 - z^-1)/(1 + z^-1), K = 2*fs, and the analog cutoff
    prewarped so the discrete -3 dB point lands exactly on cutoff_hz.
    """
    if not (0 < cutoff_hz < sample_rate_hz / 2):
        raise FilterError("cutoff must lie strictly below Nyquist")
    K = 2.0 * sample_rate_hz
    wa = K * np.tan(np.pi * cutoff_hz / sample_rate_hz)

    minus = np.array([1.0, -1.0])  # (1 - z^-1)
    plus = np.array([1.0, 1.0])    # (1 + z^-1)

    def pw(p: np.ndarray, n: int) -> np.ndarray:
        out = np.array([1.0])
        for _ in range(n):
            out = np.convolve(out, p)
        return out

    # Denominator terms of s^3 + 2 wa s^2 + 2 wa^2 s + wa^3 after substitution,
    # each multiplied out to degree 3 in z^-1.
    a = (K**3) * np.convolve(pw(minus, 3), pw(plus, 0))
    a = np.polyadd(a, 2 * wa * K**2 * np.convolve(pw(minus, 2), pw(plus, 1)))
    a = np.polyadd(a, 2 * wa**2 * K * np.convolve(pw(minus, 1), pw(plus, 2)))
    a = np.polyadd(a, wa**3 * pw(plus, 3))
    b = wa**3 * pw(plus, 3)

    b = b / a[0]
    a = a / a[0]
    b = b * (np.sum(a) / np.sum(b))  # pin DC gain to exactly 1
    return FilterCoefficients(b=tuple(b.tolist()), a=tuple(a.tolist()))


def phase_response(w: float) -> float:
    """Continuous phase of the third-order Butterworth prototype at
    normalized angular frequency w (cutoff = 1), in radians.

    Quadrant-aware argument of the denominator (jw)^3 + 2(jw)^2 + 2jw + 1,
    negated; decreases monotonically from 0 toward -3*pi/2.
    """
    if w < 0:
        raise FilterError("frequency must be >= 0")
    real = 1.0 - 2.0 * w * w
    imag = 2.0 * w - w**3
    theta = float(np.arctan2(imag, real))
    if imag < 0:  # past w = sqrt(2) the principal branch wraps; unwrap it
        theta += 2.0 * np.pi
    return -theta


def group_delay_samples(cutoff_hz: float, sample_rate_hz: float) -> int:
    """DC group delay of the prototype (2/wc seconds) in whole samples."""
    return int(round(2.0 / (2.0 * np.pi * cutoff_hz) * sample_rate_hz))


def butterworth_filter(recording: Recording,
                       params: ButterworthParams = ButterworthParams()) -> Recording:
    """Lowpass each pupil channel, optionally re-shifting the output earlier
    by the DC group delay so the phase response is equalized.

    Requires gap-free target channels and approximately uniform sampling.
    The last d samples after the shift hold the final filtered value.
    """
    fs = recording.sample_rate_hz
    if not (0 < params.cutoff_hz < fs / 2):
        raise FilterError("cutoff must lie strictly below Nyquist")
    ts = recording.timestamps_ms
    if len(ts) >= 2:
        period = 1000.0 / fs
        if np.max(np.abs(np.diff(ts) - period)) >= 0.1 * period:
            raise FilterError("sampling is non-uniform beyond 10% of the nominal period")

    coeffs = design_butterworth(params.cutoff_hz, fs)
    b, a = np.array(coeffs.b), np.array(coeffs.a)
    zi = lfilter_zi(b, a)

    updates = {}
    for name in ("pupil_left", "pupil_right"):
        s = getattr(recording, name)
        if s is None:
            continue
        if not s.present.all():
            raise FilterError(
                f"{name} contains missing values; interpolate before lowpass filtering")
        # Prime the IIR state with the first value to suppress the startup step.
        y, _ = lfilter(b, a, s.values, zi=zi * s.values[0])
        if params.compensate_phase:
            d = min(group_delay_samples(params.cutoff_hz, fs), len(y) - 1)
            y = np.concatenate([y[d:], np.repeat(y[-1], d)])
        updates[name] = Series(y, np.ones(len(y), dtype=bool))
    if not updates:
        raise FilterError("recording carries no pupil channel to filter")
    return recording.with_series(**updates)
