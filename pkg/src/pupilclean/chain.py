"""Filter-chain configuration, ordering validation and composition.

Chain documents are plain JSON shared by the CLI and the HTTP service:
{"filters": [{"kind": "blink_detection", "parameters": {...}}, ...]}
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import filters
from .model import Channel, GazeSeries, Recording, Series


class FilterKind(Enum):
    PUPIL_SUBSTITUTION = "pupil_substitution"
    GAZE_SUBSTITUTION = "gaze_substitution"
    BLINK_DETECTION = "blink_detection"
    STANDARD_DEVIATION = "standard_deviation"
    LINEAR_INTERPOLATION = "linear_interpolation"
    BUTTERWORTH = "butterworth"


# Relative order that keeps every filter's assumptions intact.
RECOMMENDED_ORDER = (
    FilterKind.PUPIL_SUBSTITUTION,
    FilterKind.GAZE_SUBSTITUTION,
    FilterKind.BLINK_DETECTION,
    FilterKind.STANDARD_DEVIATION,
    FilterKind.LINEAR_INTERPOLATION,
    FilterKind.BUTTERWORTH,
)

_PARAM_TYPES = {
    FilterKind.STANDARD_DEVIATION: filters.StdDevParams,
    FilterKind.BLINK_DETECTION: filters.BlinkParams,
    FilterKind.BUTTERWORTH: filters.ButterworthParams,
}


class ChainError(ValueError):
    """Chain document malformed, or applied despite error-level findings."""


@dataclass(frozen=True)
class FilterConfig:
    kind: FilterKind
    parameters: object = None

    def __post_init__(self):
        expected = _PARAM_TYPES.get(self.kind)
        if expected is None:
            if self.parameters is not None:
                raise ChainError(f"{self.kind.value} takes no parameters")
        else:
            if self.parameters is None:
                object.__setattr__(self, "parameters", expected())
            elif not isinstance(self.parameters, expected):
                raise ChainError(
                    f"{self.kind.value} expects {expected.__name__} parameters")


class Severity(Enum):
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class ChainWarning:
    severity: Severity
    message: str
    positions: tuple[int, ...]


def chain_from_dict(doc: dict) -> list[FilterConfig]:
    if not isinstance(doc, dict) or "filters" not in doc:
        raise ChainError('chain document must be an object with a "filters" list')
    entries = doc["filters"]
    if not isinstance(entries, list):
        raise ChainError('"filters" must be a list')
    out = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ChainError(f'filter {i}: each entry needs a "kind"')
        try:
            kind = FilterKind(entry["kind"])
        except ValueError:
            raise ChainError(f'filter {i}: unknown kind {entry["kind"]!r}') from None
        params = None
        raw = entry.get("parameters")
        if raw is not None:
            ptype = _PARAM_TYPES.get(kind)
            if ptype is None:
                raise ChainError(f"filter {i}: {kind.value} takes no parameters")
            try:
                params = ptype(**raw)
            except TypeError as e:
                raise ChainError(f"filter {i}: bad parameters: {e}") from None
        out.append(FilterConfig(kind=kind, parameters=params))
    return out


def chain_from_json(text: str) -> list[FilterConfig]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChainError(f"chain document is not valid JSON: {e}") from None
    return chain_from_dict(doc)


def chain_to_dict(chain: list[FilterConfig]) -> dict:
    out = []
    for cfg in chain:
        entry: dict = {"kind": cfg.kind.value}
        if cfg.parameters is not None:
            entry["parameters"] = asdict(cfg.parameters)
        out.append(entry)
    return {"filters": out}


def validate_chain(chain: list[FilterConfig],
                   channels_present: Optional[frozenset[Channel]] = None) -> list[ChainWarning]:
    """Static ordering checks; never mutates the chain.

    Error-level findings describe combinations that produce wrong numbers
    (e.g. lowpass over gaps); warnings flag orderings known to work poorly.
    """
    findings: list[ChainWarning] = []
    kinds = [c.kind for c in chain]

    def before(position: int, kind: FilterKind) -> bool:
        return kind in kinds[:position]

    for i, kind in enumerate(kinds):
        if kind is FilterKind.BUTTERWORTH and not before(i, FilterKind.LINEAR_INTERPOLATION):
            findings.append(ChainWarning(
                Severity.ERROR,
                "butterworth over data that may contain missing values leads to "
                "filtering artifacts; run linear_interpolation first",
                (i,)))
        if kind is FilterKind.BLINK_DETECTION:
            if before(i, FilterKind.LINEAR_INTERPOLATION):
                findings.append(ChainWarning(
                    Severity.WARNING,
                    "blink_detection will not work properly once missing values "
                    "have been linearly interpolated",
                    (i,)))
            subs = [k for k in (FilterKind.PUPIL_SUBSTITUTION, FilterKind.GAZE_SUBSTITUTION)
                    if before(i, k)]
            if len(subs) == 1:
                findings.append(ChainWarning(
                    Severity.WARNING,
                    "apply pupil_substitution and gaze_substitution only in "
                    "combination before blink_detection",
                    (i,)))
        if kind is FilterKind.LINEAR_INTERPOLATION and not before(i, FilterKind.BLINK_DETECTION):
            findings.append(ChainWarning(
                Severity.WARNING,
                "linear_interpolation without a preceding blink_detection may "
                "anchor on blink-corrupted values",
                (i,)))

    # Generic order check for inversions not already covered above.
    covered = {(FilterKind.LINEAR_INTERPOLATION, FilterKind.BLINK_DETECTION),
               (FilterKind.BUTTERWORTH, FilterKind.LINEAR_INTERPOLATION)}
    rank = {k: r for r, k in enumerate(RECOMMENDED_ORDER)}
    for i in range(len(kinds)):
        for j in range(i + 1, len(kinds)):
            if rank[kinds[i]] > rank[kinds[j]] and (kinds[i], kinds[j]) not in covered:
                findings.append(ChainWarning(
                    Severity.WARNING,
                    f"{kinds[i].value} before {kinds[j].value} deviates from the "
                    "recommended filter order",
                    (i, j)))

    if channels_present is not None:
        both_pupils = {Channel.PUPIL_LEFT, Channel.PUPIL_RIGHT} <= channels_present
        both_gaze = {Channel.GAZE_LEFT, Channel.GAZE_RIGHT} <= channels_present
        for i, kind in enumerate(kinds):
            if kind is FilterKind.PUPIL_SUBSTITUTION and not both_pupils:
                findings.append(ChainWarning(
                    Severity.ERROR,
                    "pupil_substitution requires a binocular recording", (i,)))
            if kind is FilterKind.GAZE_SUBSTITUTION and not both_gaze:
                findings.append(ChainWarning(
                    Severity.ERROR,
                    "gaze_substitution requires both gaze channels", (i,)))
    return findings


def recommended_chain() -> list[FilterConfig]:
    return [FilterConfig(kind=k) for k in RECOMMENDED_ORDER]


@dataclass(frozen=True)
class FilterReport:
    kind: FilterKind
    removed: int
    substituted: int
    interpolated: int
    wall_ms: float
    tail_held: int = 0  # samples holding the last value after phase shift

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


def _presence_counts(before: Recording, after: Recording) -> tuple[int, int]:
    """(newly missing, newly present) across all scalar series."""
    removed = added = 0

    def diff(a: Optional[Series], b: Optional[Series]):
        nonlocal removed, added
        if a is None or b is None:
            return
        removed += int(np.count_nonzero(a.present & ~b.present))
        added += int(np.count_nonzero(~a.present & b.present))

    diff(before.pupil_left, after.pupil_left)
    diff(before.pupil_right, after.pupil_right)
    for name in ("gaze_left", "gaze_right"):
        ga, gb = getattr(before, name), getattr(after, name)
        if ga is not None and gb is not None:
            diff(ga.x, gb.x)
            diff(ga.y, gb.y)
    return removed, added


def _run_one(recording: Recording, cfg: FilterConfig) -> Recording:
    if cfg.kind is FilterKind.PUPIL_SUBSTITUTION:
        return filters.pupil_substitution(recording)
    if cfg.kind is FilterKind.GAZE_SUBSTITUTION:
        return filters.gaze_substitution(recording)
    if cfg.kind is FilterKind.BLINK_DETECTION:
        return filters.blink_detection(recording, cfg.parameters)
    if cfg.kind is FilterKind.STANDARD_DEVIATION:
        return filters.stddev_filter(recording, cfg.parameters)
    if cfg.kind is FilterKind.LINEAR_INTERPOLATION:
        return filters.linear_interpolation(recording)
    return filters.butterworth_filter(recording, cfg.parameters)


def apply_chain(recording: Recording,
                chain: list[FilterConfig]) -> tuple[Recording, list[FilterReport]]:
    """Apply filters strictly in order; abort on the first failure.

    Error-level validation findings block execution up front; warnings are
    the caller's to surface.
    """
    errors = [f for f in validate_chain(chain, recording.channels_present)
              if f.severity is Severity.ERROR]
    if errors:
        raise ChainError("; ".join(f.message for f in errors))

    reports: list[FilterReport] = []
    current = recording
    for cfg in chain:
        t0 = time.perf_counter()
        nxt = _run_one(current, cfg)
        wall_ms = (time.perf_counter() - t0) * 1e3
        removed, added = _presence_counts(current, nxt)
        substituted = added if cfg.kind in (FilterKind.PUPIL_SUBSTITUTION,
                                            FilterKind.GAZE_SUBSTITUTION) else 0
        interpolated = added if cfg.kind is FilterKind.LINEAR_INTERPOLATION else 0
        tail = 0
        if cfg.kind is FilterKind.BUTTERWORTH and cfg.parameters.compensate_phase:
            tail = min(filters.group_delay_samples(cfg.parameters.cutoff_hz,
                                                   current.sample_rate_hz),
                       len(current) - 1)
        reports.append(FilterReport(kind=cfg.kind, removed=removed,
                                    substituted=substituted,
                                    interpolated=interpolated,
                                    wall_ms=wall_ms, tail_held=tail))
        current = nxt
    return current, reports
