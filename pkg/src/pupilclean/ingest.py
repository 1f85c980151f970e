"""Parsing of raw eye-tracker exports and the file naming convention.

TSV exports are mapped onto the domain model through a ColumnMapping; the
default mapping targets Tobii Studio style headers but every column name is
overridable. Non-conforming file names are reported as unmapped, not as
errors, so the caller can fall back to manual assignment.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .model import GazeSeries, Recording, Series


class IngestError(ValueError):
    """Unparsable input stream (TSV or subject CSV)."""


@dataclass(frozen=True)
class ColumnMapping:
    timestamp_column: str = "RecordingTimestamp"
    timestamp_unit: str = "microseconds"  # microseconds | milliseconds | seconds
    pupil_left_column: Optional[str] = "PupilLeft"
    pupil_right_column: Optional[str] = "PupilRight"
    gaze_left_x_column: Optional[str] = "GazePointLeftX"
    gaze_left_y_column: Optional[str] = "GazePointLeftY"
    gaze_right_x_column: Optional[str] = "GazePointRightX"
    gaze_right_y_column: Optional[str] = "GazePointRightY"
    validity_left_column: Optional[str] = "ValidityLeft"
    validity_right_column: Optional[str] = "ValidityRight"
    validity_max_valid: int = 1
    missing_tokens: frozenset[str] = frozenset({"", "-1"})

    def __post_init__(self):
        if not self.timestamp_column:
            raise IngestError("timestamp column must be set")
        if self.timestamp_unit not in ("microseconds", "milliseconds", "seconds"):
            raise IngestError(f"unknown timestamp unit {self.timestamp_unit!r}")
        if self.pupil_left_column is None and self.pupil_right_column is None:
            raise IngestError("at least one pupil column must be mapped")
        if self.validity_max_valid < 0:
            raise IngestError("validity_max_valid must be >= 0")

    @property
    def ms_per_unit(self) -> float:
        return {"microseconds": 1e-3, "milliseconds": 1.0, "seconds": 1e3}[self.timestamp_unit]

    @staticmethod
    def from_dict(doc: dict) -> "ColumnMapping":
        known = {f.name for f in fields(ColumnMapping)}
        unknown = set(doc) - known
        if unknown:
            raise IngestError(f"unknown column mapping keys: {sorted(unknown)}")
        if "missing_tokens" in doc:
            doc = dict(doc, missing_tokens=frozenset(doc["missing_tokens"]))
        return ColumnMapping(**doc)

    @staticmethod
    def from_json(text: str) -> "ColumnMapping":
        return ColumnMapping.from_dict(json.loads(text))


@dataclass(frozen=True)
class FileNameParts:
    subject_id: str
    study: str
    extension: str


def parse_filename(name: str) -> Optional[FileNameParts]:
    """Parse the subject_id@study.extension convention.

    Returns None (unmapped) for anything not matching; the mapping then has
    to be established manually by the caller.
    """
    if name.count("@") != 1:
        return None
    subject_id, rest = name.split("@")
    if "." not in rest:
        return None
    study, _, extension = rest.rpartition(".")
    if not subject_id or not study or not extension:
        return None
    return FileNameParts(subject_id=subject_id, study=study, extension=extension)


@dataclass(frozen=True)
class SubjectRow:
    external_id: str
    display_name: Optional[str] = None


def import_subjects_csv(data: bytes) -> list[SubjectRow]:
    """One subject per non-empty row: column 1 id (required), column 2 name."""
    text = data.decode("utf-8")
    rows = [r for r in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in r)]
    if not rows:
        raise IngestError("subject CSV contains no rows")
    out: list[SubjectRow] = []
    seen: set[str] = set()
    for i, row in enumerate(rows):
        ext_id = row[0].strip()
        if not ext_id:
            raise IngestError(f"row {i + 1}: empty subject identifier")
        if ext_id in seen:
            raise IngestError(f"duplicate subject identifier {ext_id!r}")
        seen.add(ext_id)
        name = row[1].strip() if len(row) > 1 and row[1].strip() else None
        out.append(SubjectRow(external_id=ext_id, display_name=name))
    return out


def _parse_cell(cell: str, mapping: ColumnMapping) -> Optional[float]:
    token = cell.strip()
    if token in mapping.missing_tokens:
        return None
    try:
        v = float(token)
    except ValueError:
        return None
    if not np.isfinite(v):
        return None
    return v


def parse_tsv(data: bytes, mapping: ColumnMapping | None = None,
              sample_rate_hz: float = 300.0) -> Recording:
    """Parse a tab-separated eye-tracker export into a Recording.

    Cells matching missing tokens, unparsable cells, negative pupil values
    and rows failing the per-eye validity threshold become missing for the
    affected channels. Timestamps are converted to ms and re-based to t = 0.
    """
    mapping = mapping or ColumnMapping()
    text = data.decode("utf-8")
    lines = text.splitlines()
    if not lines:
        raise IngestError("empty TSV stream")
    header = lines[0].split("\t")
    col_index = {name: i for i, name in enumerate(header)}

    mapped = {
        "timestamp": mapping.timestamp_column,
        "pupil_left": mapping.pupil_left_column,
        "pupil_right": mapping.pupil_right_column,
        "gaze_left_x": mapping.gaze_left_x_column,
        "gaze_left_y": mapping.gaze_left_y_column,
        "gaze_right_x": mapping.gaze_right_x_column,
        "gaze_right_y": mapping.gaze_right_y_column,
        "validity_left": mapping.validity_left_column,
        "validity_right": mapping.validity_right_column,
    }
    idx: dict[str, int] = {}
    for key, col in mapped.items():
        if col is None:
            continue
        if col not in col_index:
            if key == "timestamp" or key.startswith("pupil"):
                raise IngestError(f"mapped column {col!r} not found in header")
            # Optional channels that the export simply does not carry.
            continue
        idx[key] = col_index[col]
    if "timestamp" not in idx:
        raise IngestError(f"mapped column {mapping.timestamp_column!r} not found in header")

    timestamps: list[float] = []
    cols: dict[str, list[Optional[float]]] = {k: [] for k in idx if k != "timestamp"}

    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")

        def cell(key: str) -> str:
            i = idx.get(key)
            if i is None or i >= len(cells):
                return ""
            return cells[i]

        t = _parse_cell(cell("timestamp"), mapping)
        if t is None:
            raise IngestError(f"line {lineno}: unparsable timestamp {cell('timestamp')!r}")
        timestamps.append(t * mapping.ms_per_unit)

        row: dict[str, Optional[float]] = {}
        for key in cols:
            v = _parse_cell(cell(key), mapping)
            if key in ("pupil_left", "pupil_right") and v is not None and v <= 0:
                v = None
            row[key] = v

        # A validity code beyond the threshold invalidates that whole eye.
        for eye in ("left", "right"):
            vkey = f"validity_{eye}"
            if vkey not in idx:
                continue
            code = _parse_cell(cell(vkey), mapping)
            if code is None or code > mapping.validity_max_valid:
                for key in (f"pupil_{eye}", f"gaze_{eye}_x", f"gaze_{eye}_y"):
                    if key in row:
                        row[key] = None

        for key in cols:
            cols[key].append(row.get(key))

    if not timestamps:
        raise IngestError("TSV stream has zero data rows")

    t0 = timestamps[0]
    ts = np.array(timestamps, dtype=np.float64) - t0

    def series(key: str) -> Optional[Series]:
        if key not in cols:
            return None
        return Series.from_optional(cols[key])

    def gaze(eye: str) -> Optional[GazeSeries]:
        x, y = series(f"gaze_{eye}_x"), series(f"gaze_{eye}_y")
        if x is None or y is None:
            return None
        return GazeSeries(x, y)

    return Recording(
        timestamps_ms=ts,
        sample_rate_hz=float(sample_rate_hz),
        pupil_left=series("pupil_left"),
        pupil_right=series("pupil_right"),
        gaze_left=gaze("left"),
        gaze_right=gaze("right"),
    )
