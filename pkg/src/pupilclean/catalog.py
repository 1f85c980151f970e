"""Durable registry of studies, subjects, files and jobs.

Backed by an embedded sqlite database; file content lives on the filesystem
under content-addressed paths, the database stores metadata only. All
mutations are serialized through one writer lock.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import os
import sqlite3
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .ingest import import_subjects_csv, parse_filename


class CatalogError(ValueError):
    pass


class NotFoundError(CatalogError):
    pass


class UnmappedFileError(CatalogError):
    """Filename does not follow the naming convention and no subject was
    given; the mapping has to be established manually."""


FILE_KINDS = ("raw", "compressed", "cleaned", "video", "other")
JOB_STATES = ("queued", "running", "succeeded", "failed")

_VIDEO_EXTENSIONS = {"mp4", "avi", "mov", "mkv", "webm"}


@dataclass(frozen=True)
class Study:
    study_id: int
    name: str
    created_at: str


@dataclass(frozen=True)
class Subject:
    subject_id: int
    study_id: int
    external_id: str
    display_name: Optional[str]


@dataclass(frozen=True)
class FileAsset:
    file_id: int
    subject_id: int
    original_filename: str
    kind: str
    byte_size: int
    content_path: str
    source_job_id: Optional[int]


@dataclass(frozen=True)
class Job:
    job_id: int
    kind: str  # "clean" | "compress"
    input_file_id: int
    chain_json: Optional[str]
    output_file_id: Optional[int]
    state: str
    submitted_at: float
    started_at: Optional[float]
    finished_at: Optional[float]
    failure: Optional[str]
    report_json: Optional[str]


_SCHEMA = """
CREATE TABLE IF NOT EXISTS studies (
    study_id INTEGER PRIMARY KEY,
    name TEXT NOT NULL UNIQUE,
    created_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS subjects (
    subject_id INTEGER PRIMARY KEY,
    study_id INTEGER NOT NULL REFERENCES studies(study_id),
    external_id TEXT NOT NULL,
    display_name TEXT,
    UNIQUE (study_id, external_id)
);
CREATE TABLE IF NOT EXISTS files (
    file_id INTEGER PRIMARY KEY,
    subject_id INTEGER NOT NULL REFERENCES subjects(subject_id),
    original_filename TEXT NOT NULL,
    kind TEXT NOT NULL,
    byte_size INTEGER NOT NULL,
    content_path TEXT NOT NULL,
    source_job_id INTEGER
);
CREATE TABLE IF NOT EXISTS jobs (
    job_id INTEGER PRIMARY KEY,
    kind TEXT NOT NULL,
    input_file_id INTEGER NOT NULL REFERENCES files(file_id),
    chain_json TEXT,
    output_file_id INTEGER,
    state TEXT NOT NULL,
    submitted_at REAL NOT NULL,
    started_at REAL,
    finished_at REAL,
    failure TEXT,
    report_json TEXT
);
"""


class Catalog:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "objects").mkdir(exist_ok=True)
        self._lock = threading.RLock()
        self._db = sqlite3.connect(self.root / "catalog.db", check_same_thread=False)
        self._db.row_factory = sqlite3.Row
        with self._lock:
            self._db.executescript(_SCHEMA)
            # Interrupted jobs from a previous process cannot be resumed.
            self._db.execute(
                "UPDATE jobs SET state='failed', failure='interrupted by restart', "
                "finished_at=? WHERE state IN ('queued', 'running')",
                (time.time(),))
            self._db.commit()

    def close(self) -> None:
        with self._lock:
            self._db.close()

    # -- studies ---------------------------------------------------------

    def create_study(self, name: str) -> Study:
        if not name or not name.strip():
            raise CatalogError("study name must be non-empty")
        with self._lock:
            try:
                cur = self._db.execute(
                    "INSERT INTO studies (name, created_at) VALUES (?, ?)",
                    (name, dt.datetime.now(dt.timezone.utc).isoformat()))
                self._db.commit()
            except sqlite3.IntegrityError:
                raise CatalogError(f"study {name!r} already exists") from None
            return self.get_study(cur.lastrowid)

    def get_study(self, study_id: int) -> Study:
        row = self._one("SELECT * FROM studies WHERE study_id=?", (study_id,),
                        f"unknown study {study_id}")
        return Study(row["study_id"], row["name"], row["created_at"])

    def find_study(self, name: str) -> Optional[Study]:
        with self._lock:
            row = self._db.execute("SELECT * FROM studies WHERE name=?", (name,)).fetchone()
        return Study(row["study_id"], row["name"], row["created_at"]) if row else None

    def list_studies(self) -> list[Study]:
        with self._lock:
            rows = self._db.execute("SELECT * FROM studies ORDER BY study_id").fetchall()
        return [Study(r["study_id"], r["name"], r["created_at"]) for r in rows]

    def delete_study(self, study_id: int) -> None:
        self.get_study(study_id)
        with self._lock:
            n = self._db.execute("SELECT COUNT(*) FROM subjects WHERE study_id=?",
                                 (study_id,)).fetchone()[0]
            if n:
                raise CatalogError("study still has subjects; delete them first")
            self._db.execute("DELETE FROM studies WHERE study_id=?", (study_id,))
            self._db.commit()

    # -- subjects --------------------------------------------------------

    def create_subject(self, study_id: int, external_id: str,
                       display_name: Optional[str] = None) -> Subject:
        if not external_id or not external_id.strip():
            raise CatalogError("subject identifier must be non-empty")
        self.get_study(study_id)
        with self._lock:
            try:
                cur = self._db.execute(
                    "INSERT INTO subjects (study_id, external_id, display_name) "
                    "VALUES (?, ?, ?)", (study_id, external_id, display_name))
                self._db.commit()
            except sqlite3.IntegrityError:
                raise CatalogError(
                    f"subject {external_id!r} already exists in study {study_id}") from None
            return self.get_subject(cur.lastrowid)

    def import_subjects(self, study_id: int, csv_bytes: bytes) -> list[Subject]:
        rows = import_subjects_csv(csv_bytes)
        self.get_study(study_id)
        out = []
        with self._lock:
            for r in rows:
                out.append(self.create_subject(study_id, r.external_id, r.display_name))
        return out

    def get_subject(self, subject_id: int) -> Subject:
        row = self._one("SELECT * FROM subjects WHERE subject_id=?", (subject_id,),
                        f"unknown subject {subject_id}")
        return Subject(row["subject_id"], row["study_id"], row["external_id"],
                       row["display_name"])

    def find_subject(self, study_id: int, external_id: str) -> Optional[Subject]:
        with self._lock:
            row = self._db.execute(
                "SELECT * FROM subjects WHERE study_id=? AND external_id=?",
                (study_id, external_id)).fetchone()
        if row is None:
            return None
        return Subject(row["subject_id"], row["study_id"], row["external_id"],
                       row["display_name"])

    def list_subjects(self, study_id: int) -> list[Subject]:
        self.get_study(study_id)
        with self._lock:
            rows = self._db.execute(
                "SELECT * FROM subjects WHERE study_id=? ORDER BY subject_id",
                (study_id,)).fetchall()
        return [Subject(r["subject_id"], r["study_id"], r["external_id"],
                        r["display_name"]) for r in rows]

    def delete_subject(self, subject_id: int) -> None:
        self.get_subject(subject_id)
        with self._lock:
            n = self._db.execute("SELECT COUNT(*) FROM files WHERE subject_id=?",
                                 (subject_id,)).fetchone()[0]
            if n:
                raise CatalogError("subject still has files; delete them first")
            self._db.execute("DELETE FROM subjects WHERE subject_id=?", (subject_id,))
            self._db.commit()

    # -- files -----------------------------------------------------------

    def _store_content(self, data: bytes) -> Path:
        digest = hashlib.sha256(data).hexdigest()
        path = self.root / "objects" / digest[:2] / digest
        if not path.exists():
            path.parent.mkdir(exist_ok=True)
            tmp = path.with_name(path.name + f".tmp{os.getpid()}.{threading.get_ident()}")
            tmp.write_bytes(data)
            tmp.replace(path)
        return path

    @staticmethod
    def _infer_kind(filename: str, data: bytes) -> str:
        if data[:4] == b"CEPW":
            return "compressed"
        ext = filename.rpartition(".")[2].lower()
        if ext == "tsv":
            return "raw"
        if ext in _VIDEO_EXTENSIONS:
            return "video"
        return "other"

    def register_file(self, data: bytes, filename: str,
                      subject_id: Optional[int] = None,
                      kind: Optional[str] = None,
                      source_job_id: Optional[int] = None) -> FileAsset:
        if subject_id is None:
            parts = parse_filename(filename)
            if parts is None:
                raise UnmappedFileError(
                    f"{filename!r} does not follow subject_id@study.extension; "
                    "assign a subject manually")
            study = self.find_study(parts.study)
            if study is None:
                raise NotFoundError(f"no study named {parts.study!r}")
            subject = self.find_subject(study.study_id, parts.subject_id)
            if subject is None:
                raise NotFoundError(
                    f"no subject {parts.subject_id!r} in study {parts.study!r}")
            subject_id = subject.subject_id
        else:
            self.get_subject(subject_id)
        if kind is None:
            kind = self._infer_kind(filename, data)
        if kind not in FILE_KINDS:
            raise CatalogError(f"unknown file kind {kind!r}")
        with self._lock:
            path = self._store_content(data)
            cur = self._db.execute(
                "INSERT INTO files (subject_id, original_filename, kind, byte_size, "
                "content_path, source_job_id) VALUES (?, ?, ?, ?, ?, ?)",
                (subject_id, filename, kind, len(data), str(path), source_job_id))
            self._db.commit()
            return self.get_file(cur.lastrowid)

    def get_file(self, file_id: int) -> FileAsset:
        row = self._one("SELECT * FROM files WHERE file_id=?", (file_id,),
                        f"unknown file {file_id}")
        return FileAsset(row["file_id"], row["subject_id"], row["original_filename"],
                         row["kind"], row["byte_size"], row["content_path"],
                         row["source_job_id"])

    def get_file_content(self, file_id: int) -> bytes:
        asset = self.get_file(file_id)
        return Path(asset.content_path).read_bytes()

    def list_files(self, subject_id: int) -> list[FileAsset]:
        self.get_subject(subject_id)
        with self._lock:
            rows = self._db.execute(
                "SELECT * FROM files WHERE subject_id=? ORDER BY file_id",
                (subject_id,)).fetchall()
        return [FileAsset(r["file_id"], r["subject_id"], r["original_filename"],
                          r["kind"], r["byte_size"], r["content_path"],
                          r["source_job_id"]) for r in rows]

    def delete_file(self, file_id: int) -> None:
        self.get_file(file_id)
        with self._lock:
            n = self._db.execute(
                "SELECT COUNT(*) FROM jobs WHERE input_file_id=? OR output_file_id=?",
                (file_id, file_id)).fetchone()[0]
            if n:
                raise CatalogError("file is referenced by jobs; cannot delete")
            self._db.execute("DELETE FROM files WHERE file_id=?", (file_id,))
            self._db.commit()

    # -- jobs ------------------------------------------------------------

    def create_job(self, kind: str, input_file_id: int,
                   chain_json: Optional[str] = None) -> Job:
        self.get_file(input_file_id)
        with self._lock:
            cur = self._db.execute(
                "INSERT INTO jobs (kind, input_file_id, chain_json, state, submitted_at) "
                "VALUES (?, ?, ?, 'queued', ?)",
                (kind, input_file_id, chain_json, time.time()))
            self._db.commit()
            return self.get_job(cur.lastrowid)

    def get_job(self, job_id: int) -> Job:
        row = self._one("SELECT * FROM jobs WHERE job_id=?", (job_id,),
                        f"unknown job {job_id}")
        return Job(row["job_id"], row["kind"], row["input_file_id"], row["chain_json"],
                   row["output_file_id"], row["state"], row["submitted_at"],
                   row["started_at"], row["finished_at"], row["failure"],
                   row["report_json"])

    def list_jobs(self) -> list[Job]:
        with self._lock:
            rows = self._db.execute("SELECT job_id FROM jobs ORDER BY job_id").fetchall()
        return [self.get_job(r["job_id"]) for r in rows]

    def mark_job_running(self, job_id: int) -> None:
        self._transition(job_id, "queued", "running", started_at=time.time())

    def mark_job_succeeded(self, job_id: int, output_file_id: int,
                           report: list[dict]) -> None:
        self._transition(job_id, "running", "succeeded", finished_at=time.time(),
                         output_file_id=output_file_id,
                         report_json=json.dumps(report))

    def mark_job_failed(self, job_id: int, message: str) -> None:
        self._transition(job_id, "running", "failed", finished_at=time.time(),
                         failure=message)

    def _transition(self, job_id: int, from_state: str, to_state: str, **cols) -> None:
        sets = ", ".join(f"{k}=?" for k in cols)
        with self._lock:
            cur = self._db.execute(
                f"UPDATE jobs SET state=?, {sets} WHERE job_id=? AND state=?",
                (to_state, *cols.values(), job_id, from_state))
            self._db.commit()
            if cur.rowcount != 1:
                job = self.get_job(job_id)
                raise CatalogError(
                    f"job {job_id}: cannot move {job.state} -> {to_state}")

    # -- helpers ---------------------------------------------------------

    def _one(self, sql: str, args: tuple, missing: str) -> sqlite3.Row:
        with self._lock:
            row = self._db.execute(sql, args).fetchone()
        if row is None:
            raise NotFoundError(missing)
        return row
