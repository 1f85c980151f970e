"""Bounded worker pool for batch cleaning and compression jobs.

One worker per core, minus one core reserved for housekeeping (a lone core
still gets one worker). Jobs start in FIFO order; queued jobs wait until an
active worker finishes. Each worker reads its input, applies the filters
and writes the output; a failing job writes nothing.
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import codec
from .catalog import Catalog, Job
from .chain import (ChainError, FilterConfig, Severity, apply_chain,
                    chain_from_json, chain_to_dict, validate_chain)
from .ingest import ColumnMapping, parse_tsv
from .model import Recording


class PoolError(ValueError):
    pass


def pool_size(core_count: Optional[int] = None) -> int:
    """Workers to run in parallel: one on a single core, cores - 1 otherwise."""
    if core_count is None:
        core_count = os.cpu_count() or 1
    if core_count < 1:
        raise PoolError("core count must be >= 1")
    return max(1, core_count - 1)


def decode_input(data: bytes, mapping: ColumnMapping | None = None,
                 sample_rate_hz: float = 300.0) -> Recording:
    """Compressed format preferred; falls back to TSV parsing."""
    if data[:4] == codec.MAGIC:
        return codec.read_compressed(data)
    return parse_tsv(data, mapping, sample_rate_hz)


class WorkerPool:
    """Schedules catalog-backed jobs on a bounded thread pool."""

    def __init__(self, catalog: Catalog, max_workers: Optional[int] = None,
                 default_mapping: ColumnMapping | None = None,
                 default_sample_rate_hz: float = 300.0):
        self.catalog = catalog
        self.max_workers = max_workers if max_workers is not None else pool_size()
        if self.max_workers < 1:
            raise PoolError("max_workers must be >= 1")
        self.default_mapping = default_mapping or ColumnMapping()
        self.default_sample_rate_hz = default_sample_rate_hz
        self._executor = ThreadPoolExecutor(max_workers=self.max_workers)
        self._lock = threading.Lock()
        self._active = 0
        self._futures: dict[int, Future] = {}

    # -- submission ------------------------------------------------------

    def submit_clean(self, input_file_id: int, chain: list[FilterConfig]) -> int:
        errors = [f for f in validate_chain(chain) if f.severity is Severity.ERROR]
        if errors:
            raise ChainError("; ".join(f.message for f in errors))
        job = self.catalog.create_job("clean", input_file_id,
                                      chain_json=json.dumps(chain_to_dict(chain)))
        self._start(job.job_id)
        return job.job_id

    def submit_compress(self, input_file_id: int) -> int:
        job = self.catalog.create_job("compress", input_file_id)
        self._start(job.job_id)
        return job.job_id

    def _start(self, job_id: int) -> None:
        with self._lock:
            self._futures[job_id] = self._executor.submit(self._run, job_id)

    # -- observation -----------------------------------------------------

    def poll(self, job_id: int) -> Job:
        return self.catalog.get_job(job_id)

    def status(self) -> dict:
        jobs = self.catalog.list_jobs()
        return {
            "max_workers": self.max_workers,
            "active": sum(1 for j in jobs if j.state == "running"),
            "queued": sum(1 for j in jobs if j.state == "queued"),
        }

    def wait(self, job_ids: Optional[list[int]] = None) -> None:
        with self._lock:
            futures = (list(self._futures.values()) if job_ids is None
                       else [self._futures[j] for j in job_ids if j in self._futures])
        for f in futures:
            f.result()

    def shutdown(self) -> None:
        self._executor.shutdown(wait=True)

    # -- execution -------------------------------------------------------

    def _run(self, job_id: int) -> None:
        self.catalog.mark_job_running(job_id)
        try:
            job = self.catalog.get_job(job_id)
            asset = self.catalog.get_file(job.input_file_id)
            data = self.catalog.get_file_content(job.input_file_id)
            recording = decode_input(data, self.default_mapping,
                                     self.default_sample_rate_hz)
            if job.kind == "compress":
                out_bytes = codec.write_compressed(recording)
                out_kind = "compressed"
                report: list[dict] = []
                suffix = ".cepw"
            elif job.kind == "clean":
                chain = chain_from_json(job.chain_json)
                cleaned, reports = apply_chain(recording, chain)
                out_bytes = codec.write_compressed(cleaned)
                out_kind = "cleaned"
                report = [r.to_dict() for r in reports]
                suffix = ".cleaned.cepw"
            else:
                raise PoolError(f"unknown job kind {job.kind!r}")
            stem = asset.original_filename.rpartition(".")[0] or asset.original_filename
            out_asset = self.catalog.register_file(
                out_bytes, stem + suffix, subject_id=asset.subject_id,
                kind=out_kind, source_job_id=job_id)
            self.catalog.mark_job_succeeded(job_id, out_asset.file_id, report)
        except Exception as e:  # a worker failure must never kill the pool
            self.catalog.mark_job_failed(job_id, f"{type(e).__name__}: {e}")


@dataclass(frozen=True)
class BatchResult:
    input_path: str
    output_path: Optional[str]
    error: Optional[str]
    report: list[dict]


def run_local_batch(inputs: list[str | os.PathLike], chain: list[FilterConfig],
                    output_dir: str | os.PathLike,
                    mapping: ColumnMapping | None = None,
                    sample_rate_hz: float = 300.0,
                    max_workers: Optional[int] = None) -> list[BatchResult]:
    """Catalog-free batch cleaning for the CLI: same pool discipline, files
    in and files out. One file's failure does not stop the others."""
    workers = max_workers if max_workers is not None else pool_size()
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(path: os.PathLike) -> BatchResult:
        p = Path(path)
        try:
            data = p.read_bytes()
            recording = decode_input(data, mapping, sample_rate_hz)
            cleaned, reports = apply_chain(recording, chain)
            out_path = out_dir / (p.stem + ".cleaned.cepw")
            tmp = out_path.with_name(out_path.name + ".tmp")
            tmp.write_bytes(codec.write_compressed(cleaned))
            tmp.replace(out_path)
            return BatchResult(str(p), str(out_path), None,
                               [r.to_dict() for r in reports])
        except Exception as e:
            return BatchResult(str(p), None, f"{type(e).__name__}: {e}", [])

    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(one, inputs))
