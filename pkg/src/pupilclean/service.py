"""HTTP service exposing catalog management, job submission and series
inspection. All endpoints live under /api/v1; errors are structured bodies
with stable codes."""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import codec
from .cache import SeriesCache
from .catalog import Catalog, CatalogError, FileAsset, Job, NotFoundError, \
    Study, Subject, UnmappedFileError
from .chain import ChainError, Severity, chain_from_dict, validate_chain
from .config import ServiceConfig
from .ingest import IngestError
from .model import Channel
from .pool import WorkerPool
from .series import SeriesError, average_pupil, build_envelope

API_PREFIX = "/api/v1"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _study_body(s: Study) -> dict:
    return {"study_id": s.study_id, "name": s.name, "created_at": s.created_at}


def _subject_body(s: Subject) -> dict:
    return {"subject_id": s.subject_id, "study_id": s.study_id,
            "external_id": s.external_id, "display_name": s.display_name}


def _file_body(f: FileAsset) -> dict:
    return {"file_id": f.file_id, "subject_id": f.subject_id,
            "original_filename": f.original_filename, "kind": f.kind,
            "byte_size": f.byte_size, "source_job_id": f.source_job_id}


def _job_body(j: Job) -> dict:
    return {"job_id": j.job_id, "kind": j.kind, "state": j.state,
            "input_file_id": j.input_file_id, "output_file_id": j.output_file_id,
            "submitted_at": j.submitted_at, "started_at": j.started_at,
            "finished_at": j.finished_at, "failure": j.failure,
            "report": json.loads(j.report_json) if j.report_json else []}


def _finding_body(f) -> dict:
    return {"severity": f.severity.value, "message": f.message,
            "positions": list(f.positions)}


class StudyIn(BaseModel):
    name: str


class SubjectIn(BaseModel):
    external_id: str
    display_name: Optional[str] = None


class JobsIn(BaseModel):
    file_ids: list[int]
    chain: dict


class ValidateIn(BaseModel):
    chain: dict
    channels: Optional[list[str]] = None


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    catalog = Catalog(config.storage_root)
    pool = WorkerPool(catalog, max_workers=config.max_workers,
                      default_sample_rate_hz=config.default_sample_rate_hz)
    cache = SeriesCache(config.cache_budget_bytes)

    app = FastAPI(title="pupilclean", openapi_url=f"{API_PREFIX}/openapi.json")
    app.state.catalog = catalog
    app.state.pool = pool
    app.state.cache = cache

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": {"code": exc.code,
                                               "message": exc.message}})

    def translate(e: Exception) -> ApiError:
        if isinstance(e, NotFoundError):
            return ApiError(404, "not_found", str(e))
        if isinstance(e, UnmappedFileError):
            return ApiError(400, "unmapped_filename", str(e))
        if isinstance(e, ChainError):
            return ApiError(400, "invalid_chain", str(e))
        if isinstance(e, (CatalogError, IngestError, SeriesError)):
            return ApiError(400, "bad_request", str(e))
        return ApiError(500, "internal_error", str(e))

    # -- studies and subjects -------------------------------------------

    @app.post(f"{API_PREFIX}/studies", status_code=201)
    def create_study(body: StudyIn):
        try:
            return _study_body(catalog.create_study(body.name))
        except CatalogError as e:
            raise translate(e)

    @app.get(f"{API_PREFIX}/studies")
    def list_studies():
        return {"studies": [_study_body(s) for s in catalog.list_studies()]}

    @app.post(f"{API_PREFIX}/studies/{{study_id}}/subjects", status_code=201)
    def create_subject(study_id: int, body: SubjectIn):
        try:
            return _subject_body(
                catalog.create_subject(study_id, body.external_id, body.display_name))
        except CatalogError as e:
            raise translate(e)

    @app.get(f"{API_PREFIX}/studies/{{study_id}}/subjects")
    def list_subjects(study_id: int):
        try:
            return {"subjects": [_subject_body(s)
                                 for s in catalog.list_subjects(study_id)]}
        except CatalogError as e:
            raise translate(e)

    @app.post(f"{API_PREFIX}/studies/{{study_id}}/subjects/import", status_code=201)
    def import_subjects(study_id: int, file: UploadFile = File(...)):
        try:
            subjects = catalog.import_subjects(study_id, file.file.read())
            return {"subjects": [_subject_body(s) for s in subjects]}
        except (CatalogError, IngestError) as e:
            raise translate(e)

    # -- files -----------------------------------------------------------

    @app.post(f"{API_PREFIX}/files", status_code=201)
    def upload_file(file: UploadFile = File(...),
                    subject_id: Optional[int] = Form(None)):
        data = file.file.read()
        try:
            asset = catalog.register_file(data, file.filename, subject_id=subject_id)
        except CatalogError as e:
            raise translate(e)
        body = _file_body(asset)
        body["auto_mapped"] = subject_id is None
        if asset.kind == "raw":
            # Raw uploads are only inspectable once this job has finished.
            body["compression_job_id"] = pool.submit_compress(asset.file_id)
        return body

    @app.get(f"{API_PREFIX}/subjects/{{subject_id}}/files")
    def list_files(subject_id: int):
        try:
            return {"files": [_file_body(f) for f in catalog.list_files(subject_id)]}
        except CatalogError as e:
            raise translate(e)

    @app.get(f"{API_PREFIX}/files/{{file_id}}")
    def get_file(file_id: int):
        try:
            return _file_body(catalog.get_file(file_id))
        except CatalogError as e:
            raise translate(e)

    # -- chains and jobs -------------------------------------------------

    @app.post(f"{API_PREFIX}/chains/validate")
    def validate(body: ValidateIn):
        try:
            chain = chain_from_dict(body.chain)
            channels = (frozenset(Channel(c) for c in body.channels)
                        if body.channels is not None else None)
        except (ChainError, ValueError) as e:
            raise translate(e if isinstance(e, ChainError)
                            else ChainError(str(e)))
        findings = validate_chain(chain, channels)
        return {"findings": [_finding_body(f) for f in findings],
                "ok": all(f.severity is not Severity.ERROR for f in findings)}

    @app.post(f"{API_PREFIX}/jobs", status_code=201)
    def submit_jobs(body: JobsIn):
        try:
            chain = chain_from_dict(body.chain)
        except ChainError as e:
            raise translate(e)
        findings = validate_chain(chain)
        if any(f.severity is Severity.ERROR for f in findings):
            raise ApiError(400, "invalid_chain",
                           "; ".join(f.message for f in findings
                                     if f.severity is Severity.ERROR))
        job_ids = []
        try:
            for file_id in body.file_ids:
                job_ids.append(pool.submit_clean(file_id, chain))
        except (CatalogError, ChainError) as e:
            raise translate(e)
        return {"job_ids": job_ids,
                "warnings": [_finding_body(f) for f in findings]}

    @app.get(f"{API_PREFIX}/jobs/{{job_id}}")
    def poll_job(job_id: int):
        try:
            return _job_body(catalog.get_job(job_id))
        except CatalogError as e:
            raise translate(e)

    @app.get(f"{API_PREFIX}/pool/status")
    def pool_status():
        return pool.status()

    # -- series ----------------------------------------------------------

    def _load_recording(file_id: int):
        asset = catalog.get_file(file_id)
        if asset.kind not in ("compressed", "cleaned"):
            raise ApiError(
                409, "uncompressed_file",
                f"file {file_id} is {asset.kind}; real-time inspection needs the "
                "compressed form - wait for the compression job")
        return cache.get_or_load(
            file_id, lambda: codec.read_compressed(catalog.get_file_content(file_id)))

    @app.get(f"{API_PREFIX}/files/{{file_id}}/series")
    def get_series(file_id: int, channel: str = "pupil_left",
                   from_ms: Optional[float] = None, to_ms: Optional[float] = None,
                   max_points: int = 2000):
        try:
            recording = _load_recording(file_id)
            envelope = build_envelope(recording, channel, from_ms, to_ms, max_points)
        except (CatalogError, SeriesError, codec.CodecError) as e:
            raise translate(e)
        body = envelope.to_dict()
        body["file_id"] = file_id
        body["cache"] = {"hits": cache.hits, "misses": cache.misses}
        return body

    @app.get(f"{API_PREFIX}/files/{{file_id}}/average")
    def get_average(file_id: int, mode: str = "both"):
        try:
            recording = _load_recording(file_id)
            value = average_pupil(recording, mode)
        except (CatalogError, SeriesError, codec.CodecError) as e:
            raise translate(e)
        return {"file_id": file_id, "mode": mode, "average_mm": value}

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
