/**
 * Typed client for the cleaning service. Every response is validated
 * against a schema before it reaches the UI, so a drifting server fails
 * loudly instead of rendering garbage.
 */

import { z } from "zod";

export const API_PREFIX = "/api/v1";

const StudySchema = z.object({
  study_id: z.number(),
  name: z.string(),
  created_at: z.number(),
});

const SubjectSchema = z.object({
  subject_id: z.number(),
  study_id: z.number(),
  external_id: z.string(),
  display_name: z.string().nullable(),
});

const FileSchema = z.object({
  file_id: z.number(),
  subject_id: z.number(),
  original_filename: z.string(),
  kind: z.string(),
  byte_size: z.number(),
  source_job_id: z.number().nullable(),
});

const UploadedFileSchema = FileSchema.extend({
  auto_mapped: z.boolean(),
  compression_job_id: z.number().optional(),
});

const JobSchema = z.object({
  job_id: z.number(),
  kind: z.string(),
  state: z.enum(["queued", "running", "succeeded", "failed"]),
  input_file_id: z.number(),
  output_file_id: z.number().nullable(),
  failure: z.string().nullable(),
  report: z.array(z.record(z.string(), z.unknown())),
});

const FindingSchema = z.object({
  severity: z.enum(["warning", "error"]),
  message: z.string(),
  positions: z.array(z.number()),
});

const ValidationSchema = z.object({
  findings: z.array(FindingSchema),
  ok: z.boolean(),
});

const BucketSchema = z.object({
  start_ms: z.number(),
  end_ms: z.number(),
  min: z.number().nullable(),
  max: z.number().nullable(),
  empty: z.boolean(),
});

const EnvelopeSchema = z.object({
  channel: z.string(),
  from_ms: z.number(),
  to_ms: z.number(),
  total_samples: z.number(),
  buckets: z.array(BucketSchema),
});

const PoolStatusSchema = z.object({
  max_workers: z.number(),
  active: z.number(),
  queued: z.number(),
});

export type Study = z.infer<typeof StudySchema>;
export type Subject = z.infer<typeof SubjectSchema>;
export type FileAsset = z.infer<typeof FileSchema>;
export type UploadedFile = z.infer<typeof UploadedFileSchema>;
export type Job = z.infer<typeof JobSchema>;
export type Finding = z.infer<typeof FindingSchema>;
export type ChainValidation = z.infer<typeof ValidationSchema>;
export type Bucket = z.infer<typeof BucketSchema>;
export type Envelope = z.infer<typeof EnvelopeSchema>;
export type PoolStatus = z.infer<typeof PoolStatusSchema>;

export interface ChainDocument {
  filters: { kind: string; parameters?: Record<string, unknown> }[];
}

/** Structured service error carrying the machine-readable code. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = "unknown";
  let message = response.statusText;
  try {
    const body = await response.json();
    if (body && body.error) {
      code = String(body.error.code);
      message = String(body.error.message);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(
    schema: z.ZodType<T>,
    path: string,
    init?: RequestInit,
  ): Promise<T> {
    const response = await this.fetchFn(
      `${this.baseUrl}${API_PREFIX}${path}`,
      init,
    );
    if (!response.ok) {
      throw await toApiError(response);
    }
    return schema.parse(await response.json());
  }

  private post<T>(schema: z.ZodType<T>, path: string, body: unknown): Promise<T> {
    return this.request(schema, path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listStudies(): Promise<Study[]> {
    return this.request(
      z.object({ studies: z.array(StudySchema) }),
      "/studies",
    ).then((body) => body.studies);
  }

  createStudy(name: string): Promise<Study> {
    return this.post(StudySchema, "/studies", { name });
  }

  listSubjects(studyId: number): Promise<Subject[]> {
    return this.request(
      z.object({ subjects: z.array(SubjectSchema) }),
      `/studies/${studyId}/subjects`,
    ).then((body) => body.subjects);
  }

  createSubject(studyId: number, externalId: string): Promise<Subject> {
    return this.post(SubjectSchema, `/studies/${studyId}/subjects`, {
      external_id: externalId,
    });
  }

  listFiles(subjectId: number): Promise<FileAsset[]> {
    return this.request(
      z.object({ files: z.array(FileSchema) }),
      `/subjects/${subjectId}/files`,
    ).then((body) => body.files);
  }

  uploadFile(file: File, subjectId?: number): Promise<UploadedFile> {
    const form = new FormData();
    form.append("file", file, file.name);
    if (subjectId !== undefined) {
      form.append("subject_id", String(subjectId));
    }
    return this.request(UploadedFileSchema, "/files", {
      method: "POST",
      body: form,
    });
  }

  validateChain(chain: ChainDocument): Promise<ChainValidation> {
    return this.post(ValidationSchema, "/chains/validate", { chain });
  }

  submitJobs(fileIds: number[], chain: ChainDocument): Promise<number[]> {
    return this.post(
      z.object({ job_ids: z.array(z.number()) }),
      "/jobs",
      { file_ids: fileIds, chain },
    ).then((body) => body.job_ids);
  }

  getJob(jobId: number): Promise<Job> {
    return this.request(JobSchema, `/jobs/${jobId}`);
  }

  poolStatus(): Promise<PoolStatus> {
    return this.request(PoolStatusSchema, "/pool/status");
  }

  getSeries(
    fileId: number,
    channel: string,
    opts: { fromMs?: number; toMs?: number; maxPoints?: number } = {},
  ): Promise<Envelope> {
    const params = new URLSearchParams({ channel });
    if (opts.fromMs !== undefined) params.set("from_ms", String(opts.fromMs));
    if (opts.toMs !== undefined) params.set("to_ms", String(opts.toMs));
    if (opts.maxPoints !== undefined) {
      params.set("max_points", String(opts.maxPoints));
    }
    return this.request(EnvelopeSchema, `/files/${fileId}/series?${params}`);
  }

  getAverage(fileId: number, mode = "both"): Promise<number> {
    return this.request(
      z.object({ average_mm: z.number() }),
      `/files/${fileId}/average?mode=${mode}`,
    ).then((body) => body.average_mm);
  }
}
