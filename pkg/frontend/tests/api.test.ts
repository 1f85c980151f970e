import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { clientFor } from "./helpers.js";

describe("ApiClient", () => {
  it("lists studies", async () => {
    const { api } = clientFor({
      "GET /api/v1/studies": {
        body: {
          studies: [{ study_id: 1, name: "pilot", created_at: 1700000000 }],
        },
      },
    });
    const studies = await api.listStudies();
    expect(studies).toHaveLength(1);
    expect(studies[0]?.name).toBe("pilot");
  });

  it("surfaces structured errors with their code", async () => {
    const { api } = clientFor({
      "GET /api/v1/jobs/9": {
        status: 404,
        body: { error: { code: "not_found", message: "no job 9" } },
      },
    });
    const err = await api.getJob(9).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.code).toBe("not_found");
    expect(err.message).toBe("no job 9");
  });

  it("rejects payloads that do not match the contract", async () => {
    const { api } = clientFor({
      "GET /api/v1/pool/status": {
        body: { max_workers: "eleven", active: 0, queued: 0 },
      },
    });
    await expect(api.poolStatus()).rejects.toThrow();
  });

  it("builds series query parameters", async () => {
    const { api, calls } = clientFor({
      "GET /api/v1/files/3/series?channel=pupil_left&from_ms=0&to_ms=1000&max_points=100":
        {
          body: {
            channel: "pupil_left",
            from_ms: 0,
            to_ms: 1000,
            total_samples: 300,
            buckets: [],
          },
        },
    });
    const env = await api.getSeries(3, "pupil_left", {
      fromMs: 0,
      toMs: 1000,
      maxPoints: 100,
    });
    expect(env.total_samples).toBe(300);
    expect(calls[0]?.url).toContain("max_points=100");
  });

  it("submits jobs with the chain document", async () => {
    const { api, calls } = clientFor({
      "POST /api/v1/jobs": { body: { job_ids: [4, 5] } },
    });
    const ids = await api.submitJobs([1, 2], {
      filters: [{ kind: "pupil_substitution" }],
    });
    expect(ids).toEqual([4, 5]);
    const sent = JSON.parse(String(calls[0]?.init?.body));
    expect(sent.file_ids).toEqual([1, 2]);
    expect(sent.chain.filters[0].kind).toBe("pupil_substitution");
  });

  it("reads the average in mm", async () => {
    const { api } = clientFor({
      "GET /api/v1/files/2/average?mode=left": {
        body: { file_id: 2, mode: "left", average_mm: 3.75 },
      },
    });
    expect(await api.getAverage(2, "left")).toBe(3.75);
  });
});
