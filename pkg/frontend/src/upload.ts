/**
 * Upload flow. File names shaped subject@study.extension map to a
 * subject automatically; anything else needs an explicit assignment,
 * which the UI must collect before (or after a rejection) retrying.
 */

import { ApiClient, ApiError, UploadedFile } from "./api.js";

export interface FileNameParts {
  subjectId: string;
  study: string;
  extension: string;
}

/** Client-side mirror of the server's naming convention; null = unmapped. */
export function parseFileName(name: string): FileNameParts | null {
  const atCount = name.split("@").length - 1;
  if (atCount !== 1) return null;
  const [subjectId, rest] = name.split("@") as [string, string];
  const dot = rest.lastIndexOf(".");
  if (dot < 0) return null;
  const study = rest.slice(0, dot);
  const extension = rest.slice(dot + 1);
  if (!subjectId || !study || !extension) return null;
  return { subjectId, study, extension };
}

export type UploadOutcome =
  | { status: "uploaded"; file: UploadedFile }
  | { status: "needs_subject"; reason: string };

/**
 * Upload one file. Without an explicit subject the name must conform;
 * a non-conforming name (or a server-side mapping rejection) comes back
 * as needs_subject so the UI can prompt for manual assignment.
 */
export async function uploadWithMapping(
  api: ApiClient,
  file: File,
  subjectId?: number,
): Promise<UploadOutcome> {
  if (subjectId === undefined && parseFileName(file.name) === null) {
    return {
      status: "needs_subject",
      reason:
        `"${file.name}" does not follow subject@study.extension; ` +
        "pick a subject to assign it to",
    };
  }
  try {
    const uploaded = await api.uploadFile(file, subjectId);
    return { status: "uploaded", file: uploaded };
  } catch (e) {
    if (e instanceof ApiError && e.code === "unmapped_filename") {
      return { status: "needs_subject", reason: e.message };
    }
    if (e instanceof ApiError && e.code === "not_found") {
      return { status: "needs_subject", reason: e.message };
    }
    throw e;
  }
}
