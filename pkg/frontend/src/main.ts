/**
 * Page wiring: study/subject browsing, upload with manual-assignment
 * fallback, chain building with inline findings, job polling and the
 * raw/cleaned chart overlay.
 */

import { ApiClient, Envelope, FileAsset } from "./api.js";
import { ChainBuilder, FILTER_KINDS, FilterKind } from "./chainBuilder.js";
import { renderChart } from "./chart.js";
import { uploadWithMapping } from "./upload.js";

const api = new ApiClient();
const builder = new ChainBuilder(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let selectedSubject: number | null = null;
let rawFile: FileAsset | null = null;
let cleanedFile: FileAsset | null = null;

async function refreshStudies(): Promise<void> {
  const studies = await api.listStudies();
  const select = el<HTMLSelectElement>("study-select");
  select.innerHTML = studies
    .map((s) => `<option value="${s.study_id}">${s.name}</option>`)
    .join("");
  if (studies.length > 0) {
    await refreshSubjects(Number(select.value));
  }
}

async function refreshSubjects(studyId: number): Promise<void> {
  const subjects = await api.listSubjects(studyId);
  const select = el<HTMLSelectElement>("subject-select");
  select.innerHTML = subjects
    .map((s) => `<option value="${s.subject_id}">${s.external_id}</option>`)
    .join("");
  selectedSubject = subjects.length > 0 ? Number(select.value) : null;
  await refreshFiles();
}

async function refreshFiles(): Promise<void> {
  const list = el<HTMLUListElement>("file-list");
  if (selectedSubject === null) {
    list.innerHTML = "";
    return;
  }
  const files = await api.listFiles(selectedSubject);
  list.innerHTML = files
    .map(
      (f) =>
        `<li><button data-file="${f.file_id}" data-kind="${f.kind}">` +
        `${f.original_filename} (${f.kind})</button></li>`,
    )
    .join("");
  for (const button of list.querySelectorAll("button")) {
    button.addEventListener("click", () => {
      const id = Number(button.dataset.file);
      const chosen = files.find((f) => f.file_id === id) ?? null;
      if (!chosen) return;
      if (chosen.kind === "cleaned") {
        cleanedFile = chosen;
      } else {
        rawFile = chosen;
      }
      void drawChart();
    });
  }
}

async function loadEnvelope(file: FileAsset | null): Promise<Envelope | null> {
  if (!file) return null;
  const channel = el<HTMLSelectElement>("channel-select").value;
  try {
    return await api.getSeries(file.file_id, channel, { maxPoints: 1600 });
  } catch {
    return null;
  }
}

async function drawChart(): Promise<void> {
  const raw = await loadEnvelope(rawFile);
  const cleaned = await loadEnvelope(cleanedFile);
  const pane = el<HTMLDivElement>("chart-pane");
  if (!raw && !cleaned) {
    pane.innerHTML = "<p>select a compressed file to inspect</p>";
    return;
  }
  pane.innerHTML = renderChart((raw ?? cleaned)!, raw ? cleaned : null);
}

function renderFindings(): void {
  const banner = el<HTMLDivElement>("findings");
  banner.innerHTML = builder.currentFindings
    .map(
      (f) =>
        `<p class="finding ${f.severity}">${f.severity}: ${f.message}</p>`,
    )
    .join("");
  el<HTMLButtonElement>("submit-jobs").disabled = !builder.canSubmit;
}

function renderChain(): void {
  const list = el<HTMLOListElement>("chain-list");
  list.innerHTML = builder.chain
    .map(
      (card, i) =>
        `<li>${card.kind} ` +
        `<button data-move="${i}:-1">up</button>` +
        `<button data-move="${i}:1">down</button>` +
        `<button data-remove="${i}">remove</button></li>`,
    )
    .join("");
  for (const button of list.querySelectorAll("button")) {
    button.addEventListener("click", async () => {
      if (button.dataset.remove !== undefined) {
        builder.remove(Number(button.dataset.remove));
      } else if (button.dataset.move) {
        const [from, delta] = button.dataset.move.split(":").map(Number) as [
          number,
          number,
        ];
        const to = from + delta;
        if (to >= 0 && to < builder.chain.length) builder.move(from, to);
      }
      renderChain();
      await builder.validate();
      renderFindings();
    });
  }
}

async function pollPool(): Promise<void> {
  try {
    const status = await api.poolStatus();
    el<HTMLSpanElement>("pool-status").textContent =
      `${status.active} running, ${status.queued} queued ` +
      `(${status.max_workers} workers)`;
  } catch {
    el<HTMLSpanElement>("pool-status").textContent = "service unreachable";
  }
}

function wire(): void {
  el<HTMLSelectElement>("study-select").addEventListener("change", (e) => {
    void refreshSubjects(Number((e.target as HTMLSelectElement).value));
  });
  el<HTMLSelectElement>("subject-select").addEventListener("change", (e) => {
    selectedSubject = Number((e.target as HTMLSelectElement).value);
    void refreshFiles();
  });
  el<HTMLSelectElement>("channel-select").addEventListener("change", () => {
    void drawChart();
  });

  const kindSelect = el<HTMLSelectElement>("filter-kind");
  kindSelect.innerHTML = FILTER_KINDS.map(
    (k) => `<option value="${k}">${k}</option>`,
  ).join("");
  el<HTMLButtonElement>("add-filter").addEventListener("click", async () => {
    builder.add(kindSelect.value as FilterKind);
    renderChain();
    await builder.validate();
    renderFindings();
  });
  el<HTMLButtonElement>("load-recommended").addEventListener(
    "click",
    async () => {
      builder.loadRecommended();
      renderChain();
      await builder.validate();
      renderFindings();
    },
  );
  el<HTMLButtonElement>("submit-jobs").addEventListener("click", async () => {
    if (!rawFile) return;
    const jobIds = await builder.submit([rawFile.file_id]);
    el<HTMLSpanElement>("job-status").textContent =
      `submitted job ${jobIds.join(", ")}`;
  });

  el<HTMLFormElement>("upload-form").addEventListener("submit", async (e) => {
    e.preventDefault();
    const input = el<HTMLInputElement>("upload-input");
    const file = input.files?.[0];
    if (!file) return;
    const manual = el<HTMLInputElement>("upload-subject").value;
    const outcome = await uploadWithMapping(
      api,
      file,
      manual ? Number(manual) : undefined,
    );
    el<HTMLSpanElement>("upload-status").textContent =
      outcome.status === "uploaded"
        ? `stored as file ${outcome.file.file_id}`
        : outcome.reason;
    await refreshFiles();
  });

  setInterval(() => void pollPool(), 2000);
  void pollPool();
  void refreshStudies();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  wire();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", wire);
}
