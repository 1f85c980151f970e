/**
 * Chain builder state: an ordered list of filter cards, kept in sync
 * with the server-side dry-run validation. Submission is blocked while
 * any error-level finding is outstanding.
 */

import type { ApiClient, ChainDocument, Finding } from "./api.js";

export const FILTER_KINDS = [
  "pupil_substitution",
  "gaze_substitution",
  "blink_detection",
  "standard_deviation",
  "linear_interpolation",
  "butterworth",
] as const;

export type FilterKind = (typeof FILTER_KINDS)[number];

export interface FilterCard {
  kind: FilterKind;
  parameters?: Record<string, unknown>;
}

export class ChainBuilder {
  private cards: FilterCard[] = [];
  private findings: Finding[] = [];
  private validated = false;

  constructor(private readonly api: ApiClient) {}

  get chain(): FilterCard[] {
    return [...this.cards];
  }

  get currentFindings(): Finding[] {
    return [...this.findings];
  }

  get hasErrors(): boolean {
    return this.findings.some((f) => f.severity === "error");
  }

  /** True only after a validation round-trip with no error findings. */
  get canSubmit(): boolean {
    return this.validated && this.cards.length > 0 && !this.hasErrors;
  }

  toDocument(): ChainDocument {
    return {
      filters: this.cards.map((c) =>
        c.parameters ? { kind: c.kind, parameters: c.parameters } : { kind: c.kind },
      ),
    };
  }

  add(kind: FilterKind, parameters?: Record<string, unknown>): void {
    this.cards.push(parameters ? { kind, parameters } : { kind });
    this.invalidate();
  }

  remove(index: number): void {
    if (index < 0 || index >= this.cards.length) {
      throw new RangeError(`no filter at position ${index}`);
    }
    this.cards.splice(index, 1);
    this.invalidate();
  }

  move(from: number, to: number): void {
    const bound = this.cards.length;
    if (from < 0 || from >= bound || to < 0 || to >= bound) {
      throw new RangeError(`cannot move ${from} -> ${to}`);
    }
    const [card] = this.cards.splice(from, 1);
    this.cards.splice(to, 0, card as FilterCard);
    this.invalidate();
  }

  loadRecommended(): void {
    this.cards = FILTER_KINDS.map((kind) => ({ kind }));
    this.invalidate();
  }

  private invalidate(): void {
    this.validated = false;
    this.findings = [];
  }

  /** Dry-run the chain server-side; findings drive the inline banner. */
  async validate(): Promise<Finding[]> {
    const result = await this.api.validateChain(this.toDocument());
    this.findings = result.findings;
    this.validated = true;
    return this.currentFindings;
  }

  /** Submit jobs for the given files; refuses while errors stand. */
  async submit(fileIds: number[]): Promise<number[]> {
    if (!this.validated) {
      await this.validate();
    }
    if (!this.canSubmit) {
      throw new Error("chain has unresolved error findings; fix them first");
    }
    return this.api.submitJobs(fileIds, this.toDocument());
  }
}
