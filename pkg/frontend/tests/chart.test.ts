import { describe, expect, it } from "vitest";

import {
  CLEANED_COLOR,
  RAW_COLOR,
  bandSegments,
  renderChart,
} from "../src/chart.js";
import { bucket, envelope } from "./helpers.js";

const raw = envelope("pupil_left", [
  bucket(0, 1000, 3.0, 3.4),
  bucket(1000, 2000, 2.9, 3.5),
  bucket(2000, 3000, 3.1, 3.3),
]);

const cleaned = envelope("pupil_left", [
  bucket(0, 1000, 3.1, 3.2),
  bucket(1000, 2000, 3.1, 3.3),
  bucket(2000, 3000, 3.15, 3.25),
]);

describe("bandSegments", () => {
  it("splits the band at empty buckets", () => {
    const segments = bandSegments([
      bucket(0, 1, 1, 2),
      bucket(1, 2, null, null),
      bucket(2, 3, 1.5, 2.5),
      bucket(3, 4, 1.4, 2.4),
    ]);
    expect(segments.map((s) => s.length)).toEqual([1, 2]);
  });

  it("returns nothing for a fully empty window", () => {
    expect(bandSegments([bucket(0, 1, null, null)])).toEqual([]);
  });
});

describe("renderChart", () => {
  it("draws the raw series in blue and the cleaned series in red", () => {
    const svg = renderChart(raw, cleaned);
    expect(svg).toContain(`fill="${RAW_COLOR}"`);
    expect(svg).toContain(`stroke="${RAW_COLOR}"`);
    expect(svg).toContain(`stroke="${CLEANED_COLOR}"`);
    expect(svg).toContain('data-series="raw"');
    expect(svg).toContain('data-series="cleaned"');
  });

  it("labels the x axis as mm:ss and the y axis in mm", () => {
    const svg = renderChart(raw);
    expect(svg).toMatch(/>\d+:\d{2}</);
    expect(svg).toMatch(/>\d+\.\d{2} mm</);
  });

  it("renders a raw-only chart without a cleaned legend entry", () => {
    const svg = renderChart(raw);
    expect(svg).toContain(">raw<");
    expect(svg).not.toContain(">cleaned<");
  });

  it("keeps gaps visible as separate band segments", () => {
    const gappy = envelope("pupil_left", [
      bucket(0, 1000, 3.0, 3.4),
      bucket(1000, 2000, null, null),
      bucket(2000, 3000, 3.1, 3.3),
    ]);
    const svg = renderChart(gappy);
    const bands = svg.match(/class="band"/g) ?? [];
    expect(bands).toHaveLength(2);
  });

  it("is valid standalone SVG markup", () => {
    const svg = renderChart(raw, cleaned);
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.endsWith("</svg>")).toBe(true);
    expect(svg).toContain('xmlns="http://www.w3.org/2000/svg"');
  });
});
