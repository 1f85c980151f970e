/**
 * SVG envelope chart. Renders one or two series as filled min/max bands
 * with a center line: the raw series in blue, the cleaned series in red.
 * Emits an SVG string so rendering is testable without a DOM.
 */

import type { Bucket, Envelope } from "./api.js";
import { formatMm, formatTimeMs, ticks } from "./format.js";

export const RAW_COLOR = "#1f6fd6";
export const CLEANED_COLOR = "#d63a2f";

export interface ChartOptions {
  width: number;
  height: number;
  marginLeft: number;
  marginBottom: number;
  marginTop: number;
  marginRight: number;
}

export const DEFAULT_OPTIONS: ChartOptions = {
  width: 900,
  height: 360,
  marginLeft: 64,
  marginBottom: 28,
  marginTop: 12,
  marginRight: 12,
};

interface Extent {
  lo: number;
  hi: number;
}

function valueExtent(envelopes: Envelope[]): Extent {
  let lo = Infinity;
  let hi = -Infinity;
  for (const env of envelopes) {
    for (const b of env.buckets) {
      if (b.min !== null && b.min < lo) lo = b.min;
      if (b.max !== null && b.max > hi) hi = b.max;
    }
  }
  if (!isFinite(lo)) {
    lo = 0;
    hi = 1;
  } else if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return { lo, hi };
}

/**
 * Band outline for the present buckets: the top edge walks the maxima
 * left to right, the bottom edge walks the minima back. Empty buckets
 * break the band into separate segments so gaps stay visible.
 */
export function bandSegments(buckets: Bucket[]): Bucket[][] {
  const segments: Bucket[][] = [];
  let current: Bucket[] = [];
  for (const b of buckets) {
    if (b.empty) {
      if (current.length > 0) segments.push(current);
      current = [];
    } else {
      current.push(b);
    }
  }
  if (current.length > 0) segments.push(current);
  return segments;
}

function bandPath(
  segment: Bucket[],
  x: (ms: number) => number,
  y: (v: number) => number,
): string {
  const mid = (b: Bucket) => (b.start_ms + b.end_ms) / 2;
  const top = segment.map(
    (b, i) => `${i === 0 ? "M" : "L"}${x(mid(b)).toFixed(2)},` +
      `${y(b.max as number).toFixed(2)}`,
  );
  const bottom = [...segment].reverse().map(
    (b) => `L${x(mid(b)).toFixed(2)},${y(b.min as number).toFixed(2)}`,
  );
  return `${top.join(" ")} ${bottom.join(" ")} Z`;
}

function seriesMarkup(
  env: Envelope,
  color: string,
  label: string,
  x: (ms: number) => number,
  y: (v: number) => number,
): string {
  const parts: string[] = [];
  for (const segment of bandSegments(env.buckets)) {
    parts.push(
      `<path class="band" data-series="${label}" fill="${color}" ` +
        `fill-opacity="0.25" stroke="none" d="${bandPath(segment, x, y)}"/>`,
    );
    const line = segment
      .map((b, i) => {
        const mid = (b.start_ms + b.end_ms) / 2;
        const center = ((b.min as number) + (b.max as number)) / 2;
        return `${i === 0 ? "M" : "L"}${x(mid).toFixed(2)},` +
          `${y(center).toFixed(2)}`;
      })
      .join(" ");
    parts.push(
      `<path class="center" data-series="${label}" fill="none" ` +
        `stroke="${color}" stroke-width="1.5" d="${line}"/>`,
    );
  }
  return parts.join("\n");
}

/** Render raw (blue) and optional cleaned (red) envelopes as one SVG. */
export function renderChart(
  raw: Envelope,
  cleaned: Envelope | null = null,
  options: ChartOptions = DEFAULT_OPTIONS,
): string {
  const { width, height, marginLeft, marginRight, marginTop, marginBottom } =
    options;
  const innerWidth = width - marginLeft - marginRight;
  const innerHeight = height - marginTop - marginBottom;
  const envelopes = cleaned ? [raw, cleaned] : [raw];
  const { lo, hi } = valueExtent(envelopes);
  const fromMs = Math.min(...envelopes.map((e) => e.from_ms));
  const toMs = Math.max(...envelopes.map((e) => e.to_ms));

  const x = (ms: number) =>
    marginLeft + ((ms - fromMs) / (toMs - fromMs)) * innerWidth;
  const y = (v: number) =>
    marginTop + (1 - (v - lo) / (hi - lo)) * innerHeight;

  const xTicks = ticks(fromMs, toMs, 8)
    .map(
      (ms) =>
        `<g class="x-tick" transform="translate(${x(ms).toFixed(2)},0)">` +
        `<line y1="${marginTop}" y2="${height - marginBottom}" ` +
        `stroke="#ddd"/>` +
        `<text y="${height - 8}" text-anchor="middle" font-size="11">` +
        `${formatTimeMs(ms)}</text></g>`,
    )
    .join("\n");

  const yTicks = ticks(lo, hi, 6)
    .map(
      (v) =>
        `<g class="y-tick" transform="translate(0,${y(v).toFixed(2)})">` +
        `<line x1="${marginLeft}" x2="${width - marginRight}" ` +
        `stroke="#eee"/>` +
        `<text x="${marginLeft - 6}" dy="4" text-anchor="end" ` +
        `font-size="11">${formatMm(v)}</text></g>`,
    )
    .join("\n");

  const series = [seriesMarkup(raw, RAW_COLOR, "raw", x, y)];
  if (cleaned) {
    series.push(seriesMarkup(cleaned, CLEANED_COLOR, "cleaned", x, y));
  }

  const legend =
    `<g class="legend" transform="translate(${marginLeft + 8},${marginTop + 14})">` +
    `<rect width="10" height="10" fill="${RAW_COLOR}"/>` +
    `<text x="14" dy="9" font-size="11">raw</text>` +
    (cleaned
      ? `<rect y="16" width="10" height="10" fill="${CLEANED_COLOR}"/>` +
        `<text x="14" y="16" dy="9" font-size="11">cleaned</text>`
      : "") +
    `</g>`;

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `width="${width}" height="${height}" role="img" ` +
    `aria-label="pupil series ${raw.channel}">\n` +
    `${xTicks}\n${yTicks}\n${series.join("\n")}\n${legend}\n</svg>`
  );
}
