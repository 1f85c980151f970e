/** Axis formatting: recording time as mm:ss, pupil size in mm. */

/** Format a millisecond offset as mm:ss (rounded to whole seconds). */
export function formatTimeMs(ms: number): string {
  const totalSeconds = Math.round(ms / 1000);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

/** Format a pupil size axis label in millimetres. */
export function formatMm(value: number): string {
  return `${value.toFixed(2)} mm`;
}

/** Round a step up to a pleasant 1/2/5 multiple. */
function niceStep(rough: number): number {
  const magnitude = Math.pow(10, Math.floor(Math.log10(rough)));
  const residual = rough / magnitude;
  const factor = residual > 5 ? 10 : residual > 2 ? 5 : residual > 1 ? 2 : 1;
  return factor * magnitude;
}

/** Evenly spaced tick positions covering [lo, hi] on a nice step. */
export function ticks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo) || count < 2) {
    return [lo];
  }
  const step = niceStep((hi - lo) / (count - 1));
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + step / 1e6; v += step) {
    out.push(Number(v.toFixed(9)));
  }
  return out;
}
