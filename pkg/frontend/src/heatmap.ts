export type Rgb = [number, number, number];

/**
 * A taxel sitting exactly at the detection threshold renders as this exact
 * color. Tests and the legend rely on component-for-component equality, so
 * the ramp below never reaches it and the ramp above starts one step past
 * it.
 */
export const THRESHOLD_COLOR: Rgb = [255, 255, 255];

export const COLD_COLOR: Rgb = [16, 28, 58];
export const HOT_COLOR: Rgb = [255, 72, 0];
export const INVALID_COLOR: Rgb = [42, 42, 48];

const mix = (a: Rgb, b: Rgb, t: number): Rgb => [
  Math.round(a[0] + (b[0] - a[0]) * t),
  Math.round(a[1] + (b[1] - a[1]) * t),
  Math.round(a[2] + (b[2] - a[2]) * t),
];

const clamp01 = (x: number): number => (x < 0 ? 0 : x > 1 ? 1 : x);

/**
 * Map one activation count to a display color. Counts below the threshold
 * ramp from COLD_COLOR toward (but never onto) THRESHOLD_COLOR; the
 * threshold itself is THRESHOLD_COLOR exactly; counts above ramp from white
 * into HOT_COLOR, saturating at `span` (default 2.5x threshold).
 */
export const valueToColor = (value: number, threshold: number, span?: number): Rgb => {
  if (value === threshold) {
    return [THRESHOLD_COLOR[0], THRESHOLD_COLOR[1], THRESHOLD_COLOR[2]];
  }
  const top = span ?? threshold * 2.5;
  if (value < threshold) {
    const t = clamp01(threshold > 0 ? value / threshold : 0);
    return mix(COLD_COLOR, THRESHOLD_COLOR, t * 0.92);
  }
  const t = clamp01((value - threshold) / Math.max(top - threshold, 1e-9));
  return mix(THRESHOLD_COLOR, HOT_COLOR, 0.15 + 0.85 * t);
};

export interface HeatmapImage {
  width: number;
  height: number;
  data: Uint8ClampedArray<ArrayBuffer>; // RGBA rows, y down, ready for putImageData
}

/**
 * Rasterize an activation grid into an RGBA buffer, one square per taxel
 * with a one-pixel gutter. Pure function of its arguments so tests can
 * assert on pixels without a canvas.
 */
export function renderHeatmapToBuffer(
  activation: number[][],
  valid: ArrayLike<ArrayLike<number | boolean>>,
  threshold: number,
  cell = 24,
  span?: number,
): HeatmapImage {
  const rows = activation.length;
  const cols = rows > 0 ? activation[0].length : 0;
  const width = cols * cell;
  const height = rows * cell;
  const data = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < rows; i++) {
    for (let j = 0; j < cols; j++) {
      const live = Boolean(valid[i][j]);
      const rgb = live ? valueToColor(activation[i][j], threshold, span) : INVALID_COLOR;
      for (let py = i * cell; py < (i + 1) * cell; py++) {
        const gutterY = py === i * cell || py === (i + 1) * cell - 1;
        for (let px = j * cell; px < (j + 1) * cell; px++) {
          const gutter = gutterY || px === j * cell || px === (j + 1) * cell - 1;
          const o = (py * width + px) * 4;
          if (gutter) {
            data[o] = 10;
            data[o + 1] = 10;
            data[o + 2] = 12;
          } else {
            data[o] = rgb[0];
            data[o + 1] = rgb[1];
            data[o + 2] = rgb[2];
          }
          data[o + 3] = 255;
        }
      }
    }
  }
  return { width, height, data };
}

export interface LegendStop {
  value: number;
  color: Rgb;
  label: string;
}

/** Annotation stops for the color legend next to the taxel panel. */
export function legendStops(threshold: number, span?: number): LegendStop[] {
  const top = span ?? threshold * 2.5;
  const values = [0, threshold / 2, threshold, (threshold + top) / 2, top];
  return values.map((v) => ({
    value: v,
    color: valueToColor(v, threshold, top),
    label: v === threshold ? `${v} (threshold)` : `${Math.round(v)}`,
  }));
}
