import { describe, expect, it } from "vitest";
import {
  INVALID_COLOR,
  legendStops,
  renderHeatmapToBuffer,
  THRESHOLD_COLOR,
  valueToColor,
} from "../src/heatmap.js";

const THRESHOLD = 20;

describe("valueToColor", () => {
  it("returns the threshold color exactly at the threshold", () => {
    expect(valueToColor(THRESHOLD, THRESHOLD)).toEqual(THRESHOLD_COLOR);
  });

  it("never returns the threshold color off the threshold", () => {
    for (const v of [0, 5, 19, 19.999, 20.001, 21, 35, 50, 500, -10]) {
      expect(valueToColor(v, THRESHOLD)).not.toEqual(THRESHOLD_COLOR);
    }
  });

  it("is monotone dark to bright below the threshold", () => {
    const lum = (v: number): number => {
      const [r, g, b] = valueToColor(v, THRESHOLD);
      return r + g + b;
    };
    expect(lum(0)).toBeLessThan(lum(10));
    expect(lum(10)).toBeLessThan(lum(19));
  });

  it("separates below, at, and above threshold", () => {
    const below = valueToColor(18, THRESHOLD);
    const at = valueToColor(20, THRESHOLD);
    const above = valueToColor(30, THRESHOLD);
    expect(below).not.toEqual(at);
    expect(above).not.toEqual(at);
    expect(above).not.toEqual(below);
  });
});

describe("renderHeatmapToBuffer", () => {
  const activation = [
    [0, THRESHOLD],
    [45, 3],
  ];
  const valid = [
    [1, 1],
    [1, 0],
  ];

  const pixel = (img: { width: number; data: Uint8ClampedArray },
                 x: number, y: number): number[] => {
    const o = (y * img.width + x) * 4;
    return [img.data[o], img.data[o + 1], img.data[o + 2], img.data[o + 3]];
  };

  it("paints the threshold cell with the exact threshold color", () => {
    const cell = 8;
    const img = renderHeatmapToBuffer(activation, valid, THRESHOLD, cell);
    expect(img.width).toBe(2 * cell);
    expect(img.height).toBe(2 * cell);
    // center of cell (0, 1), which holds the threshold value
    const p = pixel(img, cell + cell / 2, cell / 2);
    expect(p).toEqual([...THRESHOLD_COLOR, 255]);
  });

  it("paints invalid cells with the invalid color regardless of value", () => {
    const img = renderHeatmapToBuffer(activation, valid, THRESHOLD, 8);
    expect(pixel(img, 12, 12)).toEqual([...INVALID_COLOR, 255]);
  });

  it("gives hot and cold cells distinct colors", () => {
    const img = renderHeatmapToBuffer(activation, valid, THRESHOLD, 8);
    const cold = pixel(img, 4, 4);   // value 0
    const hot = pixel(img, 4, 12);   // value 45
    expect(hot).not.toEqual(cold);
    expect(hot[0]).toBeGreaterThan(cold[0]); // hot ramp is red-heavy
  });
});

describe("legendStops", () => {
  it("labels the threshold stop and colors it exactly", () => {
    const stops = legendStops(THRESHOLD);
    const at = stops.find((s) => s.value === THRESHOLD);
    expect(at).toBeDefined();
    expect(at!.color).toEqual(THRESHOLD_COLOR);
    expect(at!.label).toContain("threshold");
    expect(stops.length).toBeGreaterThanOrEqual(3);
  });
});
