import type { Snapshot, Topology } from "../src/types.js";

/** Tiny two-triangle scene with a 2x2 taxel grid, enough for unit tests. */
export function makeTopology(): Topology {
  return {
    name: "unit",
    n_vertices: 4,
    triangles: [
      [0, 1, 2],
      [0, 2, 3],
    ],
    cavities: ["c1"],
    material: {
      youngs_modulus_pa: 100000,
      poisson_ratio: 0.3,
      density_kg_m3: 1000,
    },
    grid: {
      rows: 2,
      cols: 2,
      row_pitch_mm: 12,
      col_pitch_mm: 16,
      threshold: 20,
      valid: [
        [1, 1],
        [1, 1],
      ],
    },
  };
}

/** A wire-complete snapshot for the makeTopology scene. */
export function makeSnapshot(frame: number): Snapshot {
  return {
    type: "snapshot",
    frame,
    converged: true,
    vertices: [
      [0, 0, 0],
      [10, 0, 0],
      [10, 10, 0],
      [0, 10, 0],
    ],
    pressures: { c1: 0 },
    volumes: { c1: 1000 },
    grid: [
      [
        [0, 0, 5],
        [0, 16, 5],
      ],
      [
        [12, 0, 5],
        [12, 16, 5],
      ],
    ],
    activation: [
      [0, 0],
      [0, 0],
    ],
    touches: [],
  };
}
