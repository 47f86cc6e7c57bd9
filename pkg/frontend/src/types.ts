/** Wire contract with the simulation service, plus snapshot validation. */

export interface GridInfo {
  rows: number;
  cols: number;
  row_pitch_mm: number;
  col_pitch_mm: number;
  threshold: number;
  valid: number[][]; // 1 = wired taxel, 0 = skipped site
}

export interface Topology {
  name: string;
  n_vertices: number;
  triangles: number[][];
  cavities: string[];
  material: {
    youngs_modulus_pa: number;
    poisson_ratio: number;
    density_kg_m3: number;
  };
  grid?: GridInfo; // absent on scenes without a taxel sheet
}

export interface TouchEstimate {
  peak: [number, number];
  pos_rc: [number, number];
  gw2d: [number, number];
  gw3d: [number, number, number];
}

export interface Snapshot {
  type: "snapshot";
  frame: number;
  converged: boolean;
  vertices: number[][];
  pressures: Record<string, number>;
  volumes: Record<string, number>;
  grid?: number[][][];
  activation?: number[][];
  touches?: TouchEstimate[];
}

export type Command =
  | { cmd: "set_pressure"; cavity: string; pa: number }
  | { cmd: "apply_touch"; point: [number, number, number]; strength: number; frames: number }
  | { cmd: "clear_touches" }
  | { cmd: "tip_angle"; deg: number }
  | { cmd: "reset" };

export interface ServerError {
  type: "error";
  message: string;
}

function isRowArray(rows: unknown, width: number): rows is number[][] {
  if (!Array.isArray(rows)) return false;
  for (const row of rows) {
    if (!Array.isArray(row) || row.length !== width) return false;
    for (const x of row) {
      if (typeof x !== "number" || !Number.isFinite(x)) return false;
    }
  }
  return true;
}

/**
 * Validates one decoded server message against the snapshot shape.
 * Returns null (after a console warning) on anything malformed; the
 * stream keeps running on the next frame.
 */
export function parseSnapshot(raw: unknown, topo: Topology): Snapshot | null {
  const warn = (why: string): null => {
    console.warn(`dropping malformed snapshot: ${why}`);
    return null;
  };
  if (typeof raw !== "object" || raw === null) return warn("not an object");
  const msg = raw as Record<string, unknown>;
  if (msg.type !== "snapshot") return warn(`type is ${String(msg.type)}`);
  if (typeof msg.frame !== "number" || !Number.isFinite(msg.frame)) {
    return warn("frame is not a number");
  }
  if (!isRowArray(msg.vertices, 3) || (msg.vertices as number[][]).length !== topo.n_vertices) {
    return warn("vertices do not match topology");
  }
  if (typeof msg.pressures !== "object" || msg.pressures === null) {
    return warn("missing pressures");
  }
  if (topo.grid) {
    const g = msg.grid as unknown[];
    if (!Array.isArray(g) || g.length !== topo.grid.rows) {
      return warn("grid rows do not match topology");
    }
    for (const row of g) {
      if (!isRowArray(row, 3) || (row as number[][]).length !== topo.grid.cols) {
        return warn("grid row shape mismatch");
      }
    }
    const act = msg.activation as unknown[];
    if (!Array.isArray(act) || act.length !== topo.grid.rows) {
      return warn("activation shape mismatch");
    }
    if (!Array.isArray(msg.touches)) return warn("missing touches");
  }
  return msg as unknown as Snapshot;
}
