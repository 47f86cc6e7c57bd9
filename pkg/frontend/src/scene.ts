import type { Snapshot, Topology } from "./types.js";

/**
 * Client-side mirror of the simulation: immutable topology plus the most
 * recent snapshot. Snapshots apply atomically and only move forward;
 * anything with a stale frame id is discarded so out-of-order delivery
 * can never make the view jump backwards.
 */
export class SceneModel {
  readonly topology: Topology;
  snapshot: Snapshot | null = null;
  lastFrame = 0;

  constructor(topology: Topology) {
    this.topology = topology;
  }

  /** Returns true when the snapshot advanced the model. */
  apply(snap: Snapshot): boolean {
    if (snap.frame <= this.lastFrame) return false;
    this.snapshot = snap;
    this.lastFrame = snap.frame;
    return true;
  }

  vertices(): number[][] {
    return this.snapshot ? this.snapshot.vertices : [];
  }

  /** Mesh centroid of the current frame, the camera's default target. */
  center(): [number, number, number] {
    const v = this.vertices();
    if (v.length === 0) return [0, 0, 0];
    let cx = 0, cy = 0, cz = 0;
    for (const p of v) {
      cx += p[0];
      cy += p[1];
      cz += p[2];
    }
    return [cx / v.length, cy / v.length, cz / v.length];
  }

  /** Half-diagonal of the current bounding box, for camera framing. */
  radius(): number {
    const v = this.vertices();
    if (v.length === 0) return 1;
    const lo = [Infinity, Infinity, Infinity];
    const hi = [-Infinity, -Infinity, -Infinity];
    for (const p of v) {
      for (let k = 0; k < 3; k++) {
        lo[k] = Math.min(lo[k], p[k]);
        hi[k] = Math.max(hi[k], p[k]);
      }
    }
    const dx = hi[0] - lo[0], dy = hi[1] - lo[1], dz = hi[2] - lo[2];
    return 0.5 * Math.hypot(dx, dy, dz) || 1;
  }
}
