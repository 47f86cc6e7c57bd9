import { cross, type Ray, type Vec3 } from "./camera.js";

export interface SurfaceHit {
  point: Vec3;
  triangle: number; // index into the topology triangle list
  t: number;        // distance along the ray
}

const EPS = 1e-9;

/**
 * Moller-Trumbore ray/triangle intersection. Returns the ray parameter t
 * (>= 0) or null on a miss. Hits from either side count: the operator can
 * orbit behind the body.
 */
export function rayTriangle(ray: Ray, a: Vec3, b: Vec3, c: Vec3): number | null {
  const e1: Vec3 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
  const e2: Vec3 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
  const p = cross(ray.dir, e2);
  const det = e1[0] * p[0] + e1[1] * p[1] + e1[2] * p[2];
  if (Math.abs(det) < EPS) return null;
  const inv = 1 / det;
  const s: Vec3 = [ray.origin[0] - a[0], ray.origin[1] - a[1], ray.origin[2] - a[2]];
  const u = (s[0] * p[0] + s[1] * p[1] + s[2] * p[2]) * inv;
  if (u < 0 || u > 1) return null;
  const q = cross(s, e1);
  const v = (ray.dir[0] * q[0] + ray.dir[1] * q[1] + ray.dir[2] * q[2]) * inv;
  if (v < 0 || u + v > 1) return null;
  const t = (e2[0] * q[0] + e2[1] * q[1] + e2[2] * q[2]) * inv;
  return t >= EPS ? t : null;
}

/**
 * Nearest intersection of a pick ray with the current surface. A miss
 * returns null and the click is a no-op.
 */
export function pickSurface(
  ray: Ray,
  vertices: number[][],
  triangles: number[][],
): SurfaceHit | null {
  let best: SurfaceHit | null = null;
  for (let k = 0; k < triangles.length; k++) {
    const tri = triangles[k];
    const t = rayTriangle(
      ray,
      vertices[tri[0]] as Vec3,
      vertices[tri[1]] as Vec3,
      vertices[tri[2]] as Vec3,
    );
    if (t !== null && (best === null || t < best.t)) {
      best = {
        t,
        triangle: k,
        point: [
          ray.origin[0] + t * ray.dir[0],
          ray.origin[1] + t * ray.dir[1],
          ray.origin[2] + t * ray.dir[2],
        ],
      };
    }
  }
  return best;
}
