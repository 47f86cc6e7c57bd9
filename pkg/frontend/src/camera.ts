export type Vec3 = [number, number, number];

export interface Ray {
  origin: Vec3;
  dir: Vec3; // unit length
}

const sub = (a: Vec3, b: Vec3): Vec3 => [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
const dot = (a: Vec3, b: Vec3): number => a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
const norm = (a: Vec3): Vec3 => {
  const l = Math.hypot(a[0], a[1], a[2]) || 1;
  return [a[0] / l, a[1] / l, a[2] / l];
};
export const cross = (a: Vec3, b: Vec3): Vec3 => [
  a[1] * b[2] - a[2] * b[1],
  a[2] * b[0] - a[0] * b[2],
  a[0] * b[1] - a[1] * b[0],
];

/**
 * Orbit camera with a hand-rolled perspective projection. z is the world
 * up axis (the scenes stand upright in z). Screen y grows downward.
 */
export class OrbitCamera {
  target: Vec3 = [0, 0, 0];
  distance = 300;
  yaw = -0.5;      // radians around world z
  pitch = 0.25;    // elevation above the horizontal plane
  fovY = Math.PI / 5;
  width = 800;
  height = 600;

  /** Camera position in world space. */
  eye(): Vec3 {
    const cp = Math.cos(this.pitch), sp = Math.sin(this.pitch);
    const cy = Math.cos(this.yaw), sy = Math.sin(this.yaw);
    return [
      this.target[0] + this.distance * cp * cy,
      this.target[1] + this.distance * cp * sy,
      this.target[2] + this.distance * sp,
    ];
  }

  /** Right/up/forward basis; forward points from the eye to the target. */
  basis(): { right: Vec3; up: Vec3; fwd: Vec3 } {
    const fwd = norm(sub(this.target, this.eye()));
    const worldUp: Vec3 = Math.abs(fwd[2]) > 0.999 ? [0, 1, 0] : [0, 0, 1];
    const right = norm(cross(fwd, worldUp));
    const up = cross(right, fwd);
    return { right, up, fwd };
  }

  /**
   * World point to [screenX, screenY, cameraDepth]. Depth is the distance
   * along the view axis; points behind the eye get a negative depth and
   * must not be drawn.
   */
  project(p: Vec3): [number, number, number] {
    const { right, up, fwd } = this.basis();
    const rel = sub(p, this.eye());
    const depth = dot(rel, fwd);
    const f = (0.5 * this.height) / Math.tan(0.5 * this.fovY);
    const x = this.width / 2 + (f * dot(rel, right)) / depth;
    const y = this.height / 2 - (f * dot(rel, up)) / depth;
    return [x, y, depth];
  }

  /** Ray from the eye through a screen pixel, for picking. */
  ray(sx: number, sy: number): Ray {
    const { right, up, fwd } = this.basis();
    const f = (0.5 * this.height) / Math.tan(0.5 * this.fovY);
    const dx = (sx - this.width / 2) / f;
    const dy = (this.height / 2 - sy) / f;
    const dir = norm([
      fwd[0] + dx * right[0] + dy * up[0],
      fwd[1] + dx * right[1] + dy * up[1],
      fwd[2] + dx * right[2] + dy * up[2],
    ]);
    return { origin: this.eye(), dir };
  }

  /** Frame a sphere so it fills most of the viewport. */
  frame(center: Vec3, radius: number): void {
    this.target = center;
    this.distance = (1.6 * radius) / Math.tan(0.5 * this.fovY);
  }
}
