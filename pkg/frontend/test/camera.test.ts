import { describe, expect, it } from "vitest";
import { OrbitCamera, type Vec3 } from "../src/camera.js";

const pointOnRay = (cam: OrbitCamera, p: Vec3): number => {
  const [sx, sy] = cam.project(p);
  const ray = cam.ray(sx, sy);
  // distance from p to the ray (perpendicular residual)
  const rel: Vec3 = [p[0] - ray.origin[0], p[1] - ray.origin[1], p[2] - ray.origin[2]];
  const t = rel[0] * ray.dir[0] + rel[1] * ray.dir[1] + rel[2] * ray.dir[2];
  return Math.hypot(
    rel[0] - t * ray.dir[0],
    rel[1] - t * ray.dir[1],
    rel[2] - t * ray.dir[2],
  );
};

describe("OrbitCamera", () => {
  it("ray(project(p)) passes back through p", () => {
    const cam = new OrbitCamera();
    cam.target = [10, -5, 40];
    cam.distance = 250;
    cam.yaw = 0.8;
    cam.pitch = 0.35;
    const points: Vec3[] = [
      [0, 0, 0],
      [25, 10, 60],
      [-30, 14, 12],
      [10, -5, 40],
    ];
    for (const p of points) {
      expect(pointOnRay(cam, p)).toBeLessThan(1e-9);
    }
  });

  it("projects the target to the viewport center", () => {
    const cam = new OrbitCamera();
    cam.target = [3, 4, 5];
    const [sx, sy, depth] = cam.project([3, 4, 5]);
    expect(sx).toBeCloseTo(cam.width / 2, 9);
    expect(sy).toBeCloseTo(cam.height / 2, 9);
    expect(depth).toBeCloseTo(cam.distance, 9);
  });

  it("frames a sphere inside the viewport", () => {
    const cam = new OrbitCamera();
    cam.frame([0, 0, 50], 40);
    expect(cam.target).toEqual([0, 0, 50]);
    const [, syTop] = cam.project([0, 0, 90]);
    const [, syBot] = cam.project([0, 0, 10]);
    expect(syTop).toBeGreaterThan(0);
    expect(syBot).toBeLessThan(cam.height);
  });

  it("keeps a stable basis when looking straight down", () => {
    const cam = new OrbitCamera();
    cam.pitch = Math.PI / 2 - 1e-9;
    const { right, up, fwd } = cam.basis();
    for (const v of [right, up, fwd]) {
      expect(Math.hypot(v[0], v[1], v[2])).toBeCloseTo(1, 6);
      for (const x of v) expect(Number.isFinite(x)).toBe(true);
    }
  });
});
