import type { OrbitCamera, Vec3 } from "./camera.js";
import type { SceneModel } from "./scene.js";

/**
 * The slice of CanvasRenderingContext2D the painter uses. Narrow on
 * purpose: tests can hand in a recording stub instead of a real canvas.
 */
export interface Draw2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
}

const BACKGROUND = "#10141a";
const BODY_RGB: Vec3 = [96, 138, 170];
const LIGHT: Vec3 = normalize([0.32, -0.42, 0.85]);
const NEAR = 1e-3;

function normalize(v: Vec3): Vec3 {
  const l = Math.hypot(v[0], v[1], v[2]) || 1;
  return [v[0] / l, v[1] / l, v[2] / l];
}

interface DrawnTri {
  depth: number;
  sx: [number, number, number];
  sy: [number, number, number];
  shade: number;
}

/**
 * Paint the current frame: depth-sorted flat-shaded surface triangles,
 * taxel anchor dots, weighted-estimate markers, and the last pick point.
 * Pure painter over Draw2D; all state lives in the model and camera.
 */
export function renderScene(
  ctx: Draw2D,
  cam: OrbitCamera,
  model: SceneModel,
  pick: Vec3 | null = null,
): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = BACKGROUND;
  ctx.fillRect(0, 0, cam.width, cam.height);
  const snap = model.snapshot;
  if (snap === null) return;

  const verts = snap.vertices;
  const tris = model.topology.triangles;
  const projected: [number, number, number][] = new Array(verts.length);
  for (let i = 0; i < verts.length; i++) {
    projected[i] = cam.project(verts[i] as Vec3);
  }

  const drawn: DrawnTri[] = [];
  for (const tri of tris) {
    const pa = projected[tri[0]], pb = projected[tri[1]], pc = projected[tri[2]];
    if (pa[2] < NEAR || pb[2] < NEAR || pc[2] < NEAR) continue;
    const a = verts[tri[0]], b = verts[tri[1]], c = verts[tri[2]];
    const u: Vec3 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    const v: Vec3 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    const n = normalize([
      u[1] * v[2] - u[2] * v[1],
      u[2] * v[0] - u[0] * v[2],
      u[0] * v[1] - u[1] * v[0],
    ]);
    const lambert = Math.abs(n[0] * LIGHT[0] + n[1] * LIGHT[1] + n[2] * LIGHT[2]);
    drawn.push({
      depth: (pa[2] + pb[2] + pc[2]) / 3,
      sx: [pa[0], pb[0], pc[0]],
      sy: [pa[1], pb[1], pc[1]],
      shade: 0.3 + 0.7 * lambert,
    });
  }
  drawn.sort((p, q) => q.depth - p.depth);

  for (const t of drawn) {
    const col = `rgb(${Math.round(BODY_RGB[0] * t.shade)},${Math.round(
      BODY_RGB[1] * t.shade)},${Math.round(BODY_RGB[2] * t.shade)})`;
    ctx.fillStyle = col;
    ctx.strokeStyle = col; // sealing stroke hides hairline seams between fills
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(t.sx[0], t.sy[0]);
    ctx.lineTo(t.sx[1], t.sy[1]);
    ctx.lineTo(t.sx[2], t.sy[2]);
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }

  drawAnchors(ctx, cam, model);
  drawEstimates(ctx, cam, model);
  if (pick !== null) {
    marker(ctx, cam, pick, 4, "#53d769");
  }
}

function drawAnchors(ctx: Draw2D, cam: OrbitCamera, model: SceneModel): void {
  const snap = model.snapshot;
  const grid = model.topology.grid;
  if (!snap?.grid || !grid) return;
  ctx.fillStyle = "rgba(255,255,255,0.55)";
  for (let i = 0; i < grid.rows; i++) {
    for (let j = 0; j < grid.cols; j++) {
      if (!grid.valid[i][j]) continue;
      const [sx, sy, depth] = cam.project(snap.grid[i][j] as Vec3);
      if (depth < NEAR) continue;
      ctx.beginPath();
      ctx.arc(sx, sy, 1.6, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}

function drawEstimates(ctx: Draw2D, cam: OrbitCamera, model: SceneModel): void {
  const snap = model.snapshot;
  if (!snap?.touches) return;
  for (const t of snap.touches) {
    marker(ctx, cam, t.gw3d as Vec3, 6, "#ff5048");
  }
}

function marker(ctx: Draw2D, cam: OrbitCamera, p: Vec3, r: number, color: string): void {
  const [sx, sy, depth] = cam.project(p);
  if (depth < NEAR) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(sx, sy, r, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(sx - r - 3, sy);
  ctx.lineTo(sx + r + 3, sy);
  ctx.moveTo(sx, sy - r - 3);
  ctx.lineTo(sx, sy + r + 3);
  ctx.stroke();
}
