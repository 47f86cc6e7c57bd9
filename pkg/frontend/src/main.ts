import { OrbitCamera, type Vec3 } from "./camera.js";
import { fetchTopology, TwinClient, type ConnectionState } from "./client.js";
import { buildControls } from "./controls.js";
import { legendStops, renderHeatmapToBuffer } from "./heatmap.js";
import { pickSurface } from "./pick.js";
import { renderScene } from "./render.js";
import { SceneModel } from "./scene.js";
import type { Snapshot } from "./types.js";

const HEATMAP_CELL = 26;
const TOUCH_HOLD_FRAMES = 60;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function fmt(x: number, digits = 1): string {
  return x.toFixed(digits);
}

async function start(): Promise<void> {
  const view = el<HTMLCanvasElement>("view");
  const heat = el<HTMLCanvasElement>("heatmap");
  const statusEl = el<HTMLElement>("status");
  const touchesEl = el<HTMLElement>("touches");
  const legendEl = el<HTMLElement>("legend");
  const controlsEl = el<HTMLElement>("controls");

  statusEl.textContent = "loading scene";
  const base = window.location.origin;
  const topo = await fetchTopology(base);
  const model = new SceneModel(topo);
  const cam = new OrbitCamera();
  const ctx = view.getContext("2d");
  if (ctx === null) throw new Error("canvas 2d context unavailable");

  let dirty = true;
  let framed = false;
  let lastPick: Vec3 | null = null;
  let connection: ConnectionState = "connecting";

  const resize = (): void => {
    view.width = view.clientWidth;
    view.height = view.clientHeight;
    cam.width = view.width;
    cam.height = view.height;
    dirty = true;
  };
  window.addEventListener("resize", resize);
  resize();

  if (topo.grid) {
    heat.width = topo.grid.cols * HEATMAP_CELL;
    heat.height = topo.grid.rows * HEATMAP_CELL;
    for (const stop of legendStops(topo.grid.threshold)) {
      const chip = document.createElement("span");
      chip.className = "chip";
      chip.style.background = `rgb(${stop.color[0]},${stop.color[1]},${stop.color[2]})`;
      const item = document.createElement("span");
      item.className = "legend-item";
      item.append(chip, document.createTextNode(stop.label));
      legendEl.append(item);
    }
  } else {
    heat.style.display = "none";
    legendEl.textContent = "scene has no taxel sheet";
  }

  const wsUrl = base.replace(/^http/, "ws") + "/ws";
  const client = new TwinClient(wsUrl, model);

  client.onState = (state) => {
    connection = state;
    dirty = true;
  };
  client.onServerError = (message) => {
    statusEl.textContent = `server rejected command: ${message}`;
  };
  client.onSnapshot = (snap) => {
    if (!framed) {
      cam.frame(model.center(), model.radius());
      framed = true;
    }
    updatePanels(snap);
    dirty = true;
  };

  const heatCtx = heat.getContext("2d");

  const updatePanels = (snap: Snapshot): void => {
    const volumes = Object.entries(snap.volumes)
      .map(([name, v]) => `${name} ${fmt(v, 0)} mm3`)
      .join(", ");
    const pressures = Object.entries(snap.pressures)
      .map(([name, pa]) => `${name} ${fmt(pa, 0)} Pa`)
      .join(", ");
    statusEl.textContent =
      `${connection} | frame ${snap.frame} | ` +
      `${snap.converged ? "converged" : "NOT CONVERGED"} | ` +
      `${pressures} | ${volumes}`;

    if (snap.touches && snap.touches.length > 0) {
      touchesEl.textContent = snap.touches
        .map((t) =>
          `peak (${t.peak[0]}, ${t.peak[1]})  ` +
          `gw (${fmt(t.gw3d[0])}, ${fmt(t.gw3d[1])}, ${fmt(t.gw3d[2])}) mm`)
        .join("\n");
    } else {
      touchesEl.textContent = "no touches detected";
    }

    if (heatCtx && snap.activation && topo.grid) {
      const img = renderHeatmapToBuffer(
        snap.activation, topo.grid.valid, topo.grid.threshold, HEATMAP_CELL);
      heatCtx.putImageData(new ImageData(img.data, img.width, img.height), 0, 0);
    }
  };

  buildControls(controlsEl, topo, client);
  client.connect();

  // drag orbits, wheel zooms, a sub-4px click picks a touch point
  let drag: { x: number; y: number; yaw: number; pitch: number; moved: boolean } | null = null;
  view.addEventListener("pointerdown", (ev) => {
    drag = { x: ev.offsetX, y: ev.offsetY, yaw: cam.yaw, pitch: cam.pitch, moved: false };
    view.setPointerCapture(ev.pointerId);
  });
  view.addEventListener("pointermove", (ev) => {
    if (drag === null) return;
    const dx = ev.offsetX - drag.x;
    const dy = ev.offsetY - drag.y;
    if (Math.hypot(dx, dy) > 4) drag.moved = true;
    if (drag.moved) {
      cam.yaw = drag.yaw - dx * 0.008;
      cam.pitch = Math.min(1.45, Math.max(-1.45, drag.pitch + dy * 0.008));
      dirty = true;
    }
  });
  view.addEventListener("pointerup", (ev) => {
    const wasClick = drag !== null && !drag.moved;
    drag = null;
    if (!wasClick) return;
    const hit = pickSurface(cam.ray(ev.offsetX, ev.offsetY),
                            model.vertices(), topo.triangles);
    if (hit === null) return;
    lastPick = hit.point;
    client.send({
      cmd: "apply_touch",
      point: hit.point,
      strength: 1.0,
      frames: TOUCH_HOLD_FRAMES,
    });
    dirty = true;
  });
  view.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    cam.distance = Math.min(5000, Math.max(20, cam.distance * Math.exp(ev.deltaY * 0.001)));
    dirty = true;
  });

  const tick = (): void => {
    if (dirty) {
      renderScene(ctx, cam, model, lastPick);
      dirty = false;
    }
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);
}

start().catch((err: unknown) => {
  const statusEl = document.getElementById("status");
  if (statusEl) statusEl.textContent = `startup failed: ${String(err)}`;
  console.error(err);
});
