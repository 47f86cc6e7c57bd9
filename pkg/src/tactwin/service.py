"""WebSocket/HTTP service exposing a scene to interactive clients.

One background thread owns the mechanical state and does all solving;
clients talk JSON over a websocket. Snapshot delivery is latest-wins per
client: a slow consumer drops intermediate frames, never backlogs the
simulation.

Wire protocol (client -> server), one JSON object per message:

    {"cmd": "set_pressure", "cavity": "c1", "pa": 3000.0}
    {"cmd": "apply_touch", "point": [x, y, z], "strength": 1.0, "frames": 30}
    {"cmd": "touch", "touches": [{"u": 24.0, "v": 32.0, "strength": 1.0}]}
    {"cmd": "clear_touches"}
    {"cmd": "tip_angle", "deg": 30.0}      # 0 detaches the tip springs
    {"cmd": "reset"}

apply_touch takes a 3D point: the server projects it onto the taxel sheet
itself, so picking clients stay geometry-thin. frames=0 holds until cleared.

Server -> client: {"type": "hello", ...} once, then {"type": "snapshot", ...}
frames and {"type": "error", "message": ...} for rejected commands. Estimates
in a snapshot are recomputable from that snapshot's activation and grid
arrays alone (the 3D lift uses the same rounded grid the snapshot carries).
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
from pathlib import Path

import numpy as np
from aiohttp import WSMsgType, web

from .errors import TactwinError
from .scene import Scene, attach_tip_springs, build_scene
from .sensor import Touch2D, deformation_metric
from .touch import detect_touches, project_to_grid

SNAPSHOT_HZ = 20.0


class SimulationWorker(threading.Thread):
    """Owns scene state; applies commands; emits snapshots via a callback."""

    def __init__(self, scene: Scene, publish, hz=SNAPSHOT_HZ):
        super().__init__(daemon=True, name="tactwin-sim")
        self.scene = scene
        self.publish = publish          # thread-safe callable(snapshot_dict)
        self.period = 1.0 / hz
        self.commands: queue.Queue = queue.Queue()
        self.touches: list[list] = []   # [Touch2D, frames left or None]
        self.frame = 0
        self._converged = True
        self._stopping = threading.Event()

    def stop(self):
        self._stopping.set()

    def submit(self, cmd: dict, reply):
        self.commands.put((cmd, reply))

    # ------------------------------------------------------------------ loop

    def run(self):
        # every tick resynthesizes the sensor frame: noise differs frame to
        # frame even when mechanics are static, same as real hardware
        while not self._stopping.is_set():
            self._drain_commands()
            self.publish(self._make_snapshot())
            self._stopping.wait(self.period)

    def _drain_commands(self):
        while True:
            try:
                cmd, reply = self.commands.get_nowait()
            except queue.Empty:
                break
            try:
                self._apply(cmd)
            except TactwinError as exc:
                reply({"type": "error", "message": str(exc)})
            except (KeyError, TypeError, ValueError) as exc:
                reply({"type": "error", "message": f"bad command: {exc}"})

    def _solve(self, load_steps):
        try:
            _, report = self.scene.model.solve_equilibrium(load_steps=load_steps)
            self._converged = bool(report.converged)
        except TactwinError:
            self._converged = False
            raise

    def _apply(self, cmd):
        kind = cmd.get("cmd")
        scene = self.scene
        if kind == "set_pressure":
            scene.model.set_pressure(str(cmd["cavity"]), float(cmd["pa"]))
            self._solve(load_steps=2)
        elif kind == "apply_touch":
            if scene.grid is None:
                raise ValueError("scene has no taxel grid")
            point = np.asarray(cmd["point"], dtype=float)
            if point.shape != (3,):
                raise ValueError("point must be [x, y, z]")
            frames = int(cmd.get("frames", 0))
            fi, fj, _, _ = project_to_grid(
                scene.anchors.evaluate(scene.mesh), scene.grid.valid, point)
            touch = Touch2D(fi * scene.grid.row_pitch, fj * scene.grid.col_pitch,
                            float(cmd.get("strength", 1.0)))
            self.touches.append([touch, frames if frames > 0 else None])
        elif kind == "touch":
            self.touches = [[Touch2D(float(t["u"]), float(t["v"]),
                                     float(t.get("strength", 1.0))), None]
                            for t in cmd["touches"]]
        elif kind == "clear_touches":
            self.touches = []
        elif kind == "tip_angle":
            deg = float(cmd["deg"])
            if deg == 0.0:
                scene.model.clear_springs()
            else:
                attach_tip_springs(scene, angle_deg=deg)
            self._solve(load_steps=6)
        elif kind == "reset":
            scene.model.clear_springs()
            for name in scene.model.pressures:
                scene.model.set_pressure(name, 0.0)
            scene.mesh.positions = scene.mesh.vertices0.copy()
            self.touches = []
            self._converged = True
        else:
            raise ValueError(f"unknown cmd '{kind}'")

    # -------------------------------------------------------------- snapshot

    def _tick_touches(self):
        for entry in self.touches:
            if entry[1] is not None:
                entry[1] -= 1
        self.touches = [e for e in self.touches if e[1] is None or e[1] > 0]

    def _make_snapshot(self):
        scene = self.scene
        self.frame += 1
        snap = {
            "type": "snapshot",
            "frame": self.frame,
            "converged": self._converged,
            "vertices": np.round(scene.mesh.positions, 3).tolist(),
            "pressures": {name: scene.model.get_pressure_pa(name)
                          for name in scene.model.pressures},
            "volumes": {name: round(scene.model.cavity_volume(name), 2)
                        for name in scene.model.pressures},
        }
        if scene.grid is not None:
            grid3d = scene.anchors.evaluate(scene.mesh)
            metric = deformation_metric(grid3d, scene.grid_rest, scene.grid.valid)
            frame = scene.sensor.synthesize_frame(
                scene.grid, [t for t, _ in self.touches], metric=metric)
            self._tick_touches()
            dets = detect_touches(frame, threshold=scene.sensor.threshold)
            # the lift runs on the rounded grid so a client can recompute
            # every estimate from the snapshot payload alone, bit for bit
            grid_sent = np.round(grid3d, 3)
            snap["grid"] = grid_sent.tolist()
            snap["activation"] = frame.values.tolist()
            snap["touches"] = [
                {
                    "peak": [int(d.peak[0]), int(d.peak[1])],
                    "pos_rc": [d.pos_rc[0], d.pos_rc[1]],
                    "gw2d": list(d.chart_mm(scene.grid.row_pitch,
                                            scene.grid.col_pitch)),
                    "gw3d": d.lift_to_3d(grid_sent).tolist(),
                }
                for d in dets
            ]
        return snap


class SnapshotBroadcaster:
    """Fan-out with a one-slot mailbox per client (latest snapshot wins)."""

    def __init__(self, loop):
        self.loop = loop
        self.clients: dict[object, asyncio.Queue] = {}

    def attach(self, key):
        q = asyncio.Queue(maxsize=1)
        self.clients[key] = q
        return q

    def detach(self, key):
        self.clients.pop(key, None)

    def publish_threadsafe(self, snapshot):
        self.loop.call_soon_threadsafe(self._publish, snapshot)

    def _publish(self, snapshot):
        for q in self.clients.values():
            if q.full():
                try:
                    q.get_nowait()
                except asyncio.QueueEmpty:
                    pass
            q.put_nowait(snapshot)


SCENE_KEY = web.AppKey("scene", Scene)
BROADCAST_KEY = web.AppKey("broadcast", SnapshotBroadcaster)
WORKER_KEY = web.AppKey("worker", SimulationWorker)


def build_app(scene: Scene, hz=SNAPSHOT_HZ, static_dir=None) -> web.Application:
    app = web.Application()
    app[SCENE_KEY] = scene

    async def on_startup(app):
        loop = asyncio.get_running_loop()
        app[BROADCAST_KEY] = SnapshotBroadcaster(loop)
        app[WORKER_KEY] = SimulationWorker(
            scene, app[BROADCAST_KEY].publish_threadsafe, hz=hz)
        app[WORKER_KEY].start()

    async def on_cleanup(app):
        app[WORKER_KEY].stop()
        app[WORKER_KEY].join(timeout=5.0)

    app.on_startup.append(on_startup)
    app.on_cleanup.append(on_cleanup)

    async def scene_endpoint(request):
        return web.json_response(request.app[SCENE_KEY].topology())

    async def ws_endpoint(request):
        ws = web.WebSocketResponse(heartbeat=30.0)
        await ws.prepare(request)
        broadcaster = request.app[BROADCAST_KEY]
        worker = request.app[WORKER_KEY]
        mailbox = broadcaster.attach(ws)
        outbound: asyncio.Queue = asyncio.Queue()

        await ws.send_json({"type": "hello", "scene": scene.name,
                            "snapshot_hz": hz})

        loop = asyncio.get_running_loop()

        def reply(msg):
            loop.call_soon_threadsafe(outbound.put_nowait, msg)

        async def pump():
            while True:
                snap_task = asyncio.create_task(mailbox.get())
                err_task = asyncio.create_task(outbound.get())
                done, pending = await asyncio.wait(
                    {snap_task, err_task}, return_when=asyncio.FIRST_COMPLETED)
                for task in pending:
                    task.cancel()
                for task in done:
                    await ws.send_json(task.result())

        pump_task = asyncio.create_task(pump())
        try:
            async for msg in ws:
                if msg.type == WSMsgType.TEXT:
                    try:
                        cmd = json.loads(msg.data)
                    except json.JSONDecodeError as exc:
                        await ws.send_json({"type": "error",
                                            "message": f"bad json: {exc}"})
                        continue
                    worker.submit(cmd, reply)
                elif msg.type == WSMsgType.ERROR:
                    break
        finally:
            pump_task.cancel()
            broadcaster.detach(ws)
        return ws

    app.router.add_get("/scene", scene_endpoint)
    app.router.add_get("/ws", ws_endpoint)
    if static_dir and Path(static_dir).is_dir():
        async def index(request):
            return web.FileResponse(Path(static_dir) / "index.html")
        app.router.add_get("/", index)
        app.router.add_static("/", static_dir)
    return app


def run_service(scene_name="fruit", host="127.0.0.1", port=8765,
                hz=SNAPSHOT_HZ, static_dir=None):
    scene = build_scene(scene_name)
    app = build_app(scene, hz=hz, static_dir=static_dir)
    web.run_app(app, host=host, port=port)
