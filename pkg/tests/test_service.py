"""End-to-end checks of the websocket service against a live worker."""

import asyncio

import numpy as np
from aiohttp.test_utils import TestClient, TestServer

from tactwin.service import build_app

RECV_TIMEOUT = 15.0


def _run_against_service(scene, coro_fn, hz=50.0):
    """Start the app on an ephemeral port, run coro_fn(client), tear down."""

    async def main():
        client = TestClient(TestServer(build_app(scene, hz=hz)))
        await client.start_server()
        try:
            return await coro_fn(client)
        finally:
            await client.close()

    return asyncio.run(main())


async def _recv(ws):
    return await asyncio.wait_for(ws.receive_json(), timeout=RECV_TIMEOUT)


async def _next_of_type(ws, wanted):
    """Skip interleaved snapshot frames until a message of `wanted` arrives."""
    for _ in range(200):
        msg = await _recv(ws)
        if msg["type"] == wanted:
            return msg
    raise AssertionError(f"no '{wanted}' message arrived")


def test_scene_endpoint_serves_topology(fruit_scene):
    async def check(client):
        resp = await client.get("/scene")
        assert resp.status == 200
        topo = await resp.json()
        assert topo["name"] == "fruit"
        assert topo["n_vertices"] == fruit_scene.mesh.n_vertices
        assert topo["grid"]["rows"] == 11
        assert topo["grid"]["cols"] == 5
        assert topo["material"]["youngs_modulus_pa"] > 0

    _run_against_service(fruit_scene, check)


def test_hello_then_monotone_snapshots(fruit_scene):
    async def check(client):
        ws = await client.ws_connect("/ws")
        hello = await _recv(ws)
        assert hello["type"] == "hello"
        assert hello["scene"] == "fruit"
        assert hello["snapshot_hz"] == 50.0

        frames = []
        for _ in range(3):
            snap = await _next_of_type(ws, "snapshot")
            frames.append(snap["frame"])
            assert len(snap["vertices"]) == fruit_scene.mesh.n_vertices
            assert len(snap["grid"]) == 11
            assert len(snap["activation"]) == 11
            assert snap["touches"] == []
        assert frames == sorted(frames)
        assert len(set(frames)) == 3
        await ws.close()

    _run_against_service(fruit_scene, check)


def test_set_pressure_moves_vertices(fruit_scene):
    async def check(client):
        ws = await client.ws_connect("/ws")
        await _recv(ws)  # hello
        before = await _next_of_type(ws, "snapshot")
        assert before["pressures"]["c1"] == 0.0

        await ws.send_json({"cmd": "set_pressure", "cavity": "c1",
                            "pa": 3000.0})
        after = None
        for _ in range(200):
            snap = await _next_of_type(ws, "snapshot")
            if snap["pressures"]["c1"] == 3000.0:
                after = snap
                break
        assert after is not None
        delta = np.abs(np.asarray(after["vertices"])
                       - np.asarray(before["vertices"]))
        assert delta.max() > 0.05
        await ws.close()

    _run_against_service(fruit_scene, check)


def test_touch_command_is_detected(fruit_scene):
    grid = fruit_scene.grid

    async def check(client):
        ws = await client.ws_connect("/ws")
        await _recv(ws)  # hello
        await ws.send_json({"cmd": "touch", "touches": [
            {"u": 5 * grid.row_pitch, "v": 2 * grid.col_pitch,
             "strength": 1.0}]})
        hit = None
        for _ in range(100):
            snap = await _next_of_type(ws, "snapshot")
            if snap["touches"]:
                hit = snap["touches"][0]
                break
        assert hit is not None
        assert hit["peak"] == [5, 2]
        assert len(hit["gw3d"]) == 3

        await ws.send_json({"cmd": "clear_touches"})
        for _ in range(100):
            snap = await _next_of_type(ws, "snapshot")
            if not snap["touches"]:
                break
        else:
            raise AssertionError("touches never cleared")
        await ws.close()

    _run_against_service(fruit_scene, check)


def test_rejected_commands_report_errors(fruit_scene):
    async def check(client):
        ws = await client.ws_connect("/ws")
        await _recv(ws)  # hello

        await ws.send_json({"cmd": "warp"})
        err = await _next_of_type(ws, "error")
        assert "unknown cmd" in err["message"]

        await ws.send_json({"cmd": "set_pressure", "cavity": "nope",
                            "pa": 10.0})
        err = await _next_of_type(ws, "error")
        assert "nope" in err["message"]

        await ws.send_str("{not json")
        err = await _next_of_type(ws, "error")
        assert "bad json" in err["message"]
        await ws.close()

    _run_against_service(fruit_scene, check)


def test_apply_touch_point_round_trip(fruit_scene):
    """A picked 3D point comes back as an estimate within half a pitch."""
    target = np.array(fruit_scene.grid_rest[5, 2])
    half_pitch = 0.5 * min(fruit_scene.grid.row_pitch,
                           fruit_scene.grid.col_pitch)

    async def check(client):
        ws = await client.ws_connect("/ws")
        await _recv(ws)  # hello
        await ws.send_json({"cmd": "apply_touch", "point": target.tolist(),
                            "strength": 1.0})
        hits = 0
        for _ in range(100):
            snap = await _next_of_type(ws, "snapshot")
            if not snap["touches"]:
                continue
            est = np.asarray(snap["touches"][0]["gw3d"])
            assert np.linalg.norm(est - target) <= half_pitch
            hits += 1
            if hits == 2:
                break
        assert hits == 2
        await ws.close()

    _run_against_service(fruit_scene, check)


def test_apply_touch_expires_after_frames(fruit_scene):
    target = fruit_scene.grid_rest[5, 2].tolist()

    async def check(client):
        ws = await client.ws_connect("/ws")
        await _recv(ws)  # hello
        await ws.send_json({"cmd": "apply_touch", "point": target,
                            "strength": 1.0, "frames": 2})
        seen_touch = False
        for _ in range(100):
            snap = await _next_of_type(ws, "snapshot")
            if snap["touches"]:
                seen_touch = True
            elif seen_touch:
                return  # appeared, then expired on its own
        raise AssertionError("touch never appeared and expired")

    _run_against_service(fruit_scene, check)


def test_reset_restores_rest_state(fruit_scene):
    rest = np.round(fruit_scene.mesh.vertices0, 3)

    async def check(client):
        ws = await client.ws_connect("/ws")
        await _recv(ws)  # hello
        await ws.send_json({"cmd": "set_pressure", "cavity": "c2",
                            "pa": 2000.0})
        for _ in range(200):
            snap = await _next_of_type(ws, "snapshot")
            if snap["pressures"]["c2"] == 2000.0:
                break
        await ws.send_json({"cmd": "reset"})
        for _ in range(200):
            snap = await _next_of_type(ws, "snapshot")
            if snap["pressures"]["c2"] == 0.0 \
                    and np.array_equal(np.asarray(snap["vertices"]), rest):
                assert snap["converged"] is True
                return
        raise AssertionError("reset never restored the rest state")

    _run_against_service(fruit_scene, check)


def test_snapshot_estimates_recompute_exactly(fruit_scene):
    """Estimates must be a pure function of the snapshot's own arrays."""
    from tactwin.sensor import ActivationMap
    from tactwin.touch import detect_touches

    grid = fruit_scene.grid
    touch_cmd = {"cmd": "touch", "touches": [
        {"u": 4.3 * grid.row_pitch, "v": 1.6 * grid.col_pitch,
         "strength": 1.0}]}

    async def check(client):
        ws = await client.ws_connect("/ws")
        await _recv(ws)  # hello
        await ws.send_json(touch_cmd)
        snap = None
        for _ in range(100):
            cand = await _next_of_type(ws, "snapshot")
            if cand["touches"]:
                snap = cand
                break
        assert snap is not None
        await ws.close()

        values = np.asarray(snap["activation"], dtype=np.int32)
        frame = ActivationMap(values, grid.valid)
        redone = detect_touches(frame, threshold=fruit_scene.sensor.threshold)
        assert len(redone) == len(snap["touches"])
        grid_sent = np.asarray(snap["grid"])
        for det, sent in zip(redone, snap["touches"]):
            assert list(det.peak) == sent["peak"]
            assert [det.pos_rc[0], det.pos_rc[1]] == sent["pos_rc"]
            assert list(det.chart_mm(grid.row_pitch, grid.col_pitch)) \
                == sent["gw2d"]
            assert det.lift_to_3d(grid_sent).tolist() == sent["gw3d"]

    _run_against_service(fruit_scene, check)


def test_snapshot_reports_cavity_volumes(fruit_scene):
    async def check(client):
        ws = await client.ws_connect("/ws")
        await _recv(ws)  # hello
        snap = await _next_of_type(ws, "snapshot")
        assert set(snap["volumes"]) == {"c1", "c2", "c3"}
        assert all(v > 0 for v in snap["volumes"].values())
        assert snap["converged"] is True
        await ws.close()

    _run_against_service(fruit_scene, check)
