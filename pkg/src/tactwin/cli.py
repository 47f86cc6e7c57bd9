"""Command line entry points for the simulator and its evaluation harness."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np


def _emit(payload: dict, path):
    if path:
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
        print(f"wrote {path}")


def cmd_info(args):
    from . import __version__
    from .fem import backend_name
    from .scene import build_scene

    print(f"tactwin {__version__}")
    print(f"fem kernel backend: {backend_name}")
    for name in ("bar", "pad", "fruit"):
        scene = build_scene(name)
        n_taxels = scene.grid.n_valid if scene.grid is not None else 0
        print(f"scene {name}: {len(scene.mesh.vertices0)} vertices, "
              f"{len(scene.mesh.tets)} tets, {n_taxels} taxels, "
              f"cavities {sorted(scene.mesh.cavities)}")
    return 0


def cmd_fixtures(args):
    from .bench import FIXTURE_NAMES, evaluate_fixture

    names = [args.name] if args.name else list(FIXTURE_NAMES)
    payload = {}
    for name in names:
        report = evaluate_fixture(name)
        payload[name] = report.to_dict()
        print(report)
    _emit(payload, args.json)
    return 0


def cmd_probe(args):
    from .bench import ProbeProtocol, run_probe_experiment
    from .bench.deform import apply_deformed_config
    from .scene import build_scene

    scene = build_scene(args.scene)
    label = f"{args.scene}-rest"
    payload = {}
    if args.deformed:
        print("solving deformed configuration (this can take a few minutes)")
        _, info = apply_deformed_config(scene)
        print(f"tip rotation: commanded {info['commanded_deg']:.1f} deg, "
              f"achieved {info['achieved_deg']:.2f} deg")
        payload["deformation"] = info
        label = f"{args.scene}-deformed"
    protocol = ProbeProtocol(seed=args.seed)
    report = run_probe_experiment(scene, protocol=protocol, label=label)
    print(report)
    payload["probe"] = report.to_dict()
    _emit(payload, args.json)
    return 0


def cmd_shift_report(args):
    from .bench import animation_schedule, baseline_shift_report
    from .bench.deform import apply_deformed_config
    from .scene import build_scene

    scene = build_scene(args.scene)
    print("solving deformed configuration (this can take a few minutes)")
    _, info = apply_deformed_config(scene)
    grid_deformed = scene.anchors.evaluate(scene.mesh)
    schedule = animation_schedule(args.frames)
    report = baseline_shift_report(scene, grid_deformed, schedule)
    print(f"tip rotation achieved {info['achieved_deg']:.2f} deg")
    print(f"baseline shift over {report.n_frames} frames: "
          f"max {report.max_shift:.2f} counts, "
          f"avg of per-taxel maxima {report.avg_max_shift:.2f} counts")
    payload = {"deformation": info, "shift": report.to_dict()}
    _emit(payload, args.json)
    return 0


def cmd_robustness(args):
    from .bench import run_robustness
    from .bench.deform import apply_deformed_config
    from .scene import build_scene

    scene = build_scene(args.scene)
    print("solving deformed configuration (this can take a few minutes)")
    apply_deformed_config(scene)
    grid_deformed = scene.anchors.evaluate(scene.mesh)
    report = run_robustness(scene, grid_deformed, n_frames=args.frames,
                            seed=args.seed)
    print(f"frames: {report.n_frames}")
    print(f"false positive frames: {report.false_positive_frames} "
          f"({100.0 * report.false_positive_rate:.3f}%)")
    print(f"touch detection rate: {100.0 * report.detection_rate:.2f}%")
    print(f"baseline shift: max {report.max_shift:.2f}, "
          f"avg of per-taxel maxima {report.avg_max_shift:.2f}")
    _emit(report.to_dict(), args.json)
    return 0


def cmd_serve(args):
    from .service import run_service

    run_service(scene_name=args.scene, host=args.host, port=args.port,
                hz=args.hz, static_dir=args.static)
    return 0


def cmd_bench(args):
    import time

    from .fem import kernels
    from .scene import build_scene

    scene = build_scene(args.scene)
    mesh = scene.mesh
    bm, ke, _ = kernels.precompute(mesh.vertices0, mesh.tets, 0.12, 0.45)
    rng = np.random.default_rng(3)
    q = mesh.vertices0 + 0.5 * rng.standard_normal(mesh.vertices0.shape)

    impls = [("numpy", kernels.reference_forces_and_blocks)]
    if kernels.backend_name == "cython":
        impls.insert(0, ("cython", kernels.forces_and_blocks))

    print(f"{len(mesh.tets)} elements, {args.repeat} repeats")
    times = {}
    for name, fn in impls:
        fn(q, mesh.tets, bm, ke, mesh.vertices0, True)  # warm up
        t0 = time.perf_counter()
        for _ in range(args.repeat):
            fn(q, mesh.tets, bm, ke, mesh.vertices0, True)
        dt = (time.perf_counter() - t0) / args.repeat
        times[name] = dt
        print(f"{name:>7}: {1e3 * dt:8.2f} ms per force+stiffness evaluation")
    if len(times) == 2:
        print(f"speedup: {times['numpy'] / times['cython']:.1f}x")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="tactwin",
        description="Digital twin of a capacitively sensorized soft body")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("info", help="backend and scene summary")

    p = sub.add_parser("fixtures", help="evaluate transcribed reference datasets")
    p.add_argument("--name", choices=["rest_small", "deformed_small"],
                   help="evaluate a single dataset")
    p.add_argument("--json", help="write results to a JSON file")

    p = sub.add_parser("probe", help="virtual indenter localization experiment")
    p.add_argument("--scene", default="fruit")
    p.add_argument("--deformed", action="store_true",
                   help="bend the tip before probing")
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--json", help="write results to a JSON file")

    p = sub.add_parser("shift-report", help="baseline drift over an animation")
    p.add_argument("--scene", default="fruit")
    p.add_argument("--frames", type=int, default=2000)
    p.add_argument("--json", help="write results to a JSON file")

    p = sub.add_parser("robustness", help="false-positive and detection rates")
    p.add_argument("--scene", default="fruit")
    p.add_argument("--frames", type=int, default=10000)
    p.add_argument("--seed", type=int, default=777)
    p.add_argument("--json", help="write results to a JSON file")

    p = sub.add_parser("serve", help="run the websocket/http service")
    p.add_argument("--scene", default="fruit")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--hz", type=float, default=20.0)
    p.add_argument("--static", help="directory with a built web client")

    p = sub.add_parser("bench", help="compare force kernel backends")
    p.add_argument("--scene", default="fruit")
    p.add_argument("--repeat", type=int, default=20)

    args = parser.parse_args(argv)
    handler = {
        "info": cmd_info,
        "fixtures": cmd_fixtures,
        "probe": cmd_probe,
        "shift-report": cmd_shift_report,
        "robustness": cmd_robustness,
        "serve": cmd_serve,
        "bench": cmd_bench,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
