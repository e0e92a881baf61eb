"""Batch command line: skeletonize polygon corpora, run the service,
generate fixture corpora."""
from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from .errors import SkelforgeError
from .geom import Point
from .scene import Scene, SceneConfig
from .stroke import SimplePolygon

CSV_COLUMNS = ["name", "n_vertices", "t_polygon", "t_sskel", "t_clean",
               "t_boundeddp", "t_connect", "t_refine", "t_total_ms"]


def _config_from_args(args: argparse.Namespace) -> SceneConfig:
    cfg = SceneConfig()
    for flag, attr in [("step", "step"), ("eps_poly", "eps_poly"),
                       ("alpha_s", "alpha_s"), ("eps_s", "eps_s"),
                       ("eps_m", "eps_m"), ("eps_t", "eps_t"), ("eps_c", "eps_c")]:
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, attr, value)
    return cfg


def _iter_inputs(paths: Iterable[str]) -> List[Path]:
    out: List[Path] = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            out.extend(sorted(path.glob("*.json")))
        else:
            out.append(path)
    return out


def _load_polygons(path: Path) -> List[Tuple[str, SimplePolygon]]:
    """A polygon file is a JSON array of [x, y]; a scene document yields
    one polygon per part."""
    data = json.loads(path.read_text())
    if isinstance(data, list):
        return [(path.stem, SimplePolygon([Point(x, y) for x, y in data]))]
    if isinstance(data, dict) and "parts" in data:
        out = []
        for part in data["parts"]:
            poly = SimplePolygon([Point(x, y) for x, y in part["polygon"]])
            out.append((f"{path.stem}#{part['id']}", poly))
        return out
    raise SkelforgeError(f"{path}: neither a polygon array nor a scene document")


def _run_once(poly: SimplePolygon, cfg: SceneConfig):
    t0 = time.perf_counter_ns()
    scene = Scene(cfg)
    scene.add_part_from_polygon(poly)
    timings = dict(scene.last_timings)
    skel = scene.global_skeleton()
    timings["t_refine"] = scene.last_timings.get("t_refine", 0)
    timings["t_total"] = (time.perf_counter_ns() - t0) // 1000
    return scene, skel, timings


def cli_skeletonize(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    failures = 0
    for path in _iter_inputs(args.inputs):
        try:
            entries = _load_polygons(path)
        except (OSError, json.JSONDecodeError, SkelforgeError, ValueError,
                TypeError, KeyError) as ex:
            failures += 1
            print(f"error: {path}: {ex}", file=sys.stderr)
            continue
        for name, poly in entries:
            try:
                runs = [_run_once(poly, cfg) for _ in range(max(1, args.bench))]
            except SkelforgeError as ex:
                failures += 1
                print(f"error: {name}: {ex}", file=sys.stderr)
                continue
            scene, skel, _ = runs[0]
            med = {
                key: statistics.median(r[2].get(key, 0) for r in runs) / 1000.0
                for key in ("t_polygon", "t_sskel", "t_clean", "t_boundeddp",
                            "t_connect", "t_refine", "t_total")
            }
            (out_dir / f"{name}.skeleton.json").write_text(
                json.dumps(skel.to_json(), indent=2) + "\n")
            if args.svg:
                from .straight_skeleton import extract_straight_skeleton
                from .svg import skeleton_svg, straight_skeleton_svg
                ss = extract_straight_skeleton(poly)
                tmax = max((v.time for v in ss.skeleton_vertices()), default=0.0)
                times = [tmax * f for f in (0.25, 0.5, 0.75)]
                (out_dir / f"{name}.sskel.svg").write_text(
                    straight_skeleton_svg(ss, times))
                (out_dir / f"{name}.svg").write_text(
                    skeleton_svg(skel, poly, show_radii=True))
            rows.append([name, len(poly), f"{med['t_polygon']:.3f}",
                         f"{med['t_sskel']:.3f}", f"{med['t_clean']:.3f}",
                         f"{med['t_boundeddp']:.3f}", f"{med['t_connect']:.3f}",
                         f"{med['t_refine']:.3f}", f"{med['t_total']:.3f}"])
            print(f"{name}: {len(poly)} vertices, {med['t_total']:.2f} ms")
    if args.csv:
        csv_path = Path(args.csv)
        write_header = not csv_path.exists()
        with csv_path.open("a", newline="") as fh:
            writer = csv.writer(fh)
            if write_header:
                writer.writerow(CSV_COLUMNS)
            writer.writerows(rows)
    return 1 if failures else 0


def cli_serve(args: argparse.Namespace) -> int:
    from .service import serve
    handle = serve(args.port, args.data_dir, args.http_port)
    print(f"session service on tcp port {handle.tcp_port}, "
          f"http on {handle.http_port} (Ctrl-C stops)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        handle.stop()
    return 0


def cli_gen(args: argparse.Namespace) -> int:
    from .fixtures import gen_scene, gen_star_polygon
    root = Path(args.out)
    (root / "polygons").mkdir(parents=True, exist_ok=True)
    (root / "scenes").mkdir(parents=True, exist_ok=True)
    (root / "expected").mkdir(parents=True, exist_ok=True)
    rng_seeds = range(args.seed, args.seed + args.count)
    for k, seed in enumerate(rng_seeds):
        n = 4 + (seed * 7) % max(3, args.max_vertices - 3)
        poly = gen_star_polygon(seed, n)
        (root / "polygons" / f"star_{seed:04d}_{n:02d}.json").write_text(
            json.dumps([[v.x, v.y] for v in poly.vertices]) + "\n")
        if k % 4 == 0:
            scene = gen_scene(seed)
            (root / "scenes" / f"scene_{seed:04d}.json").write_bytes(scene.save())
    expected = {
        "rectangle_8x4": {
            "value": {"nodes": [[2.0, 2.0, 2.0], [6.0, 2.0, 2.0]],
                      "skeleton_edges": 1, "peripheral_edges": 4},
            "provenance": "closed form: uniform-width box ridge at half height",
        },
        "square_4": {
            "value": {"nodes": [[2.0, 2.0, 2.0]], "skeleton_edges": 0,
                      "peripheral_edges": 4},
            "provenance": "closed form: four corner bisectors meet at the centre",
        },
        "stroke_perimeter_1972_28_step_10": {
            "value": {"points": 197},
            "provenance": "floor(perimeter / step)",
        },
    }
    (root / "expected" / "analytic.json").write_text(
        json.dumps(expected, indent=2) + "\n")
    print(f"fixture corpus written under {root}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="skelforge",
        description="Stroke skeletonization engine: batch runs, service, fixtures")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("skeletonize", help="skeletonize polygon or scene files")
    ps.add_argument("--in", dest="inputs", nargs="+", required=True,
                    help="polygon/scene JSON files or directories")
    ps.add_argument("--out", default="skelforge_out", help="output directory")
    ps.add_argument("--svg", action="store_true", help="also write debug SVGs")
    ps.add_argument("--csv", default=None, help="append timing rows to this CSV")
    ps.add_argument("--bench", type=int, default=1, metavar="N",
                    help="repeat N times and report the median timings")
    for flag in ("step", "eps-poly", "alpha-s", "eps-s", "eps-m", "eps-t", "eps-c"):
        ps.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=float,
                        default=None)
    ps.set_defaults(func=cli_skeletonize)

    pv = sub.add_parser("serve", help="run the session service")
    pv.add_argument("--port", type=int, default=7341)
    pv.add_argument("--http-port", type=int, default=None)
    pv.add_argument("--data-dir", default=None,
                    help="persistence directory (or SKELFORGE_DATA_DIR)")
    pv.set_defaults(func=cli_serve)

    pg = sub.add_parser("gen", help="generate a deterministic fixture corpus")
    pg.add_argument("--out", default="fixtures")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--count", type=int, default=20)
    pg.add_argument("--max-vertices", type=int, default=16)
    pg.set_defaults(func=cli_gen)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
