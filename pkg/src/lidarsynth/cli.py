"""Command-line interface: generate -> aggregate -> attack -> defend ->
vo -> validate.

Every subcommand is deterministic given its inputs and seed, and exits
with 0 on success, 1 on configuration or data errors, 2 on I/O failure.
Failures print one line to stderr shaped ``error:CATEGORY: message``
with CATEGORY one of config, data, io.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from . import aggregate as agg
from . import attack as atk
from . import dataset_io as dio
from . import generate as gen
from . import vo as vomod
from .errors import (DecompositionError, FormatError, InsufficientDataError,
                     LidarSynthError, SceneParseError)
from .geometry import matrix_to_euler

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 1
EXIT_IO = 2


def _fail(category: str, message: str, code: int) -> int:
    message = " ".join(str(message).split())
    print(f"error:{category}: {message}", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidarsynth",
        description="Deterministic synthetic LiDAR dataset generator with "
                    "attack injection, a cross-modal spoofing defense, and a "
                    "monocular visual-odometry harness.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("generate", help="render a dataset bundle from a scene file")
    p.add_argument("--scene", required=True, help="path to the scene file")
    p.add_argument("--output", required=True, help="dataset output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="master random seed (default 0)")
    p.add_argument("--frames", type=int, default=None,
                   help="override the scene trajectory frame count")
    p.add_argument("--dt", type=float, default=None,
                   help="override the scene trajectory time step, seconds")
    p.add_argument("--start-time", default=dio.DEFAULT_START_TIME,
                   help="ISO 8601 timestamp of frame 0")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for frame generation; output bytes "
                        "are independent of this value")
    p.add_argument("--dump-every", type=int, default=0,
                   help="write a bird's-eye PPM snapshot every N frames "
                        "(0 disables)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("aggregate",
                       help="merge per-frame clouds into a world-frame map")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--modalities", default="3d,2d",
                   help="comma-separated modalities to merge (from: 3d,2d)")
    p.add_argument("--voxel-size", type=float, default=None,
                   help="voxel edge length in meters for downsampling")
    p.add_argument("--voxel-origin", type=float, nargs=3, default=(0.0, 0.0, 0.0),
                   metavar=("X", "Y", "Z"), help="voxel grid origin")
    p.add_argument("--region", type=float, nargs=6, default=None,
                   metavar=("X0", "Y0", "Z0", "X1", "Y1", "Z1"),
                   help="keep only world points in this AABB "
                        "(min-inclusive, max-exclusive)")
    p.add_argument("--color", action="append", default=[],
                   metavar="MODALITY=R,G,B",
                   help="override a modality color, e.g. 3d=255,0,0")
    p.add_argument("--keep-frame-index", action="store_true",
                   help="retain a per-point frame-index channel")
    p.add_argument("--outlier-filter", action="store_true",
                   help="apply a statistical outlier pass (default off, "
                        "matching the plain pipeline)")
    p.add_argument("--name", default="aggregate",
                   help="output basename under derived/ (default: aggregate)")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("attack", help="apply an attack recipe to a dataset")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--recipe", required=True, help="attack recipe file")
    p.add_argument("--modality", default="3d", choices=("3d", "2d"),
                   help="point-cloud modality to attack")
    p.add_argument("--output", default=None,
                   help="copy the dataset here and attack the copy "
                        "(default: attack in place)")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("defend",
                       help="cross-modal consistency check against depth images")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--tolerance", type=float, default=0.05,
                   help="depth disagreement tolerance in meters (default 0.05)")
    p.add_argument("--modality", default="3d", choices=("3d", "2d"),
                   help="point-cloud modality to check")
    p.add_argument("--record", default=None,
                   help="attack record JSON for scoring (default: "
                        "derived/attack_record.json when present)")
    p.set_defaults(func=cmd_defend)

    p = sub.add_parser("vo", help="monocular visual odometry over the RGB images")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--fast-threshold", type=float,
                   default=vomod.DEFAULT_FAST_THRESHOLD,
                   help="FAST corner threshold on the 0..255 intensity scale")
    p.add_argument("--max-keypoints", type=int,
                   default=vomod.DEFAULT_MAX_KEYPOINTS,
                   help="keep at most this many keypoints per frame")
    p.add_argument("--ransac-iterations", type=int,
                   default=vomod.DEFAULT_RANSAC_ITERATIONS,
                   help="RANSAC iterations for the essential matrix")
    p.add_argument("--ransac-threshold", type=float,
                   default=vomod.DEFAULT_RANSAC_THRESHOLD_PX,
                   help="RANSAC inlier threshold in pixels")
    p.add_argument("--seed", type=int, default=0, help="RANSAC sampling seed")
    p.set_defaults(func=cmd_vo)

    p = sub.add_parser("validate", help="verify a dataset against its manifest")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.set_defaults(func=cmd_validate)

    return parser


def cmd_generate(args) -> int:
    cfg = gen.RunConfig(scene_path=Path(args.scene), output=Path(args.output),
                        seed=args.seed, frames=args.frames, dt=args.dt,
                        start_time=args.start_time, jobs=args.jobs,
                        dump_every=args.dump_every)
    root = gen.generate_dataset(cfg)
    print(f"dataset written to {root}")
    return EXIT_OK


def cmd_aggregate(args) -> int:
    colors = {}
    for spec in args.color:
        mod, _, rgb = spec.partition("=")
        parts = rgb.split(",")
        if mod not in dio.MODALITY_DIRS or len(parts) != 3:
            raise ValueError(f"bad --color spec {spec!r}; use MODALITY=R,G,B")
        colors[mod] = tuple(int(p) for p in parts)
    modalities = tuple(m for m in args.modalities.split(",") if m)
    for m in modalities:
        if m not in ("3d", "2d"):
            raise ValueError(f"unknown modality {m!r}; choose from 3d,2d")
    voxel = None
    if args.voxel_size is not None:
        voxel = agg.VoxelGridParams(args.voxel_size, tuple(args.voxel_origin))
    region = None
    if args.region is not None:
        r = args.region
        region = ((r[0], r[1], r[2]), (r[3], r[4], r[5]))
    options = agg.AggregateOptions(modalities=modalities, color_map=colors,
                                   voxel=voxel, region=region,
                                   keep_frame_index=args.keep_frame_index,
                                   outlier_filter=args.outlier_filter)
    merged = agg.aggregate_dataset(args.dataset, options)
    out_base = Path(args.dataset) / dio.DERIVED_DIR / args.name
    paths = agg.export_aggregate(merged, out_base)
    print(f"aggregated {len(merged)} points -> "
          + ", ".join(str(p) for p in paths))
    return EXIT_OK


def cmd_attack(args) -> int:
    recipe_path = Path(args.recipe)
    if not recipe_path.is_file():
        raise SceneParseError(f"recipe file not found: {recipe_path}")
    specs = atk.parse_attack_recipe(recipe_path.read_text())
    root = Path(args.output) if args.output else Path(args.dataset)
    atk.apply_attacks(args.dataset, specs, modality=args.modality,
                      output=args.output)
    record_path = root / dio.DERIVED_DIR / atk.RECORD_NAME
    print(f"applied {len(specs)} attack(s); record at {record_path}")
    return EXIT_OK


def cmd_defend(args) -> int:
    record = None
    if args.record is not None:
        record = atk.AttackRecord.load(args.record)
    report = atk.defend_dataset(args.dataset, tolerance=args.tolerance,
                                modality=args.modality, record=record)
    out = Path(args.dataset) / dio.DERIVED_DIR / "defense_report.csv"
    atk.write_defense_report_csv(report, out)
    print(report.summary())
    print(f"report at {out}")
    return EXIT_OK


def cmd_vo(args) -> int:
    root = Path(args.dataset)
    rgb_dir = root / dio.MODALITY_DIRS["rgb"]
    if not rgb_dir.is_dir():
        raise SceneParseError(f"missing image directory: {rgb_dir}")
    rows = dio.read_poses_csv(root / dio.POSES_NAME)
    images = []
    for r in rows:
        path = dio.frame_path(root, "rgb", r.frame)
        if not path.is_file():
            raise FormatError(f"missing image {path}")
        images.append(dio.read_ppm(path))
    manifest = dio.read_manifest(root)
    cam = atk.camera_from_dict(manifest["sensors"]["camera"])
    params = vomod.VoParams(fast_threshold=args.fast_threshold,
                            max_keypoints=args.max_keypoints,
                            ransac_iterations=args.ransac_iterations,
                            ransac_threshold_px=args.ransac_threshold,
                            seed=args.seed)
    estimates, diags = vomod.run_monocular_vo(images, cam.intrinsics, params)
    report = vomod.evaluate_vo(estimates, gen.gt_camera_poses(root))

    derived = root / dio.DERIVED_DIR
    derived.mkdir(parents=True, exist_ok=True)
    report_path = derived / "vo_report.csv"
    lines = ["frame,rot_err_deg,tdir_err_deg,inliers"]
    for f in report.frames:
        rot = "" if f.rot_err_deg is None else repr(float(f.rot_err_deg))
        tdir = "" if f.tdir_err_deg is None else repr(float(f.tdir_err_deg))
        lines.append(f"{f.frame},{rot},{tdir},{f.inliers}")
    report_path.write_text("\n".join(lines) + "\n")

    traj_path = derived / "vo_trajectory.csv"
    traj = vomod.concatenate_trajectory(estimates)
    traj_rows = []
    for r, (R, t) in zip(rows, traj):
        a, b, g = matrix_to_euler(R)
        traj_rows.append(dio.PoseRow(r.timestamp, r.frame,
                                     float(t[0]), float(t[1]), float(t[2]),
                                     a, b, g))
    body = ["# scale-free trajectory: translation steps are unit length "
            "(monocular scale is unobservable)", dio.POSES_HEADER]
    for row in traj_rows:
        vals = ",".join(dio.format_float(v) for v in row.values())
        body.append(f"{row.timestamp},{row.frame},{vals}")
    traj_path.write_text("\n".join(body) + "\n")

    mre = report.mean_rotation_error()
    mde = report.mean_direction_error()
    fmt = lambda v: "n/a" if v is None else f"{v:.4f} deg"  # noqa: E731
    print(f"vo over {len(images)} frames: mean rotation error {fmt(mre)}, "
          f"mean translation direction error {fmt(mde)}, "
          f"{report.n_missing} pairs without an estimate")
    print(f"reports at {report_path} and {traj_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    root = Path(args.dataset)
    if not root.is_dir():
        raise SceneParseError(f"dataset directory not found: {root}")
    report = dio.validate_dataset(root)
    print(report)
    return EXIT_OK if report.ok else EXIT_DATA


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SceneParseError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except (ValueError, InsufficientDataError, DecompositionError) as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except FormatError as exc:
        return _fail("data", exc, EXIT_DATA)
    except OSError as exc:
        return _fail("io", exc, EXIT_IO)
    except LidarSynthError as exc:
        return _fail("data", exc, EXIT_DATA)


if __name__ == "__main__":
    sys.exit(main())
