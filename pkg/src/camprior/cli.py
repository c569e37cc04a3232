"""Single command-line entry point exposing all subcommands.

Exit codes: 0 success, 1 usage error, 2 data error. All file outputs are
byte-reproducible for a fixed seed and thread count.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import augment as _augment
from . import ground as _ground
from . import imageio as _io
from . import metrics as _metrics
from . import modulation as _mod
from . import priors as _priors
from . import rig as _rig
from .config import GlobalConfig, load_config, resolve_threads
from .errors import CamPriorError

log = logging.getLogger("camprior")

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _global_flags_parser() -> argparse.ArgumentParser:
    """Shared flags, accepted both before and after the subcommand.

    SUPPRESS defaults keep subparser parsing from clobbering values parsed
    at the root level.
    """
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--threads", type=int, help="worker threads (0 = auto)")
    p.add_argument("--seed", type=int, help="global RNG seed")
    p.add_argument("--max-depth", type=float, help="ground depth clamp in meters")
    p.add_argument(
        "--focal-channel-mode",
        choices=list(_priors.FOCAL_CHANNEL_MODES),
        help="raw focal channel: eq2 (1/f^2) or normalized500 (f/500)",
    )
    p.add_argument("--log-level", choices=["debug", "info", "warning", "error"])
    return p


def _merge_config(args: argparse.Namespace) -> GlobalConfig:
    def flag(name):
        return getattr(args, name, None)

    cfg = load_config(flag("config")) if flag("config") else GlobalConfig()
    overrides = {}
    for name in ("seed", "max_depth", "focal_channel_mode", "log_level"):
        if flag(name) is not None:
            overrides[name] = flag(name)
    cfg = replace(cfg, **overrides)
    cfg = replace(cfg, threads=resolve_threads(cfg, flag("threads")))
    return cfg


def _parse_bg(text: str) -> np.ndarray:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"--bg expects r,g,b, got {text!r}")
    bg = np.asarray(parts, dtype=np.float64)
    if bg.max() > 1.0:  # 0-255 convention
        bg = bg / 255.0
    if bg.min() < 0 or bg.max() > 1:
        raise ValueError(f"--bg components must be in [0, 1] or [0, 255], got {text!r}")
    return bg


def _load_intrinsics_json(path: str) -> _rig.CameraIntrinsics:
    data = json.loads(Path(path).read_text())
    w, h = int(data["width"]), int(data["height"])
    return _rig.CameraIntrinsics(
        fu=float(data["fu"]),
        fv=float(data["fv"]),
        cu=float(data.get("cu", w / 2.0)),
        cv=float(data.get("cv", h / 2.0)),
        width=w,
        height=h,
    )


def _intrinsics_to_json(intr: _rig.CameraIntrinsics) -> dict:
    return {
        "width": intr.width,
        "height": intr.height,
        "fu": intr.fu,
        "fv": intr.fv,
        "cu": intr.cu,
        "cv": intr.cv,
    }


# ---------------------------------------------------------------- rig


def _cmd_rig_show(args, cfg: GlobalConfig) -> int:
    rig = _rig.load_rig(args.source)
    print(f"rig: {args.source}  ({len(rig)} cameras)")
    print(f"note: {rig.ego_frame_note}")
    header = f"{'name':<12} {'res':>10} {'fu':>8} {'fv':>8} {'hfov':>7} {'vfov':>7} {'yaw':>7}  t (m)"
    print(header)
    for cam in rig:
        i = cam.intrinsics
        fwd = cam.extrinsics.rotation @ np.array([0.0, 0.0, 1.0])
        yaw = float(np.degrees(np.arctan2(fwd[1], fwd[0])))
        t = cam.extrinsics.translation
        print(
            f"{cam.name:<12} {i.width:>5}x{i.height:<4} {i.fu:>8.1f} {i.fv:>8.1f} "
            f"{_rig.horizontal_fov(i):>6.1f}° {_rig.vertical_fov(i):>6.1f}° {yaw:>6.1f}°  "
            f"({t[0]:.2f}, {t[1]:.2f}, {t[2]:.2f})"
        )
    return 0


def _cmd_rig_export(args, cfg: GlobalConfig) -> int:
    rig = _rig.preset_rig(args.preset)
    _rig.save_rig(rig, args.output)
    log.info("wrote %s", args.output)
    return 0


# ---------------------------------------------------------------- priors


def _cmd_priors_ground(args, cfg: GlobalConfig) -> int:
    rig = _rig.load_rig(args.rig)
    cam = rig.camera(args.camera)
    out_w = max(1, round(cam.intrinsics.width * args.scale))
    out_h = max(1, round(cam.intrinsics.height * args.scale))
    si = cam.intrinsics.scaled_to(out_w, out_h)
    plane = _ground.fit_ground_plane(cam.extrinsics)
    gd = _ground.ground_depth_map(si, plane, out_w, out_h, max_depth=cfg.max_depth)
    gg = _ground.ground_gradient_map(gd)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    _io.write_pfm(out / "ground_depth.pfm", gd.values)
    _io.write_pfm(out / "ground_gradient.pfm", gg.values)
    _io.write_pgm_mask(out / "valid.pgm", gd.valid & gg.valid)
    meta = {
        "camera": cam.name,
        "scale": args.scale,
        "width": out_w,
        "height": out_h,
        "max_depth": cfg.max_depth,
        "plane_camera_frame": [plane.a, plane.b, plane.c, plane.d],
    }
    (out / "manifest.json").write_text(json.dumps(meta, indent=2) + "\n")
    log.info("wrote ground maps to %s (%dx%d)", out, out_w, out_h)
    return 0


def _cmd_priors_build(args, cfg: GlobalConfig) -> int:
    rig = _rig.load_rig(args.rig)
    cam = rig.camera(args.camera)
    priors = _priors.build_prior_set(
        cam.intrinsics,
        cam.extrinsics,
        args.out_w,
        args.out_h,
        max_depth=cfg.max_depth,
        focal_channel_mode=cfg.focal_channel_mode,
    )
    extra = {
        "camera": cam.name,
        "focal_channel_mode": priors.focal_channel_mode,
        "normalization": {
            "focal_divisor": _priors.FOCAL_DIVISOR,
            "depth_divisor": _priors.DEPTH_DIVISOR,
            "gradient_divisor": _priors.GRADIENT_DIVISOR,
        },
        "focal_at_working_resolution": _priors.effective_focal(
            cam.intrinsics.scaled_to(args.out_w, args.out_h)
        ),
    }
    out = _io.write_pfm_stack(args.output, priors.stack(), list(_priors.CHANNEL_NAMES), extra)
    _io.write_pgm_mask(Path(args.output) / "valid.pgm", priors.valid[0])
    log.info("wrote 9-channel prior stack to %s", out)
    return 0


# ---------------------------------------------------------------- sfm


def _cmd_sfm_run(args, cfg: GlobalConfig) -> int:
    rig = _rig.load_rig(args.rig)
    cam = rig.camera(args.camera)
    feature, feat_manifest = _io.read_pfm_stack(args.feature)
    weights = _mod.load_projector_weights(args.weights)
    priors = _priors.build_prior_set(
        cam.intrinsics,
        cam.extrinsics,
        feature.shape[2],
        feature.shape[1],
        max_depth=cfg.max_depth,
        focal_channel_mode=cfg.focal_channel_mode,
    )
    f1 = _mod.modulate_focal(feature.astype(np.float64), priors.inverse_focal)
    f2 = _mod.spatial_embed(f1, priors, weights)
    f3 = _mod.assemble_spatial_feature(f2, priors)
    out = Path(args.output)
    feat_names = feat_manifest.get(
        "channels", [f"feat_{i:03d}" for i in range(feature.shape[0])]
    )
    common = {"camera": cam.name, "focal_channel_mode": priors.focal_channel_mode}
    _io.write_pfm_stack(out / "modulated", f1, feat_names, common)
    _io.write_pfm_stack(out / "embedded", f2, feat_names, common)
    _io.write_pfm_stack(
        out / "spatial_feature", f3, list(_priors.CHANNEL_NAMES) + list(feat_names), common
    )
    log.info("wrote modulated/embedded/spatial_feature stacks to %s", out)
    return 0


def _cmd_sfm_init_weights(args, cfg: GlobalConfig) -> int:
    seed = args.weights_seed if args.weights_seed is not None else cfg.seed
    weights = _mod.xavier_projector_weights(args.c_out, seed=seed)
    _mod.save_projector_weights(args.output, weights)
    log.info("wrote %d-channel projector weights to %s", args.c_out, args.output)
    return 0


# ---------------------------------------------------------------- scene


def _cmd_scene_build(args, cfg: GlobalConfig) -> int:
    from . import scene as _scene

    rig = _rig.load_rig(args.rig)
    frames = Path(args.frames)
    views = []
    for cam in rig:
        rgb_path = frames / cam.name / "rgb.png"
        depth_path = frames / cam.name / "depth.pfm"
        if not rgb_path.exists() or not depth_path.exists():
            log.warning("skipping %s: missing %s or %s", cam.name, rgb_path, depth_path)
            continue
        rgb = _io.read_png(rgb_path)
        depth = _io.read_pfm(depth_path)
        views.append((rgb, depth, (cam.intrinsics, cam.extrinsics)))
    scene = _scene.from_rgbd(views)
    _scene.save_ply(scene, args.output)
    log.info("wrote %d gaussians to %s", len(scene), args.output)
    return 0


def _cmd_scene_append(args, cfg: GlobalConfig) -> int:
    from . import scene as _scene

    scene = _scene.load_ply(args.input)
    pts, cols = _scene.load_colored_points(args.points)
    scene = _scene.append_points(scene, pts, cols, is_foreground=args.foreground)
    out = args.output or args.input
    _scene.save_ply(scene, out)
    log.info("scene now has %d gaussians -> %s", len(scene), out)
    return 0


# ---------------------------------------------------------------- render


def _cmd_render(args, cfg: GlobalConfig) -> int:
    from . import render as _render
    from . import scene as _scene

    _render.set_threads(cfg.threads)
    scene = _scene.load_ply(args.scene)
    rig = _rig.load_rig(args.rig)
    cams = [rig.camera(args.camera)] if args.camera else list(rig)
    bg = _parse_bg(args.bg)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for cam in cams:
        target = _render.render(scene, cam.intrinsics, cam.extrinsics, background=bg)
        _io.write_png(out / f"{cam.name}.png", target.rgb)
        depth = np.where(target.hit_mask, target.depth, 0.0)
        _io.write_pfm(out / f"{cam.name}_depth.pfm", depth)
        log.info(
            "rendered %s: %d/%d pixels hit", cam.name, int(target.hit_mask.sum()), depth.size
        )
    return 0


# ---------------------------------------------------------------- augment


def _cmd_augment_sample(args, cfg: GlobalConfig) -> int:
    rig = _rig.load_rig(args.rig)
    spec = _augment.AugmentSpec.load(args.spec) if args.spec else _augment.AugmentSpec()
    seed = cfg.seed
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    n = len(rig)
    for k in range(args.count):
        cams = []
        for pos, cam in enumerate(rig):
            index = args.start_index + k * n + pos
            intr, extr = _augment.sample_camera(
                (cam.intrinsics, cam.extrinsics), spec, seed, index
            )
            cams.append(_rig.RigCamera(cam.name, intr, extr))
        perturbed = _rig.CameraRig(tuple(cams), ego_frame_note=rig.ego_frame_note)
        _rig.save_rig(perturbed, out / f"rig_{args.start_index + k * n:06d}.json")
    log.info("wrote %d perturbed rigs to %s (seed=%d)", args.count, out, seed)
    return 0


def _cmd_augment_resize(args, cfg: GlobalConfig) -> int:
    intr = _load_intrinsics_json(args.intr)
    image = _io.read_png(args.image)
    result = _augment.focal_resize(image, intr, args.scale)
    out = Path(args.output)
    _io.write_png(out, result.image)
    sidecar = out.with_suffix(".intr.json")
    sidecar.write_text(json.dumps(_intrinsics_to_json(result.intrinsics), indent=2) + "\n")
    _io.write_pgm_mask(out.with_suffix(".coverage.pgm"), result.coverage)
    log.info("wrote %s (+ %s)", out, sidecar.name)
    return 0


# ---------------------------------------------------------------- metrics


def _cmd_metrics_nds(args, cfg: GlobalConfig) -> int:
    if args.csv:
        results = _metrics.validate_score_table(args.csv)
        n_bad = 0
        for row, computed, ok in results:
            status = "PASS" if ok else "FAIL"
            n_bad += not ok
            note = "" if row.reporting_consistent else "  (known reporting rounding in source)"
            print(
                f"{status} {row.setting}/{row.method}: computed={computed:.6f} "
                f"reported={row.nds_reported:.3f}{note}"
            )
        print(f"{len(results) - n_bad}/{len(results)} rows PASS")
        return 0 if n_bad == 0 else DATA_EXIT
    if None in (args.map, args.mate, args.mase, args.maoe):
        raise CamPriorError("provide --map/--mate/--mase/--maoe or --csv")
    score = _metrics.nds_star(
        _metrics.DetectionScores(
            mean_ap=args.map,
            translation_error=args.mate,
            scale_error=args.mase,
            orientation_error=args.maoe,
        )
    )
    print(f"{score:.6f}")
    return 0


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    shared = _global_flags_parser()
    parser = _Parser(prog="camprior", description=__doc__, parents=[shared])
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_rig = sub.add_parser("rig", help="inspect and export camera rigs")
    rig_sub = p_rig.add_subparsers(dest="rig_command", metavar="action")
    p = rig_sub.add_parser("show", parents=[shared], help="print cameras, FoVs and poses")
    p.add_argument("source", help="preset name or rig JSON path")
    p.set_defaults(handler=_cmd_rig_show)
    p = rig_sub.add_parser("export", parents=[shared], help="write a preset rig as JSON")
    p.add_argument("preset", choices=list(_rig.PRESET_NAMES))
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_rig_export)

    p_pr = sub.add_parser("priors", help="per-camera spatial prior maps")
    pr_sub = p_pr.add_subparsers(dest="priors_command", metavar="action")
    p = pr_sub.add_parser("ground", parents=[shared], help="ground depth + gradient maps")
    p.add_argument("--rig", required=True)
    p.add_argument("--camera", required=True)
    p.add_argument("--scale", type=float, required=True, help="resolution scale factor")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_priors_ground)
    p = pr_sub.add_parser("build", parents=[shared], help="full 9-channel prior stack")
    p.add_argument("--rig", required=True)
    p.add_argument("--camera", required=True)
    p.add_argument("--out-w", type=int, required=True)
    p.add_argument("--out-h", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_priors_build)

    p_sfm = sub.add_parser("sfm", help="spatial feature modulation pipeline")
    sfm_sub = p_sfm.add_subparsers(dest="sfm_command", metavar="action")
    p = sfm_sub.add_parser("run", parents=[shared], help="modulate a feature stack with prior maps")
    p.add_argument("--rig", required=True)
    p.add_argument("--camera", required=True)
    p.add_argument("--feature", required=True, help="input PFM stack directory")
    p.add_argument("--weights", required=True, help="projector weights file")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_sfm_run)
    p = sfm_sub.add_parser("init-weights", parents=[shared], help="create deterministic projector weights")
    p.add_argument("--c-out", type=int, required=True)
    p.add_argument("--weights-seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_sfm_init_weights)

    p_scene = sub.add_parser("scene", help="build and extend gaussian scenes")
    sc_sub = p_scene.add_subparsers(dest="scene_command", metavar="action")
    p = sc_sub.add_parser("build", parents=[shared], help="scene from per-camera rgb.png + depth.pfm")
    p.add_argument("--rig", required=True)
    p.add_argument("--frames", required=True, help="directory with <camera>/rgb.png + depth.pfm")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_scene_build)
    p = sc_sub.add_parser("append", parents=[shared], help="append colored points to a scene")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--points", required=True, help="PLY with x,y,z,red,green,blue")
    p.add_argument("--foreground", action="store_true")
    p.add_argument("-o", "--output", default=None, help="default: overwrite input")
    p.set_defaults(handler=_cmd_scene_append)

    p = sub.add_parser("render", parents=[shared], help="render a scene into rig cameras")
    p.add_argument("--scene", required=True)
    p.add_argument("--rig", required=True)
    p.add_argument("--camera", default=None, help="default: all cameras")
    p.add_argument("--bg", default="0,0,0", help="background r,g,b")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_render)

    p_aug = sub.add_parser("augment", help="camera configuration augmentation")
    aug_sub = p_aug.add_subparsers(dest="augment_command", metavar="action")
    p = aug_sub.add_parser("sample", parents=[shared], help="emit perturbed rig JSONs")
    p.add_argument("--rig", required=True)
    p.add_argument("--spec", default=None, help="AugmentSpec JSON (default: built-in ranges)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--start-index", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_augment_sample)
    p = aug_sub.add_parser("resize", parents=[shared], help="focal resize about the principal point")
    p.add_argument("--image", required=True)
    p.add_argument("--intr", required=True, help="intrinsics JSON")
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=_cmd_augment_resize)

    p_met = sub.add_parser("metrics", help="detection score aggregation")
    met_sub = p_met.add_subparsers(dest="metrics_command", metavar="action")
    p = met_sub.add_parser("nds-star", parents=[shared], help="aggregate mAP + mATE/mASE/mAOE")
    p.add_argument("--map", type=float, default=None)
    p.add_argument("--mate", type=float, default=None)
    p.add_argument("--mase", type=float, default=None)
    p.add_argument("--maoe", type=float, default=None)
    p.add_argument("--csv", default=None, help="validate a benchmark table CSV")
    p.set_defaults(handler=_cmd_metrics_nds)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help(sys.stderr)
        return USAGE_EXIT
    try:
        cfg = _merge_config(args)
    except (ValueError, OSError) as exc:
        print(f"camprior: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    logging.basicConfig(
        level=getattr(logging, cfg.log_level.upper()),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.handler(args, cfg)
    except CamPriorError as exc:
        print(f"camprior: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"camprior: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return DATA_EXIT


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
