#!/usr/bin/env python3
"""Measure splat-renderer throughput against scene size and thread count.

Example:
    python scripts/benchmark_render.py --sizes 1e5 1e6 --threads 1 4
"""

import argparse
import time

import numpy as np

from camprior.render import max_threads, render, set_threads
from camprior.rig import preset_rig
from camprior.scene import GaussianScene, radius_schedule


def make_scene(n: int, seed: int = 0) -> GaussianScene:
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    centers = (dirs * rng.uniform(8.0, 20.0, (n, 1))).astype(np.float32)
    return GaussianScene(
        centers=centers,
        radii=radius_schedule(centers[:, 2].astype(np.float64), False).astype(np.float32),
        colors=rng.uniform(0, 1, (n, 3)).astype(np.float32),
        foreground=np.zeros(n, bool),
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", nargs="+", type=float, default=[1e5, 1e6])
    parser.add_argument("--threads", nargs="+", type=int, default=[1, 4])
    parser.add_argument("--width", type=int, default=704)
    parser.add_argument("--height", type=int, default=396)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    cam = preset_rig("nuscenes").camera("front")
    intr = cam.intrinsics.scaled_to(args.width, args.height)

    set_threads(1)
    render(make_scene(256), intr, cam.extrinsics)  # JIT warmup

    print(f"target {args.width}x{args.height}, thread max {max_threads()}")
    for n in (int(s) for s in args.sizes):
        scene = make_scene(n)
        for threads in args.threads:
            eff = set_threads(threads)
            best = float("inf")
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                out = render(scene, intr, cam.extrinsics)
                best = min(best, time.perf_counter() - t0)
            fps = 1.0 / best
            print(
                f"n={n:>9d} threads={eff} best={best * 1e3:8.1f} ms "
                f"({fps:6.1f} fps, {out.hit_mask.sum():>7d} px hit)"
            )
    set_threads(0)


if __name__ == "__main__":
    main()
