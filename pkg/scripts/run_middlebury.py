#!/usr/bin/env python3
"""Bad-pixel rates of the boundary pipeline and of dense SAD on Middlebury pairs.

Prints one row per scene: our B, dense SAD B, matched fraction and
refinement reduction.  Expects the layout written by fetch_middlebury.py.
"""

import argparse
import sys
from pathlib import Path

from sparsedepth import PipelineConfig, estimate_depth
from sparsedepth.evaluate import bad_pixel_rate, dense_sad_baseline, load_ground_truth
from sparsedepth.imaging import load_image

SCENES = {
    "tsukuba": dict(scale=16, d_max=16, threshold=0),
    "sawtooth": dict(scale=8, d_max=20, threshold=1),
    "venus": dict(scale=8, d_max=20, threshold=1),
}


def evaluate(root: Path, name: str, workers: int) -> dict:
    p = SCENES[name]
    d = root / name
    left, right = load_image(d / "left.ppm"), load_image(d / "right.ppm")
    truth = load_ground_truth(d / "truth.pgm", p["scale"])
    cfg = PipelineConfig(d_max=p["d_max"], threshold=p["threshold"], workers=workers)
    result = estimate_depth(left, right, cfg)
    ours = bad_pixel_rate(result.dense, truth)
    sad = bad_pixel_rate(dense_sad_baseline(result.lightness_left, result.lightness_right, cfg.match, cfg.plan), truth)
    stats = result.stats()
    return dict(scene=name, ours=ours.bad_pixel_rate, sad=sad.bad_pixel_rate,
                matched=stats["matched_fraction"], reduction=stats["refinement_reduction"])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--root", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "middlebury")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    print(f"{'scene':10} {'ours B':>8} {'SAD B':>8} {'matched':>8} {'reduction':>9}")
    for name in SCENES:
        if not (args.root / name / "truth.pgm").exists():
            print(f"{name:10} missing, run scripts/fetch_middlebury.py")
            continue
        r = evaluate(args.root, name, args.workers)
        print(f"{name:10} {r['ours']:8.2%} {r['sad']:8.2%} {r['matched']:8.2%} {r['reduction']:9.2%}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
