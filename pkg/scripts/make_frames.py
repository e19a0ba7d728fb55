#!/usr/bin/env python3
"""Write synthetic stereo frames as ``<stem>_L.ppm`` / ``<stem>_R.ppm`` for ``bench``."""

import argparse
import sys
from pathlib import Path

from sparsedepth.imaging import save_image
from sparsedepth.synthetic import layered_scene


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--width", type=int, default=1024)
    ap.add_argument("--height", type=int, default=768)
    ap.add_argument("--max-disparity", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        s = layered_scene(args.width, args.height, args.max_disparity, seed=args.seed + i)
        save_image(s.left, args.out / f"frame{i:04d}_L.ppm")
        save_image(s.right, args.out / f"frame{i:04d}_R.ppm")
    print(f"wrote {args.count} pairs to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
