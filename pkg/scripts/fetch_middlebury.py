#!/usr/bin/env python3
"""Download the Tsukuba, Sawtooth and Venus pairs from the Middlebury site.

Files land in ``data/middlebury/<scene>/`` as ``left.ppm``, ``right.ppm``
and ``truth.pgm``, which is where the acceptance suite looks.
"""

import argparse
import sys
import urllib.request
from pathlib import Path

BASE = "https://vision.middlebury.edu/stereo/data/scenes2001/data"

# scene -> (left, right, truth); truth scale is 16 for tsukuba, 8 for the others
FILES = {
    "tsukuba": ("scene1.row3.col3.ppm", "scene1.row3.col4.ppm", "truedisp.row3.col3.pgm"),
    "sawtooth": ("im2.ppm", "im6.ppm", "disp2.pgm"),
    "venus": ("im2.ppm", "im6.ppm", "disp2.pgm"),
}


def fetch(scene: str, dest: Path, force: bool = False) -> None:
    dest.mkdir(parents=True, exist_ok=True)
    for remote, local in zip(FILES[scene], ("left.ppm", "right.ppm", "truth.pgm")):
        target = dest / local
        if target.exists() and not force:
            continue
        url = f"{BASE}/{scene}/{remote}"
        print(f"{url} -> {target}")
        with urllib.request.urlopen(url, timeout=60) as resp:
            target.write_bytes(resp.read())


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--root", default=Path(__file__).resolve().parent.parent / "data" / "middlebury", type=Path)
    p.add_argument("--scenes", nargs="+", default=list(FILES), choices=list(FILES))
    p.add_argument("--force", action="store_true", help="download even if the file exists")
    args = p.parse_args(argv)
    try:
        for scene in args.scenes:
            fetch(scene, args.root / scene, args.force)
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
