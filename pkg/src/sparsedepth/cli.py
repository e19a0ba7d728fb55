"""Command-line interface: ``depth``, ``refocus``, ``eval`` and ``bench``.

Exit status is 0 on success, 2 for invalid arguments or unreadable inputs
and 1 when the pipeline itself fails.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .errors import ImageFormatError, ParameterError, PipelineError
from .evaluate import bad_pixel_rate, load_disparity, load_ground_truth, save_disparity
from .imaging import load_image, save_image
from .parallel import ExecPlan, reports_to_csv, run_benchmark
from .pipeline import PipelineConfig, dump_debug, estimate_depth, refocus
from .refocus import FocusSpec, parse_focus


class UsageError(Exception):
    """Bad command-line input; exits with status 2."""


def _pipeline_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", help="JSON file with PipelineConfig fields")
    g.add_argument("--k", type=int, help="number of K-Means clusters (default 10)")
    g.add_argument("--window", type=int, help="odd SAD window size (default 9)")
    g.add_argument("--max-disparity", dest="d_max", type=int, help="largest disparity searched (default 16)")
    g.add_argument("--threshold", type=int, help="reconstruction disparity threshold (default 1)")
    g.add_argument("--prune-fraction", type=float, help="share of boundary pixels pruned as small components (default 0.04)")
    g.add_argument("--truncate-left", action="store_true", default=None,
                   help="match pixels near the left border over a shortened disparity range")
    return p


def _pair_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--left", required=True, help="left image (PNG or PPM)")
    p.add_argument("--right", required=True, help="right image (PNG or PPM)")
    p.add_argument("--workers", type=int, help="worker threads (default 1)")
    p.add_argument("--debug-dir", help="write every intermediate stage as PGM here")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsedepth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    pipe, pair = _pipeline_flags(), _pair_flags()

    d = sub.add_parser("depth", parents=[pipe, pair], help="estimate a dense disparity map")
    d.add_argument("--out", required=True, help="disparity values PGM; a .mask.pgm and .json land next to it")
    d.add_argument("--out-scale", type=float, help="gray levels per disparity unit (default 255 // d_max)")

    r = sub.add_parser("refocus", parents=[pipe, pair], help="blur everything outside the focus ranges")
    r.add_argument("--out", required=True, help="output image (PNG or PPM)")
    r.add_argument("--focus", required=True, help="in-focus disparity ranges, lo:hi[,lo:hi...]")
    r.add_argument("--sigma", type=float, required=True, help="Gaussian blur level")
    r.add_argument("--kernel-size", type=int, help="odd kernel size (default 2*ceil(3*sigma)+1)")

    e = sub.add_parser("eval", help="bad-pixel rate of a disparity map against ground truth")
    e.add_argument("--computed", required=True, help="disparity values PGM written by 'depth'")
    e.add_argument("--computed-mask", help="validity mask (default: <computed>.mask.pgm if present)")
    e.add_argument("--computed-scale", type=float,
                   help="gray levels per disparity in --computed (default: from its .json, else --scale)")
    e.add_argument("--truth", required=True, help="ground-truth disparity PGM/PNG")
    e.add_argument("--scale", type=float, required=True, help="ground-truth gray levels per disparity")
    e.add_argument("--delta", type=float, default=1.0, help="disparity error tolerance (default 1.0)")

    b = sub.add_parser("bench", parents=[pipe], help="serial vs parallel timing over a frame directory")
    b.add_argument("frames_dir", help="directory of <stem>_L.* / <stem>_R.* pairs")
    b.add_argument("--workers", default="1,4", help="comma-separated worker counts (default 1,4)")
    b.add_argument("--csv", help="write the CSV here instead of standard output")
    return parser


def _config(args) -> PipelineConfig:
    base = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    overrides = {name: getattr(args, name, None)
                 for name in ("k", "window", "d_max", "threshold", "prune_fraction",
                              "truncate_left", "sigma", "kernel_size")}
    workers = getattr(args, "workers", None)
    if isinstance(workers, int):
        overrides["workers"] = workers
    return base.updated(**overrides)


def _load_pair(args):
    left, right = load_image(args.left), load_image(args.right)
    if left.shape != right.shape:
        raise UsageError(
            f"image sizes differ: left {args.left} is {left.shape[1]}x{left.shape[0]}, "
            f"right {args.right} is {right.shape[1]}x{right.shape[0]}")
    return left, right


def stats_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".json")


def cmd_depth(args) -> int:
    cfg = _config(args)
    left, right = _load_pair(args)
    scale = args.out_scale if args.out_scale is not None else 255 // max(cfg.d_max, 1)
    if not scale > 0 or scale * cfg.d_max > 255:
        raise UsageError(f"--out-scale {scale} with d_max {cfg.d_max} does not fit in 8 bits")
    result = estimate_depth(left, right, cfg)
    save_disparity(result.dense, args.out, scale, cfg.d_max)
    stats = {"output_scale": scale, "config": cfg.to_dict(), **result.stats()}
    stats_path(args.out).write_text(json.dumps(stats, indent=2) + "\n")
    if args.debug_dir:
        dump_debug(result, cfg, args.debug_dir)
    return 0


def cmd_refocus(args) -> int:
    cfg = _config(args)
    try:
        ranges = parse_focus(args.focus)
        spec = FocusSpec(ranges, args.sigma).clamped(cfg.d_max)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    left, right = _load_pair(args)
    result = estimate_depth(left, right, cfg)
    if args.debug_dir:
        dump_debug(result, cfg, args.debug_dir)
    save_image(refocus(left, result.dense, spec, cfg), args.out)
    return 0


def cmd_eval(args) -> int:
    if args.delta < 0:
        raise UsageError(f"--delta must be >= 0, got {args.delta}")
    if not args.scale > 0:
        raise UsageError(f"--scale must be > 0, got {args.scale}")
    stats = {}
    side = stats_path(args.computed)
    if side.exists():
        stats = json.loads(side.read_text())
    scale = args.computed_scale or stats.get("output_scale") or args.scale
    computed = load_disparity(args.computed, scale, args.computed_mask)
    truth = load_ground_truth(args.truth, args.scale)
    report = bad_pixel_rate(computed, truth, args.delta)
    extra = {k: stats[k] for k in ("matched_fraction", "refinement_reduction") if k in stats}
    print(report.to_json(**extra))
    return 0


_PAIR = re.compile(r"^(?P<stem>.+)_(?P<side>[LR])\.(png|ppm)$", re.IGNORECASE)


def find_pairs(directory) -> list[tuple[Path, Path]]:
    directory = Path(directory)
    if not directory.is_dir():
        raise UsageError(f"{directory} is not a directory")
    sides: dict[str, dict[str, Path]] = {}
    for path in sorted(directory.iterdir()):
        m = _PAIR.match(path.name)
        if m:
            sides.setdefault(m["stem"], {})[m["side"].upper()] = path
    return [(s["L"], s["R"]) for _, s in sorted(sides.items()) if {"L", "R"} <= s.keys()]


def parse_workers(text: str) -> list[int]:
    try:
        counts = [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed worker list {text!r}") from None
    if not counts or any(c < 1 for c in counts):
        raise UsageError(f"worker counts must be >= 1, got {text!r}")
    if 1 not in counts:
        counts.insert(0, 1)
    return list(dict.fromkeys(counts))


def cmd_bench(args) -> int:
    counts = parse_workers(args.workers)
    cfg = _config(args)
    pairs = find_pairs(args.frames_dir)
    if not pairs:
        raise UsageError(f"no <stem>_L / <stem>_R pairs found in {args.frames_dir}")
    frames = [(load_image(lp), load_image(rp)) for lp, rp in pairs]
    reports = run_benchmark(frames, [ExecPlan(c) for c in counts], cfg)
    text = reports_to_csv(reports)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"depth": cmd_depth, "refocus": cmd_refocus, "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError, ImageFormatError, FileNotFoundError,
            IsADirectoryError, PermissionError) as exc:
        print(f"sparsedepth {args.command}: {exc}", file=sys.stderr)
        return 2
    except (PipelineError, OSError) as exc:
        print(f"sparsedepth {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
