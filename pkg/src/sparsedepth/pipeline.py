"""End-to-end depth estimation and refocusing."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .boundary import add_border_anchors, detect_boundaries, morph_fill, morph_remove, prune_components
from .errors import ParameterError
from .imaging import as_rgb, rgb_to_lightness
from .parallel import SERIAL, ExecPlan, StageTimer
from .reconstruct import ReconstructionConfig, fill_scanlines, peek_columns
from .refocus import FocusSpec, build_blur_map, gaussian_kernel, selective_blur
from .segmentation import segment
from .stereo import MatchConfig, count_known, match_boundary_pixels


@dataclass(frozen=True)
class PipelineConfig:
    """All tunables of a depth run.  Defaults follow the Tsukuba setting
    except the reconstruction threshold (1, the majority choice)."""

    k: int = 10
    window: int = 9
    d_max: int = 16
    threshold: int = 1
    prune_fraction: float = 0.04
    workers: int = 1
    sigma: float = 4.0
    kernel_size: int | None = None
    truncate_left: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.window < 1 or self.window % 2 == 0:
            raise ParameterError(f"window must be odd and >= 1, got {self.window}")
        if self.d_max < 0:
            raise ParameterError(f"max disparity must be >= 0, got {self.d_max}")
        if self.threshold < 0:
            raise ParameterError(f"threshold must be >= 0, got {self.threshold}")
        if not 0 <= self.prune_fraction < 1:
            raise ParameterError(f"prune fraction must be in [0, 1), got {self.prune_fraction}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        if self.kernel_size is not None and (self.kernel_size < 1 or self.kernel_size % 2 == 0):
            raise ParameterError(f"kernel size must be odd and >= 1, got {self.kernel_size}")

    @property
    def match(self) -> MatchConfig:
        return MatchConfig(self.window, self.d_max, self.truncate_left)

    @property
    def reconstruction(self) -> ReconstructionConfig:
        return ReconstructionConfig(self.threshold)

    @property
    def plan(self) -> ExecPlan:
        return ExecPlan(self.workers)

    def updated(self, **changes) -> PipelineConfig:
        known = {f.name for f in fields(self)}
        return replace(self, **{k: v for k, v in changes.items() if k in known and v is not None})

    @classmethod
    def from_json(cls, path) -> PipelineConfig:
        with open(path) as fh:
            data = json.load(fh)
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DepthResult:
    """Every intermediate of one run, for debugging and statistics."""

    lightness_left: np.ndarray
    lightness_right: np.ndarray
    labels: np.ndarray
    raw_boundary: np.ndarray
    filled_boundary: np.ndarray
    thinned_boundary: np.ndarray
    pruned_boundary: np.ndarray
    anchored_boundary: np.ndarray
    sparse: np.ndarray
    scanfilled: np.ndarray
    dense: np.ndarray

    def stats(self) -> dict:
        pixels = self.dense.size
        raw = int(self.raw_boundary.sum())
        refined = int(self.pruned_boundary.sum())
        matched = count_known(self.sparse)
        return {
            "pixels": pixels,
            "raw_boundary": raw,
            "refined_boundary": refined,
            "refinement_reduction": (raw - refined) / raw if raw else 0.0,
            "matched": matched,
            "matched_fraction": matched / pixels,
            "known_after_fill": count_known(self.scanfilled),
            "known_dense": count_known(self.dense),
        }


def estimate_depth(
    left_rgb: np.ndarray,
    right_rgb: np.ndarray,
    cfg: PipelineConfig = PipelineConfig(),
    plan: ExecPlan | None = None,
    timer: StageTimer | None = None,
) -> DepthResult:
    """Lightness, segmentation, boundary refinement, matching, reconstruction."""
    left_rgb, right_rgb = as_rgb(left_rgb), as_rgb(right_rgb)
    if left_rgb.shape != right_rgb.shape:
        raise ParameterError(
            f"left image is {left_rgb.shape[1]}x{left_rgb.shape[0]} but right image is "
            f"{right_rgb.shape[1]}x{right_rgb.shape[0]}")
    plan = plan or cfg.plan
    timer = timer or StageTimer()
    match = cfg.match
    margin = match.half
    if match.first_column > left_rgb.shape[1] - 1 - margin:
        raise ParameterError(
            f"image width {left_rgb.shape[1]} leaves no room for window {cfg.window} "
            f"and d_max {cfg.d_max}")

    with timer.time("lightness"):
        lum_l = rgb_to_lightness(left_rgb, plan)
        lum_r = rgb_to_lightness(right_rgb, plan)
    with timer.time("segmentation"):
        labels, _ = segment(lum_l, cfg.k, plan)
    with timer.time("boundary"):
        raw = detect_boundaries(labels, plan)
    with timer.time("morphology"):
        filled = morph_fill(raw, plan)
        thinned = morph_remove(filled, plan)
    with timer.time("components"):
        pruned = prune_components(thinned, cfg.prune_fraction)
        anchored = add_border_anchors(pruned, margin, match.first_column)
    with timer.time("matching"):
        sparse = match_boundary_pixels(lum_l, lum_r, anchored, match, plan)
    with timer.time("fill"):
        scanfilled = fill_scanlines(sparse, plan)
    with timer.time("peek"):
        dense = peek_columns(scanfilled, cfg.reconstruction, plan)

    return DepthResult(lum_l, lum_r, labels, raw, filled, thinned, pruned, anchored,
                       sparse, scanfilled, dense)


def refocus(
    image: np.ndarray,
    depth: np.ndarray,
    spec: FocusSpec,
    cfg: PipelineConfig = PipelineConfig(),
    plan: ExecPlan | None = None,
) -> np.ndarray:
    blur_map = build_blur_map(depth, spec, cfg.d_max)
    kernel = gaussian_kernel(spec.sigma, cfg.kernel_size)
    return selective_blur(image, blur_map, kernel, plan or cfg.plan)


def label_image(labels: np.ndarray, k: int) -> np.ndarray:
    """Spread cluster indices over 0..255 for viewing."""
    if k <= 1:
        return np.zeros(labels.shape, dtype=np.uint8)
    return (labels.astype(np.int64) * 255 // (k - 1)).astype(np.uint8)


def dump_debug(result: DepthResult, cfg: PipelineConfig, directory) -> list[Path]:
    """Write every stage as a PGM into ``directory``."""
    from .imaging import save_gray

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    scale = 255 // max(cfg.d_max, 1)

    def disp(m):
        return np.where(m >= 0, m * scale, 0).astype(np.uint8)

    images = {
        "lightness_left": result.lightness_left,
        "lightness_right": result.lightness_right,
        "segments": label_image(result.labels, cfg.k),
        "boundary_raw": result.raw_boundary * 255,
        "boundary_morph": result.thinned_boundary * 255,
        "boundary_pruned": result.pruned_boundary * 255,
        "boundary_anchored": result.anchored_boundary * 255,
        "disparity_sparse": disp(result.sparse),
        "disparity_fill": disp(result.scanfilled),
        "disparity_dense": disp(result.dense),
    }
    written = []
    for name, plane in images.items():
        path = directory / f"{name}.pgm"
        save_gray(plane.astype(np.uint8), path)
        written.append(path)
    return written
