"""Accuracy against ground truth, the dense SAD baseline, disparity files."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .imaging import load_gray, save_gray
from .parallel import SERIAL, ExecPlan, parallel_map
from .stereo import UNKNOWN, MatchConfig, match_boundary_pixels


@dataclass(frozen=True)
class EvalReport:
    bad_pixel_rate: float
    compared: int
    excluded: int
    delta_d: float

    def to_json(self, **extra) -> str:
        return json.dumps({**asdict(self), **extra})


def bad_pixel_rate(
    computed: np.ndarray,
    truth: np.ndarray,
    delta_d: float = 1.0,
    plan: ExecPlan = SERIAL,
) -> EvalReport:
    """Fraction of compared pixels whose error exceeds ``delta_d``.

    A pixel is compared only when both maps know its disparity; the rest are
    counted as excluded.  With nothing to compare the rate is 0.
    """
    computed, truth = np.asarray(computed), np.asarray(truth)
    if computed.shape != truth.shape:
        raise ParameterError(f"computed {computed.shape} and truth {truth.shape} differ in size")
    if delta_d < 0:
        raise ParameterError(f"delta_d must be >= 0, got {delta_d}")

    def partial(a, b):
        c, t = computed[a:b].astype(np.int64), truth[a:b].astype(np.int64)
        valid = (c != UNKNOWN) & (t != UNKNOWN)
        bad = valid & (np.abs(c - t) > delta_d)
        return int(valid.sum()), int(bad.sum())

    sums = parallel_map(computed.shape[0], partial, plan)
    n = sum(s[0] for s in sums)
    bad = sum(s[1] for s in sums)
    return EvalReport(bad / n if n else 0.0, n, computed.size - n, float(delta_d))


def gray_to_disparity(values: np.ndarray, scale: float) -> np.ndarray:
    """Stored gray ``v`` to disparity ``round(v / scale)``; ``0`` means unknown."""
    if not scale > 0:
        raise ParameterError(f"scale must be > 0, got {scale}")
    values = np.asarray(values)
    d = np.floor(values / scale + 0.5).astype(np.int32)
    return np.where(values == 0, UNKNOWN, d).astype(np.int32)


def load_ground_truth(path, scale: float) -> np.ndarray:
    return gray_to_disparity(load_gray(path), scale)


def mask_path(path) -> Path:
    """Validity-mask companion of a disparity values file."""
    path = Path(path)
    return path.with_name(path.stem + ".mask" + (path.suffix or ".pgm"))


def save_disparity(dmap: np.ndarray, path, output_scale: float, d_max: int | None = None) -> Path:
    """Write values and validity mask PGMs; returns the mask path.

    Known ``d`` is stored as ``round(d * output_scale)`` and unknown as 0; the
    mask is 255 where known.  ``output_scale * d_max`` must fit in a byte.
    """
    dmap = np.asarray(dmap)
    if not output_scale > 0:
        raise ParameterError(f"output scale must be > 0, got {output_scale}")
    known = dmap != UNKNOWN
    top = d_max if d_max is not None else int(dmap[known].max(initial=0))
    if output_scale * top > 255:
        raise ParameterError(f"output scale {output_scale} x d_max {top} exceeds 255")
    values = np.where(known, np.floor(dmap * output_scale + 0.5), 0).astype(np.uint8)
    save_gray(values, path)
    mpath = mask_path(path)
    save_gray(np.where(known, 255, 0).astype(np.uint8), mpath)
    return mpath


def load_disparity(path, scale: float, mask=None) -> np.ndarray:
    """Read a values PGM back into a disparity map.

    The mask file next to ``path`` decides validity when it exists (or when
    given explicitly); otherwise a stored 0 means unknown.
    """
    values = load_gray(path)
    if mask is None and mask_path(path).exists():
        mask = mask_path(path)
    if mask is None:
        return gray_to_disparity(values, scale)
    valid = load_gray(mask) != 0
    if valid.shape != values.shape:
        raise ParameterError(f"mask {valid.shape} does not match values {values.shape}")
    d = np.floor(values / scale + 0.5).astype(np.int32)
    return np.where(valid, d, UNKNOWN).astype(np.int32)


def dense_sad_baseline(
    left: np.ndarray,
    right: np.ndarray,
    cfg: MatchConfig = MatchConfig(),
    plan: ExecPlan = SERIAL,
) -> np.ndarray:
    """Winner-takes-all SAD at every pixel, no segmentation."""
    left = np.asarray(left)
    if left.shape != np.asarray(right).shape:
        raise ParameterError(f"left {left.shape} and right {np.asarray(right).shape} differ in size")
    return match_boundary_pixels(left, right, np.ones(left.shape, dtype=np.uint8), cfg, plan)
