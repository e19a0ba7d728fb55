"""Window SAD matching with winner-takes-all disparity selection.

The left image is the reference: left pixel ``(x, y)`` is compared with
right pixel ``(x - d, y)``.  Disparity maps are ``(H, W)`` int32 arrays
holding ``UNKNOWN`` (-1) where no disparity is available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .imaging import as_plane
from .parallel import SERIAL, ExecPlan, parallel_map

UNKNOWN = -1


@dataclass(frozen=True)
class MatchConfig:
    """Window size, disparity range and left-border policy.

    By default a pixel is matched only when the whole range ``0..d_max``
    fits, i.e. ``x >= half + d_max``.  With ``truncate_left`` pixels closer
    to the left border search the shorter range that fits instead.
    """

    window: int = 9
    d_max: int = 16
    truncate_left: bool = False

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ParameterError(f"window must be odd and >= 1, got {self.window}")
        if self.d_max < 0:
            raise ParameterError(f"d_max must be >= 0, got {self.d_max}")

    @property
    def half(self) -> int:
        return self.window // 2

    @property
    def first_column(self) -> int:
        """Leftmost column that gets matched."""
        return self.half if self.truncate_left else self.half + self.d_max


def empty_disparity(shape) -> np.ndarray:
    return np.full(shape, UNKNOWN, dtype=np.int32)


def sad_cost(left: np.ndarray, right: np.ndarray, x: int, y: int, d: int, w: int) -> int:
    """Sum of absolute differences between the ``w x w`` windows at
    ``(x, y)`` in ``left`` and ``(x - d, y)`` in ``right``."""
    h = w // 2
    rows, cols = left.shape
    if not (h <= y < rows - h and h <= x < cols - h and x - d - h >= 0 and x - d + h < cols):
        raise ParameterError(f"window at ({x}, {y}) with d={d} leaves the image")
    a = left[y - h:y + h + 1, x - h:x + h + 1].astype(np.int32)
    b = right[y - h:y + h + 1, x - d - h:x - d + h + 1].astype(np.int32)
    return int(np.abs(a - b).sum())


def _window_sums(diff: np.ndarray, w: int) -> np.ndarray:
    """Sums over every full ``w x w`` window (output shrinks by ``w - 1``)."""
    c = np.cumsum(np.cumsum(diff, axis=0, dtype=np.int64), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    return c[w:, w:] - c[:-w, w:] - c[w:, :-w] + c[:-w, :-w]


def _match_rows(left, right, mask, cfg: MatchConfig, y0: int, y1: int) -> np.ndarray:
    """Disparities for rows ``y0:y1`` (all inside the vertical margin)."""
    h, w = cfg.half, cfg.window
    cols = left.shape[1]
    out = np.full((y1 - y0, cols), UNKNOWN, dtype=np.int32)
    x0 = cfg.first_column
    ys, xs = np.nonzero(mask[y0:y1, x0:cols - h])
    if len(ys) == 0:
        return out
    xs = xs + x0
    band_l = left[y0 - h:y1 + h].astype(np.int32)
    band_r = right[y0 - h:y1 + h].astype(np.int32)

    best_cost = np.full(len(ys), np.iinfo(np.int64).max, dtype=np.int64)
    best_d = np.full(len(ys), UNKNOWN, dtype=np.int32)
    for d in range(cfg.d_max + 1):
        if d > cols - 1 - 2 * h:
            break
        # window sums for left columns x in [h + d, cols - 1 - h]
        diff = np.abs(band_l[:, d:] - band_r[:, :cols - d])
        sums = _window_sums(diff, w)          # column j <-> x = j + d + h
        valid = xs - h >= d
        j = xs[valid] - d - h
        cost = sums[ys[valid], j]
        better = cost < best_cost[valid]      # strict: ties keep the smaller d
        idx = np.flatnonzero(valid)[better]
        best_cost[idx] = cost[better]
        best_d[idx] = d
    out[ys, xs] = best_d
    return out


def match_boundary_pixels(
    left: np.ndarray,
    right: np.ndarray,
    mask: np.ndarray,
    cfg: MatchConfig = MatchConfig(),
    plan: ExecPlan = SERIAL,
) -> np.ndarray:
    """Winner-takes-all SAD disparity at every matchable mask pixel.

    A pixel is matchable when its window fits in the left image and its
    column is at least ``cfg.first_column``.  Candidates whose right window
    would leave the image are skipped.  Ties go to the smallest disparity.
    Everything else is UNKNOWN.
    """
    left, right = as_plane(left), as_plane(right)
    if left.shape != right.shape:
        raise ParameterError(f"left {left.shape} and right {right.shape} differ in size")
    mask = np.asarray(mask)
    if mask.shape != left.shape:
        raise ParameterError(f"mask {mask.shape} does not match images {left.shape}")
    rows, cols = left.shape
    h = cfg.half
    out = empty_disparity(left.shape)
    if rows < cfg.window or cfg.first_column > cols - 1 - h:
        return out
    lo, hi = h, rows - h

    def task(a, b):
        return _match_rows(left, right, mask, cfg, lo + a, lo + b)

    out[lo:hi] = np.vstack(parallel_map(hi - lo, task, plan))
    return out


def count_known(dmap: np.ndarray) -> int:
    return int(np.count_nonzero(np.asarray(dmap) != UNKNOWN))
