"""Dense disparity from sparse boundary disparities.

Two passes.  ``fill_scanlines`` walks each row and, between two consecutive
known pixels carrying the same disparity, writes that disparity into the
unknown gap.  ``peek_columns`` then estimates every remaining unknown pixel
from the two nearest known pixels in its column, reading only the
fill-stage snapshot so that processing order cannot matter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .parallel import SERIAL, ExecPlan, map_rows
from .stereo import UNKNOWN


@dataclass(frozen=True)
class ReconstructionConfig:
    disparity_threshold: int = 1

    def __post_init__(self):
        if self.disparity_threshold < 0:
            raise ParameterError("disparity threshold must be >= 0")


def _nearest_known(known: np.ndarray, axis: int):
    """Index of the nearest known cell at or before / at or after each cell.

    Missing neighbours are -1 (before) and ``n`` (after).
    """
    n = known.shape[axis]
    shape = [1, 1]
    shape[axis] = n
    pos = np.arange(n).reshape(shape)
    before = np.maximum.accumulate(np.where(known, pos, -1), axis=axis)
    flipped = np.flip(np.where(known, pos, n), axis=axis)
    after = np.flip(np.minimum.accumulate(flipped, axis=axis), axis=axis)
    return before, after


def _fill_rows(rows: np.ndarray) -> np.ndarray:
    known = rows != UNKNOWN
    before, after = _nearest_known(known, axis=1)
    w = rows.shape[1]
    inside = ~known & (before >= 0) & (after < w)
    left_val = np.take_along_axis(rows, np.clip(before, 0, w - 1), axis=1)
    right_val = np.take_along_axis(rows, np.clip(after, 0, w - 1), axis=1)
    fill = inside & (left_val == right_val)
    return np.where(fill, left_val, rows)


def fill_scanlines(sparse: np.ndarray, plan: ExecPlan = SERIAL) -> np.ndarray:
    """Propagate equal disparities along rows between consecutive known pixels."""
    sparse = np.asarray(sparse, dtype=np.int32)
    out = np.empty_like(sparse)
    return map_rows(out, lambda a, b: _fill_rows(sparse[a:b]), plan)


def _peek_cols(cols: np.ndarray, threshold: int) -> np.ndarray:
    h = cols.shape[0]
    known = cols != UNKNOWN
    above, below = _nearest_known(known, axis=0)
    # nearest known strictly above/below a row, used to find second neighbours
    strict_above = np.vstack([np.full((1, cols.shape[1]), -1), above[:-1]])
    strict_below = np.vstack([below[1:], np.full((1, cols.shape[1]), h)])

    has_up, has_down = above >= 0, below < h
    first = np.where(has_up, above, below)
    second = np.where(
        has_up & has_down, below,
        np.where(has_up,
                 np.take_along_axis(strict_above, np.clip(above, 0, h - 1), axis=0),
                 np.take_along_axis(strict_below, np.clip(below, 0, h - 1), axis=0)),
    )
    has_first = has_up | has_down
    has_second = has_first & (second >= 0) & (second < h)

    v1 = np.take_along_axis(cols, np.clip(first, 0, h - 1), axis=0).astype(np.int64)
    v2 = np.take_along_axis(cols, np.clip(second, 0, h - 1), axis=0).astype(np.int64)
    lo, hi = np.minimum(v1, v2), np.maximum(v1, v2)
    # mean of two integers, .5 rounded down
    pair = np.where(hi - lo > threshold, lo, (v1 + v2) // 2)
    estimate = np.where(has_second, pair, v1)
    estimate = np.where(has_first, estimate, UNKNOWN)
    return np.where(known, cols, estimate).astype(np.int32)


def peek_columns(
    filled: np.ndarray,
    cfg: ReconstructionConfig = ReconstructionConfig(),
    plan: ExecPlan = SERIAL,
) -> np.ndarray:
    """Estimate unknown pixels from the two nearest known pixels in their column.

    The two neighbours are the nearest above and the nearest below; when one
    side is empty, the two nearest on the other side.  A spread above the
    threshold takes the smaller disparity, otherwise the mean.  A column
    with a single known pixel copies it; an empty column stays unknown.
    """
    filled = np.asarray(filled, dtype=np.int32)
    out = np.empty_like(filled)
    thr = cfg.disparity_threshold
    return map_rows(out, lambda a, b: _peek_cols(filled[:, a:b], thr), plan, axis=1)


def reconstruct(sparse: np.ndarray, cfg: ReconstructionConfig = ReconstructionConfig(),
                plan: ExecPlan = SERIAL) -> tuple[np.ndarray, np.ndarray]:
    filled = fill_scanlines(sparse, plan)
    return filled, peek_columns(filled, cfg, plan)
