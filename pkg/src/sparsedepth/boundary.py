"""Segment boundary detection and refinement.

Masks are ``(H, W)`` uint8 arrays of 0/1.  Detection and the two
morphological filters are per-pixel maps over the input and run over row
bands; component labelling is sequential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .parallel import SERIAL, ExecPlan, map_rows

MOORE = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]
VON_NEUMANN = [(-1, 0), (0, -1), (0, 1), (1, 0)]


def _as_mask(mask) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ParameterError(f"mask must be 2-D, got shape {mask.shape}")
    return (mask != 0).astype(np.uint8)


def _shifted(padded: np.ndarray, a: int, b: int, dy: int, dx: int) -> np.ndarray:
    """Rows ``a:b`` of the unpadded image, offset by (dy, dx), from a 1-px pad."""
    w = padded.shape[1] - 2
    return padded[a + 1 + dy:b + 1 + dy, 1 + dx:1 + dx + w]


def detect_boundaries(labels: np.ndarray, plan: ExecPlan = SERIAL) -> np.ndarray:
    """Mark pixels whose Moore neighbourhood contains a different label.

    Out-of-image neighbours are ignored.  Edge replication implements that
    exactly: a clamped neighbour is always the pixel itself or one of its
    in-image neighbours.
    """
    labels = np.asarray(labels)
    padded = np.pad(labels, 1, mode="edge")

    def band(a, b):
        centre = labels[a:b]
        diff = np.zeros(centre.shape, dtype=bool)
        for dy, dx in MOORE:
            diff |= _shifted(padded, a, b, dy, dx) != centre
        return diff

    out = np.empty(labels.shape, dtype=np.uint8)
    return map_rows(out, band, plan)


def morph_fill(mask: np.ndarray, plan: ExecPlan = SERIAL) -> np.ndarray:
    """Turn on a 0-pixel whose eight neighbours all exist and are 1."""
    mask = _as_mask(mask)
    padded = np.pad(mask, 1)  # zero pad: missing neighbours block the fill

    def band(a, b):
        full = np.ones((b - a, mask.shape[1]), dtype=bool)
        for dy, dx in MOORE:
            full &= _shifted(padded, a, b, dy, dx) == 1
        return mask[a:b] | full

    out = np.empty_like(mask)
    return map_rows(out, band, plan)


def morph_remove(mask: np.ndarray, plan: ExecPlan = SERIAL) -> np.ndarray:
    """Turn off a 1-pixel whose four edge neighbours all exist and are 1."""
    mask = _as_mask(mask)
    padded = np.pad(mask, 1)

    def band(a, b):
        interior = mask[a:b] == 1
        for dy, dx in VON_NEUMANN:
            interior &= _shifted(padded, a, b, dy, dx) == 1
        return mask[a:b] & ~interior

    out = np.empty_like(mask)
    return map_rows(out, band, plan)


@dataclass(frozen=True)
class ComponentTable:
    """8-connected components of a mask.

    ``labels`` holds 0 for background and 1..n for components, numbered in
    raster order of each component's first pixel.  ``sizes[i]`` is the pixel
    count of label ``i + 1``; ``order`` lists labels smallest first, ties by
    label.
    """

    labels: np.ndarray
    sizes: np.ndarray
    order: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes)


def label_components(mask: np.ndarray) -> ComponentTable:
    mask = _as_mask(mask)
    raw, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if n:
        # renumber by first appearance so numbering never depends on the labeller
        flat = raw.ravel()
        ids, first = np.unique(flat, return_index=True)
        keep = ids > 0
        ids, first = ids[keep], first[keep]
        remap = np.zeros(n + 1, dtype=np.int64)
        remap[ids[np.argsort(first)]] = np.arange(1, n + 1)
        raw = remap[raw]
    labels = raw.astype(np.int32)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:].astype(np.int64)
    order = np.lexsort((np.arange(1, n + 1), sizes)) + 1
    return ComponentTable(labels, sizes, order.astype(np.int64))


def components_to_remove(sizes_in_order: np.ndarray, budget: float) -> int:
    """How many leading (smallest) components fit in ``budget`` pixels."""
    cum = np.cumsum(sizes_in_order)
    return int(np.searchsorted(cum, budget, side="right"))


def prune_components(mask: np.ndarray, fraction: float = 0.04) -> np.ndarray:
    """Drop the smallest components while their total stays within budget.

    The budget is ``fraction`` of all mask pixels.  Components go smallest
    first and removal stops before the first one that would overshoot.
    """
    if not 0 <= fraction < 1:
        raise ParameterError(f"prune fraction must be in [0, 1), got {fraction}")
    mask = _as_mask(mask)
    table = label_components(mask)
    if table.count == 0 or fraction == 0:
        return mask
    total = int(table.sizes.sum())
    n_drop = components_to_remove(table.sizes[table.order - 1], fraction * total)
    drop = np.zeros(table.count + 1, dtype=bool)
    drop[table.order[:n_drop]] = True
    out = mask.copy()
    out[drop[table.labels]] = 0
    return out


def add_border_anchors(mask: np.ndarray, margin: int, left_column: int | None = None) -> np.ndarray:
    """Mark columns ``margin`` and ``width - 1 - margin`` as boundary pixels.

    Only rows ``margin .. height - 1 - margin`` are marked, so every anchor
    has a full matching window when ``margin`` is the half window.
    ``left_column`` moves the left anchor inwards, to where matching starts.
    """
    mask = _as_mask(mask)
    h, w = mask.shape
    if margin < 0 or 2 * margin >= w:
        raise ParameterError(f"anchor margin {margin} too large for width {w}")
    left = margin if left_column is None else left_column
    if not margin <= left <= w - 1 - margin:
        raise ParameterError(f"left anchor column {left} outside [{margin}, {w - 1 - margin}]")
    out = mask.copy()
    rows = slice(margin, h - margin)
    out[rows, left] = 1
    out[rows, w - 1 - margin] = 1
    return out


def refine(raw: np.ndarray, fraction: float = 0.04, plan: ExecPlan = SERIAL):
    """Fill, then remove, then prune; returns the three stage masks."""
    filled = morph_fill(raw, plan)
    thinned = morph_remove(filled, plan)
    pruned = prune_components(thinned, fraction)
    return filled, thinned, pruned
