"""Synthetic rectified stereo pairs with exact ground truth.

A scene is a stack of fronto-parallel textured layers: a background plane
and a few rectangles or discs in front of it, each at its own integer
disparity.  Both views are rendered from the same per-layer texture, so
every visible left pixel has a known disparity and occlusions come out
right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


@dataclass
class StereoScene:
    left: np.ndarray       # (H, W, 3) uint8
    right: np.ndarray      # (H, W, 3) uint8
    disparity: np.ndarray  # (H, W) int32, true disparity of every left pixel


def _texture(rng, shape, smooth: float, grain: float) -> np.ndarray:
    """Smooth colour blobs plus a little per-pixel grain."""
    base = rng.uniform(40, 215, size=3)
    blobs = rng.normal(0.0, 1.0, size=shape + (3,))
    if smooth > 0:
        blobs = ndimage.gaussian_filter(blobs, sigma=(smooth, smooth, 0))
    blobs /= blobs.std() + 1e-12
    tex = base + 35.0 * blobs + grain * rng.normal(0.0, 1.0, size=shape + (3,))
    return np.clip(tex, 0, 255)


def layered_scene(
    width: int = 128,
    height: int = 96,
    d_max: int = 16,
    layers: int = 3,
    seed: int | None = 0,
    smooth: float = 6.0,
    grain: float = 4.0,
) -> StereoScene:
    """Random layered scene; layers nearer the camera get larger disparities."""
    rng = np.random.default_rng(seed)
    wide = width + 2 * d_max
    disps = np.sort(rng.choice(np.arange(0, d_max + 1), size=layers + 1, replace=layers + 1 > d_max + 1))
    textures = [_texture(rng, (height, wide), smooth, grain) for _ in range(layers + 1)]

    yy, xx = np.mgrid[0:height, 0:width]
    owner_l = np.zeros((height, width), dtype=np.int64)
    shapes = []
    for i in range(1, layers + 1):
        cx, cy = rng.uniform(0.15, 0.85) * width, rng.uniform(0.15, 0.85) * height
        rx, ry = rng.uniform(0.08, 0.3) * width, rng.uniform(0.08, 0.3) * height
        disc = bool(rng.integers(2))
        shapes.append((cx, cy, rx, ry, disc))

    def covers(i, x, y):
        cx, cy, rx, ry, disc = shapes[i - 1]
        if disc:
            return ((x - cx) / rx) ** 2 + ((y - cy) / ry) ** 2 <= 1.0
        return (np.abs(x - cx) <= rx) & (np.abs(y - cy) <= ry)

    # left view: layer i occupies its shape at scene coordinate x
    for i in range(1, layers + 1):
        owner_l[covers(i, xx, yy)] = i
    # right view: pixel x_r sees layer i where x_r + d_i falls inside the shape
    owner_r = np.zeros((height, width), dtype=np.int64)
    for i in range(1, layers + 1):
        owner_r[covers(i, xx + disps[i], yy)] = i

    left = np.empty((height, width, 3))
    right = np.empty((height, width, 3))
    for i in range(layers + 1):
        sel = owner_l == i
        left[sel] = textures[i][yy[sel], xx[sel] + d_max]
        sel = owner_r == i
        right[sel] = textures[i][yy[sel], xx[sel] + disps[i] + d_max]

    return StereoScene(
        np.floor(left + 0.5).astype(np.uint8),
        np.floor(right + 0.5).astype(np.uint8),
        disps[owner_l].astype(np.int32),
    )


def shifted_pair(image: np.ndarray, shift: int, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """``right[:, x - shift] = left[:, x]``; the uncovered strip is random."""
    rng = np.random.default_rng(rng)
    right = rng.integers(0, 256, size=image.shape, dtype=np.uint8)
    w = image.shape[1]
    right[:, :w - shift] = image[:, shift:]
    return image, right


def random_frames(n: int, width: int, height: int, d_max: int = 16, seed: int = 0):
    """``n`` layered scenes as ``(left, right)`` tuples."""
    return [
        (s.left, s.right)
        for s in (layered_scene(width, height, d_max, seed=seed + i) for i in range(n))
    ]
