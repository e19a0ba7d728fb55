"""Depth-based selective blurring."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .imaging import as_rgb
from .parallel import SERIAL, ExecPlan, map_rows
from .stereo import UNKNOWN


@dataclass(frozen=True)
class FocusSpec:
    """Inclusive disparity ranges to keep sharp and the blur strength."""

    ranges: tuple[tuple[int, int], ...]
    sigma: float

    def __post_init__(self):
        if not self.ranges:
            raise ParameterError("at least one focus range is required")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be > 0, got {self.sigma}")
        for lo, hi in self.ranges:
            if not 0 <= lo <= hi:
                raise ParameterError(f"bad focus range {lo}:{hi}")

    def check(self, d_max: int) -> None:
        for lo, hi in self.ranges:
            if hi > d_max:
                raise ParameterError(f"focus range {lo}:{hi} exceeds d_max={d_max}")

    def clamped(self, d_max: int) -> FocusSpec:
        ranges = tuple((lo, min(hi, d_max)) for lo, hi in self.ranges if lo <= d_max)
        return FocusSpec(ranges, self.sigma)


_RANGE = re.compile(r"^\s*(\d+)\s*:\s*(\d+)\s*$")


def parse_focus(text: str) -> tuple[tuple[int, int], ...]:
    """Parse ``"lo:hi[,lo:hi...]"`` into a tuple of ranges."""
    ranges = []
    for part in text.split(","):
        m = _RANGE.match(part)
        if not m:
            raise ParameterError(f"malformed focus range {part!r} (expected lo:hi)")
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise ParameterError(f"focus range {part!r} has lo > hi")
        ranges.append((lo, hi))
    return tuple(ranges)


@dataclass(frozen=True)
class GaussianKernel:
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def default_kernel_size(sigma: float) -> int:
    return 2 * math.ceil(3 * sigma) + 1


def gaussian_kernel(sigma: float, size: int | None = None) -> GaussianKernel:
    """``exp(-(n1^2 + n2^2) / (2 sigma^2))`` over a centred grid, normalised to sum 1."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if size is None:
        size = default_kernel_size(sigma)
    if size < 1 or size % 2 == 0:
        raise ParameterError(f"kernel size must be odd and >= 1, got {size}")
    r = (size - 1) // 2
    n = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(n[:, None] ** 2 + n[None, :] ** 2) / (2.0 * sigma * sigma))
    return GaussianKernel(g / g.sum())


def build_blur_map(depth: np.ndarray, spec: FocusSpec, d_max: int | None = None) -> np.ndarray:
    """1 where the pixel gets blurred: unknown, or outside every focus range."""
    if d_max is not None:
        spec.check(d_max)
    depth = np.asarray(depth)
    keep = np.zeros(depth.shape, dtype=bool)
    for lo, hi in spec.ranges:
        keep |= (depth >= lo) & (depth <= hi)
    keep &= depth != UNKNOWN
    return (~keep).astype(np.uint8)


def blur_image(image: np.ndarray, kernel: GaussianKernel, plan: ExecPlan = SERIAL) -> np.ndarray:
    """Convolve each channel with ``kernel`` (edge-replicated), as float64."""
    image = as_rgb(image)
    r = kernel.size // 2
    padded = np.pad(image.astype(np.float64), ((r, r), (r, r), (0, 0)), mode="edge")
    # kernel is symmetric, so correlation equals convolution
    weights = kernel.weights

    def band(a, b):
        src = padded[a:b + 2 * r]
        chans = [ndimage.correlate(src[..., c], weights, mode="nearest")[r:r + b - a, r:-r or None]
                 for c in range(3)]
        return np.stack(chans, axis=-1)

    out = np.empty(image.shape, dtype=np.float64)
    return map_rows(out, band, plan)


def selective_blur(
    image: np.ndarray,
    blur_map: np.ndarray,
    kernel: GaussianKernel,
    plan: ExecPlan = SERIAL,
) -> np.ndarray:
    """Blurred pixels where the map is 1, original pixels where it is 0."""
    image = as_rgb(image)
    blur_map = np.asarray(blur_map)
    if blur_map.shape != image.shape[:2]:
        raise ParameterError(f"blur map {blur_map.shape} does not match image {image.shape[:2]}")
    if not blur_map.any():
        return image.copy()
    blurred = blur_image(image, kernel, plan)
    blurred = np.clip(np.floor(blurred + 0.5), 0, 255).astype(np.uint8)
    return np.where(blur_map[..., None] != 0, blurred, image)
