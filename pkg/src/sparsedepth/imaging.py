"""Raster I/O and RGB to lightness conversion.

Images are plain numpy arrays: RGB rasters are ``(height, width, 3)`` uint8,
lightness planes and masks are ``(height, width)`` uint8.  Netpbm files
(P5/P6) are parsed and written here byte for byte; PNG goes through Pillow.
"""

from __future__ import annotations

import os
import re

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError, ParameterError
from .parallel import SERIAL, ExecPlan, map_rows

# sRGB primaries, D65 white: the Y row of the linear RGB -> XYZ matrix
_Y_FROM_LINEAR = np.array([0.2126729, 0.7151522, 0.0721750])
_EPSILON = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64) / 255.0
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


# per-channel linearisation table, indexed by the 8-bit code value
_LINEAR_LUT = _srgb_to_linear(np.arange(256))


def lightness_from_luminance(y: np.ndarray) -> np.ndarray:
    """CIE L* in [0, 100] from relative luminance (white Y = 1)."""
    y = np.asarray(y, dtype=np.float64)
    f = np.where(y > _EPSILON, np.cbrt(y), (_KAPPA * y + 16.0) / 116.0)
    return 116.0 * f - 16.0


def _lightness_rows(image: np.ndarray) -> np.ndarray:
    lin = _LINEAR_LUT[image]
    y = lin @ _Y_FROM_LINEAR
    scaled = lightness_from_luminance(y) * (255.0 / 100.0)
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def rgb_to_lightness(image: np.ndarray, plan: ExecPlan = SERIAL) -> np.ndarray:
    """Map every pixel to CIE L* rescaled to integer [0, 255].

    Only the L* channel is computed; a* and b* are never needed downstream.
    """
    image = as_rgb(image)
    out = np.empty(image.shape[:2], dtype=np.uint8)
    return map_rows(out, lambda a, b: _lightness_rows(image[a:b]), plan)


def as_rgb(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ParameterError(f"expected an (H, W, 3) RGB array, got shape {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ParameterError("image must be at least 1x1")
    if image.dtype != np.uint8:
        if image.min() < 0 or image.max() > 255:
            raise ParameterError("RGB values must lie in [0, 255]")
        image = image.astype(np.uint8)
    return image


def as_plane(plane: np.ndarray) -> np.ndarray:
    plane = np.asarray(plane)
    if plane.ndim != 2 or plane.size == 0:
        raise ParameterError(f"expected a non-empty 2-D plane, got shape {plane.shape}")
    if plane.dtype != np.uint8:
        if plane.min() < 0 or plane.max() > 255:
            raise ParameterError("plane values must lie in [0, 255]")
        plane = plane.astype(np.uint8)
    return plane


# --------------------------------------------------------------------------
# Netpbm
# --------------------------------------------------------------------------

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def _parse_netpbm(data: bytes, path) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"{path}: not a binary PGM/PPM file")
    pos = 2
    fields = []
    for _ in range(3):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise ImageFormatError(f"{path}: truncated header")
        try:
            fields.append(int(m.group(1)))
        except ValueError:
            raise ImageFormatError(f"{path}: bad header field {m.group(1)!r}") from None
        pos = m.end()
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: invalid size {width}x{height}")
    if not 1 <= maxval <= 255:
        raise ImageFormatError(f"{path}: maxval {maxval} unsupported (8-bit only)")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ImageFormatError(f"{path}: truncated header")
    pos += 1
    channels = 1 if magic == b"P5" else 3
    need = width * height * channels
    raster = data[pos:pos + need]
    if len(raster) < need:
        raise ImageFormatError(f"{path}: raster has {len(raster)} bytes, expected {need}")
    arr = np.frombuffer(raster, dtype=np.uint8)
    if maxval != 255:
        if arr.max(initial=0) > maxval:
            raise ImageFormatError(f"{path}: sample exceeds maxval {maxval}")
        arr = np.floor(arr.astype(np.float64) * 255.0 / maxval + 0.5).astype(np.uint8)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return arr.reshape(shape).copy()


def _read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _is_netpbm(data: bytes) -> bool:
    return data[:2] in (b"P5", b"P6")


def _load_pillow(path, mode: str) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im.load()
            if mode == "L" and im.mode not in ("L", "P", "1", "I", "I;16", "LA"):
                rgb = np.asarray(im.convert("RGB"))
                if not (np.array_equal(rgb[..., 0], rgb[..., 1])
                        and np.array_equal(rgb[..., 0], rgb[..., 2])):
                    raise ImageFormatError(f"{path}: expected a grayscale image")
                return rgb[..., 0].copy()
            if mode == "L" and im.mode.startswith("I"):
                arr = np.asarray(im)
                if arr.max(initial=0) > 255:
                    raise ImageFormatError(f"{path}: 16-bit samples are not supported")
                return arr.astype(np.uint8)
            return np.asarray(im.convert(mode)).copy()
    except (UnidentifiedImageError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc
    except OSError as exc:
        if os.path.exists(path):
            # Pillow reports corrupt payloads as OSError
            raise ImageFormatError(f"{path}: {exc}") from exc
        raise


def load_image(path) -> np.ndarray:
    """Read a PNG or binary PPM as an ``(H, W, 3)`` uint8 RGB array.

    Grayscale files (P5 or grayscale PNG) are replicated into three
    channels.  Raises ``OSError`` if the file cannot be read and
    :class:`ImageFormatError` if its contents are not a valid raster.
    """
    data = _read_bytes(path)
    if _is_netpbm(data):
        arr = _parse_netpbm(data, path)
        return np.repeat(arr[..., None], 3, axis=2) if arr.ndim == 2 else arr
    return _load_pillow(path, "RGB")


def load_gray(path) -> np.ndarray:
    """Read a single-channel PGM or PNG as an ``(H, W)`` uint8 array."""
    data = _read_bytes(path)
    if _is_netpbm(data):
        arr = _parse_netpbm(data, path)
        if arr.ndim == 3:
            raise ImageFormatError(f"{path}: expected a grayscale (P5) file")
        return arr
    return _load_pillow(path, "L")


def encode_pgm(plane: np.ndarray) -> bytes:
    plane = as_plane(plane)
    h, w = plane.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(plane).tobytes()


def encode_ppm(image: np.ndarray) -> bytes:
    image = as_rgb(image)
    h, w = image.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(image).tobytes()


def save_gray(plane: np.ndarray, path) -> None:
    """Write a binary PGM: ``P5\\n<w> <h>\\n255\\n`` then raw row-major bytes."""
    data = encode_pgm(plane)
    with open(path, "wb") as fh:
        fh.write(data)


def save_image(image: np.ndarray, path) -> None:
    """Write an RGB image as PPM (``.ppm``) or through Pillow (PNG etc.)."""
    image = as_rgb(image)
    if str(path).lower().endswith(".ppm"):
        with open(path, "wb") as fh:
            fh.write(encode_ppm(image))
    else:
        Image.fromarray(image, "RGB").save(path)
