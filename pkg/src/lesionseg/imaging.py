"""Raster types and I/O shared by every stage.

Images are plain numpy arrays:

* RGB image: ``(H, W, 3)`` float64, channel-interleaved, values in [0, 1].
* gray image / probability map: ``(H, W)`` float64 in [0, 1].
* binary mask: ``(H, W)`` bool.

8-bit data maps to [0, 1] by ``v / 255`` and back by ``round(255 * v)``.
"""
from __future__ import annotations

import os

import numpy as np
from PIL import Image, UnidentifiedImageError

OVERLAY_COLOR = (0.0, 0.0, 1.0)


class ImageDecodeError(ValueError):
    """Raised when a file exists but cannot be decoded as a raster."""


def _open(path):
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            im.load()
            return im.copy()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageDecodeError(f"cannot decode image {path}: {exc}") from exc


def load_image(path) -> np.ndarray:
    """Read a PNG/JPEG as an ``(H, W, 3)`` float image in [0, 1].

    Grayscale rasters are promoted by channel replication; an alpha channel is
    dropped.
    """
    im = _open(path)
    if im.mode in ("I;16", "I;16B", "I;16L", "I", "F"):
        raise ImageDecodeError(f"unsupported non-8-bit raster mode {im.mode!r}: {path}")
    arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr / 255.0


def load_mask(path) -> np.ndarray:
    """Read a mask image; any pixel above mid-gray counts as foreground."""
    im = _open(path)
    gray = np.asarray(im.convert("L"), dtype=np.uint8)
    return gray > 127


def to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(np.asarray(values, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def save_image(img: np.ndarray, path) -> None:
    """Write an RGB or gray float image as an 8-bit PNG."""
    Image.fromarray(to_uint8(img)).save(os.fspath(path), format="PNG")


def save_mask(mask: np.ndarray, path) -> None:
    """Write a binary mask as an 8-bit PNG with values {0, 255}."""
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(os.fspath(path), format="PNG")


def save_probability_map(prob: np.ndarray, path) -> None:
    """Write a probability map as 8-bit gray, value ``round(255 * P)``."""
    Image.fromarray(to_uint8(prob), mode="L").save(os.fspath(path), format="PNG")


def mask_boundary(mask: np.ndarray) -> np.ndarray:
    """Foreground pixels with at least one 4-neighbour outside the mask (frame counts as outside)."""
    m = np.asarray(mask, dtype=bool)
    padded = np.pad(m, 1, constant_values=False)
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:])
    return m & ~interior


def overlay(img: np.ndarray, mask: np.ndarray, color=OVERLAY_COLOR) -> np.ndarray:
    if img.shape[:2] != np.shape(mask):
        raise ValueError(f"overlay size mismatch: image {img.shape[:2]} vs mask {np.shape(mask)}")
    out = np.array(img, dtype=np.float64, copy=True)
    out[mask_boundary(mask)] = color
    return out


def save_overlay(img: np.ndarray, mask: np.ndarray, path, color=OVERLAY_COLOR) -> None:
    """Draw the mask contour onto the image in a fixed color and write a PNG."""
    save_image(overlay(img, mask, color), path)


def _bilinear_weights(n_in: int, n_out: int) -> np.ndarray:
    """``(n_out, n_in)`` interpolation matrix with half-pixel-center mapping."""
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    frac = src - i0
    mat = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    np.add.at(mat, (rows, i0), 1.0 - frac)
    np.add.at(mat, (rows, i1), frac)
    return mat


def bilinear_taps(n_in: int, n_out: int):
    """Two-tap form of the bilinear mapping: ``(i0, i1, w0, w1)`` per output index."""
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    frac = src - i0
    return i0, i1, 1.0 - frac, frac


def _nearest_index(n_in: int, n_out: int) -> np.ndarray:
    idx = np.floor((np.arange(n_out) + 0.5) * (n_in / n_out)).astype(np.int64)
    return np.clip(idx, 0, n_in - 1)


def resize(img: np.ndarray, out_h: int, out_w: int, method: str = "bilinear") -> np.ndarray:
    """Resize a 2-D or ``(H, W, C)`` raster.

    Bilinear uses half-pixel-center coordinates without antialiasing, so
    constants are preserved and equal sizes give back the input.  Nearest keeps
    binary masks binary.
    """
    if out_h < 1 or out_w < 1:
        raise ValueError(f"resize target must be positive, got {out_h}x{out_w}")
    arr = np.asarray(img)
    h, w = arr.shape[:2]
    if method == "nearest":
        return arr[_nearest_index(h, out_h)][:, _nearest_index(w, out_w)]
    if method != "bilinear":
        raise ValueError(f"unknown resize method {method!r}")
    if (h, w) == (out_h, out_w):
        return np.array(arr, dtype=np.float64, copy=True)
    wr = _bilinear_weights(h, out_h)
    wc = _bilinear_weights(w, out_w)
    data = arr.astype(np.float64, copy=False)
    if data.ndim == 2:
        return wr @ data @ wc.T
    return np.einsum("ih,hwc,jw->ijc", wr, data, wc, optimize=True)


def pad_replicate(img: np.ndarray, top: int, bottom: int, left: int, right: int) -> np.ndarray:
    if min(top, bottom, left, right) < 0:
        raise ValueError("padding margins must be non-negative")
    widths = [(top, bottom), (left, right)] + [(0, 0)] * (np.ndim(img) - 2)
    return np.pad(img, widths, mode="edge")


def box_mean(img: np.ndarray, radius: int) -> np.ndarray:
    """Mean over the ``(2r+1)^2`` replicate-padded window around each pixel."""
    k = 2 * radius + 1
    data = np.asarray(img, dtype=np.float64)
    # summing offsets from a reference pixel keeps constant inputs exact
    ref = data[0, 0].copy()
    padded = pad_replicate(data - ref, radius, radius, radius, radius)
    # integral image with a leading zero row/column
    csum = np.cumsum(np.cumsum(padded, axis=0), axis=1)
    csum = np.pad(csum, [(1, 0), (1, 0)] + [(0, 0)] * (data.ndim - 2))
    h, w = data.shape[:2]
    total = csum[k:k + h, k:k + w] - csum[:h, k:k + w] - csum[k:k + h, :w] + csum[:h, :w]
    return total / (k * k) + ref


def mean_filter(img: np.ndarray, k: int) -> np.ndarray:
    """k x k arithmetic mean with replicate-padded borders, per channel."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"mean filter window must be odd and positive, got {k}")
    if k == 1:
        return np.array(img, dtype=np.float64, copy=True)
    out = box_mean(img, k // 2)
    # integral-image round-off can step a hair outside the input range
    return np.clip(out, np.min(img), np.max(img))
