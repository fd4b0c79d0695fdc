"""Flat binary morphology on 2-D masks.

Pixels outside the frame read as background for both dilation and erosion.
Foreground components use 8-connectivity; hole filling floods the background
with 4-connectivity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels


@dataclass(frozen=True)
class StructuringElement:
    radius: int
    offsets: np.ndarray = field(repr=False)  # (n, 2) int64 (di, dj), raster order

    def __len__(self):
        return len(self.offsets)


def disk_se(radius: int) -> StructuringElement:
    """Discrete disk: every offset with ``di**2 + dj**2 <= radius**2``."""
    if radius < 0:
        raise ValueError(f"disk radius must be >= 0, got {radius}")
    span = np.arange(-radius, radius + 1)
    di, dj = np.meshgrid(span, span, indexing="ij")
    keep = di * di + dj * dj <= radius * radius
    offsets = np.stack([di[keep], dj[keep]], axis=1).astype(np.int64)
    return StructuringElement(radius, np.ascontiguousarray(offsets))


def _as_u8(mask) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"masks are 2-D, got shape {arr.shape}")
    return np.ascontiguousarray(arr != 0, dtype=np.uint8)


def _se(se) -> StructuringElement:
    return disk_se(se) if isinstance(se, (int, np.integer)) else se


def dilate(mask, se) -> np.ndarray:
    """``out[p] = 1`` iff some offset ``o`` has ``mask[p - o] = 1``.  ``se`` may be a radius."""
    return kernels.dilate(_as_u8(mask), _se(se).offsets).astype(bool)


def erode(mask, se) -> np.ndarray:
    """``out[p] = 1`` iff ``mask[p + o] = 1`` for every offset ``o``."""
    return kernels.erode(_as_u8(mask), _se(se).offsets).astype(bool)


def border_margin(gt, radius: int = 15) -> np.ndarray:
    """Band around the ground-truth border: dilation minus erosion by a disk."""
    se = disk_se(radius)
    return dilate(gt, se) & ~erode(gt, se)


@dataclass
class LabeledComponents:
    labels: np.ndarray  # int32, 0 = background, 1..K in raster order of first pixel
    sizes: np.ndarray  # int64, sizes[k] = pixel count of label k, sizes[0] = 0

    @property
    def count(self) -> int:
        return len(self.sizes) - 1


def connected_components(mask, connectivity: int = 8) -> LabeledComponents:
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, sizes = kernels.label(_as_u8(mask), connectivity)
    return LabeledComponents(np.asarray(labels), np.asarray(sizes, dtype=np.int64))


def largest_component(mask, connectivity: int = 8) -> np.ndarray:
    """Keep the biggest component; ties go to the one seen first in raster order."""
    comps = connected_components(mask, connectivity)
    if comps.count == 0:
        return np.zeros(np.shape(mask), dtype=bool)
    # argmax returns the first maximum, and labels follow raster order
    best = int(np.argmax(comps.sizes[1:])) + 1
    return comps.labels == best


def fill_holes(mask, background_connectivity: int = 4) -> np.ndarray:
    """Turn background not connected to the frame into foreground."""
    m = np.asarray(mask, dtype=bool)
    if m.size == 0:
        return m.copy()
    # a one-pixel background frame joins every border-touching background region
    bg = np.pad(~m, 1, constant_values=True)
    comps = connected_components(bg, background_connectivity)
    outside = comps.labels[1:-1, 1:-1] == comps.labels[0, 0]
    return ~outside
