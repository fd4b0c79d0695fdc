"""Local/global patch pairs and region-stratified training samples."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .imaging import bilinear_taps, mean_filter, pad_replicate
from .morphology import border_margin

REGIONS = ("lesion", "normal", "border")


class EmptyRegionError(ValueError):
    """A sampling region of the ground truth has no pixels."""


@dataclass(frozen=True)
class PatchGeometry:
    local_side: int = 31
    global_side: int = 201
    net_side: int = 31
    image_h: int = 400
    image_w: int = 600
    smooth_k: int = 5  # mean-filter window applied to the padded band only

    def __post_init__(self):
        sides = (self.local_side, self.global_side, self.net_side, self.smooth_k)
        if any(s < 1 or s % 2 == 0 for s in sides):
            raise ValueError(f"patch sides must be positive and odd: {sides}")
        if self.global_side < self.local_side:
            raise ValueError("global side must be at least the local side")
        if self.image_h < 1 or self.image_w < 1:
            raise ValueError("image size must be positive")

    @property
    def pad(self) -> int:
        return max(self.local_side, self.global_side) // 2


@dataclass
class PatchPair:
    local: np.ndarray  # (net_side, net_side, 3)
    global_: np.ndarray  # (net_side, net_side, 3)
    center: tuple[int, int]


class PatchSource:
    """One image padded once and shared by every patch extracted from it.

    The image is replicate-padded by ``geom.pad`` on each side and the padded
    band (only) is replaced by its ``smooth_k`` mean filter.  Patch data is
    float32.
    """

    def __init__(self, img: np.ndarray, geom: PatchGeometry):
        img = np.asarray(img, dtype=np.float64)
        if img.ndim != 3 or img.shape[2] != 3:
            raise ValueError(f"expected an (H, W, 3) image, got {img.shape}")
        self.geom = geom
        self.height, self.width = img.shape[:2]
        pad = geom.pad
        padded = pad_replicate(img, pad, pad, pad, pad)
        smoothed = mean_filter(padded, geom.smooth_k)
        band = np.ones(padded.shape[:2], dtype=bool)
        band[pad:pad + self.height, pad:pad + self.width] = False
        padded[band] = smoothed[band]
        self.padded = padded.astype(np.float32)
        self._taps = bilinear_taps(geom.global_side, geom.net_side)

    def _check(self, rows, cols):
        if (np.any(rows < 0) or np.any(rows >= self.height)
                or np.any(cols < 0) or np.any(cols >= self.width)):
            raise IndexError(f"patch center outside {self.height}x{self.width} image")

    def local_batch(self, rows, cols) -> np.ndarray:
        """Local patches ``(B, L, L, 3)`` centered at the given pixels."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        self._check(rows, cols)
        side = self.geom.local_side
        start = self.geom.pad - side // 2
        d = np.arange(side)
        ri = (rows + start)[:, None, None] + d[None, :, None]
        ci = (cols + start)[:, None, None] + d[None, None, :]
        return self.padded[ri, ci]

    def global_batch(self, rows, cols) -> np.ndarray:
        """Global patches: the ``global_side`` crop bilinearly shrunk to ``net_side``."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        self._check(rows, cols)
        i0, i1, w0, w1 = self._taps
        start = self.geom.pad - self.geom.global_side // 2
        base_r = (rows + start)[:, None]
        base_c = (cols + start)[:, None]
        r0, r1 = base_r + i0, base_r + i1
        c0, c1 = base_c + i0, base_c + i1
        p = self.padded
        wr0 = w0.astype(np.float32)[None, :, None, None]
        wr1 = w1.astype(np.float32)[None, :, None, None]
        wc0 = w0.astype(np.float32)[None, None, :, None]
        wc1 = w1.astype(np.float32)[None, None, :, None]
        # rows first, then columns; global_row uses the same order so both agree bit for bit
        left = p[r0[:, :, None], c0[:, None, :]] * wr0 + p[r1[:, :, None], c0[:, None, :]] * wr1
        right = p[r0[:, :, None], c1[:, None, :]] * wr0 + p[r1[:, :, None], c1[:, None, :]] * wr1
        return left * wc0 + right * wc1

    def global_row(self, row: int) -> np.ndarray:
        """Global patches for every pixel of one image row, ``(W, S, S, 3)``.

        The vertical interpolation is shared by the whole row, so this is
        cheaper than :meth:`global_batch` on the same centers (same values).
        """
        if not 0 <= row < self.height:
            raise IndexError(f"row {row} outside {self.height}-row image")
        i0, i1, w0, w1 = self._taps
        start = self.geom.pad - self.geom.global_side // 2
        p = self.padded
        wr0 = w0.astype(np.float32)[:, None, None]
        wr1 = w1.astype(np.float32)[:, None, None]
        band = p[row + start + i0] * wr0 + p[row + start + i1] * wr1  # (S, Wp, 3)
        base = np.arange(self.width)[:, None] + start
        left = band[:, base + i0].transpose(1, 0, 2, 3)  # (W, S, S, 3)
        right = band[:, base + i1].transpose(1, 0, 2, 3)
        return left * w0.astype(np.float32)[None, None, :, None] + right * w1.astype(np.float32)[None, None, :, None]

    def pair(self, center) -> PatchPair:
        r, c = int(center[0]), int(center[1])
        return PatchPair(self.local_batch([r], [c])[0], self.global_batch([r], [c])[0], (r, c))


def extract_pair(img, center, geom: PatchGeometry | None = None) -> PatchPair:
    """Patch pair at ``center``; pass a :class:`PatchSource` to reuse its padding."""
    source = img if isinstance(img, PatchSource) else PatchSource(img, geom or PatchGeometry())
    return source.pair(center)


def sample_training_coords(gt, n_total: int = 4500, rng=None, radius: int = 15):
    """Draw ``n_total / 3`` centers from each of the lesion, normal and border regions.

    Sampling is uniform without replacement, falling back to with-replacement
    when a region is smaller than its quota.  Returns ``(coords, regions)``:
    an ``(n, 2)`` int array of (row, col) and the matching region names, in
    lesion, normal, border order.
    """
    if n_total % 3 != 0 or n_total < 0:
        raise ValueError(f"n_total must be a non-negative multiple of 3, got {n_total}")
    rng = np.random.default_rng(rng)
    gt = np.asarray(gt, dtype=bool)
    masks = {"lesion": gt, "normal": ~gt, "border": border_margin(gt, radius)}
    per = n_total // 3
    coords, regions = [], []
    for name in REGIONS:
        flat = np.flatnonzero(masks[name])
        if flat.size == 0:
            raise EmptyRegionError(f"{name} region is empty; cannot sample training patches")
        pick = rng.choice(flat, size=per, replace=flat.size < per)
        coords.append(np.stack(np.divmod(pick, gt.shape[1]), axis=1))
        regions.extend([name] * per)
    return np.concatenate(coords).astype(np.int64), np.asarray(regions)


@dataclass
class TrainingSample:
    pair: PatchPair
    label: int  # 1 lesion, 0 normal
    region: str


class TrainingSet:
    """Lazily materialized training samples.

    Holds one :class:`PatchSource` per image plus per-sample (image, center,
    label, region); patches are cut on demand so large sets stay small in
    memory.
    """

    def __init__(self, sources, image_index, coords, labels, regions):
        self.sources = list(sources)
        self.image_index = np.asarray(image_index, dtype=np.int64)
        self.coords = np.asarray(coords, dtype=np.int64).reshape(-1, 2)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.regions = np.asarray(regions)

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, i) -> TrainingSample:
        src = self.sources[self.image_index[i]]
        return TrainingSample(src.pair(self.coords[i]), int(self.labels[i]), str(self.regions[i]))

    def batch(self, indices, local: bool = True, global_: bool = True):
        """``(local, global, labels)`` arrays for the given sample indices.

        A patch kind that is switched off comes back as ``None``.
        """
        indices = np.asarray(indices, dtype=np.int64)
        side = self.sources[0].geom.net_side if self.sources else 0
        shape = (len(indices), side, side, 3)
        loc = np.empty(shape, dtype=np.float32) if local else None
        glo = np.empty(shape, dtype=np.float32) if global_ else None
        img_idx = self.image_index[indices]
        for k in np.unique(img_idx):
            sel = np.flatnonzero(img_idx == k)
            rc = self.coords[indices[sel]]
            if local:
                loc[sel] = self.sources[k].local_batch(rc[:, 0], rc[:, 1])
            if global_:
                glo[sel] = self.sources[k].global_batch(rc[:, 0], rc[:, 1])
        return loc, glo, self.labels[indices]


def build_training_set(images: Sequence[np.ndarray], gts: Sequence[np.ndarray], per_image: int = 4500,
                       geom: PatchGeometry | None = None, seed: int = 0, radius: int = 15) -> TrainingSet:
    """Sample ``per_image`` centers from each (preprocessed image, ground truth) pair.

    Image ``k`` draws from its own generator seeded by ``(seed, k)`` so results
    do not depend on processing order; the merged set is then shuffled.
    """
    geom = geom or PatchGeometry()
    if len(images) != len(gts):
        raise ValueError(f"{len(images)} images but {len(gts)} ground-truth masks")
    sources, img_idx, coords, labels, regions = [], [], [], [], []
    for k, (img, gt) in enumerate(zip(images, gts)):
        gt = np.asarray(gt, dtype=bool)
        if gt.shape != np.shape(img)[:2]:
            raise ValueError(f"image {k}: mask {gt.shape} does not match image {np.shape(img)[:2]}")
        rc, reg = sample_training_coords(gt, per_image, np.random.default_rng([seed, 0, k]), radius)
        sources.append(PatchSource(img, geom))
        img_idx.append(np.full(len(rc), k))
        coords.append(rc)
        labels.append(gt[rc[:, 0], rc[:, 1]].astype(np.int64))
        regions.append(reg)
    if not sources:
        return TrainingSet([], [], np.zeros((0, 2)), [], [])
    order = np.random.default_rng([seed, 1]).permutation(sum(len(l) for l in labels))
    return TrainingSet(sources, np.concatenate(img_idx)[order], np.concatenate(coords)[order],
                       np.concatenate(labels)[order], np.concatenate(regions)[order])
