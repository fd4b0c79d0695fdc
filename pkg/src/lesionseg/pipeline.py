"""Whole-image segmentation: preprocess, classify every pixel, threshold, clean up."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import morphology
from .imaging import resize
from .nn import TwoPathNetwork, dense_path_features, head_forward, path_features
from .patches import PatchGeometry, PatchSource
from .preprocess import GuidedFilterParams, preprocess_image


@dataclass(frozen=True)
class SegmentationConfig:
    tau: float = 0.6
    dilation_radius: int = 10
    gf: GuidedFilterParams = field(default_factory=GuidedFilterParams)
    geometry: PatchGeometry = field(default_factory=PatchGeometry)
    batch_size: int = 16  # small batches keep the im2col buffers in cache

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError(f"tau must lie strictly between 0 and 1, got {self.tau}")
        if self.dilation_radius < 0:
            raise ValueError(f"dilation radius must be >= 0, got {self.dilation_radius}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


def prepare_image(raw: np.ndarray, cfg: SegmentationConfig | None = None) -> np.ndarray:
    """Resize to the working resolution and apply the guided filter."""
    cfg = cfg or SegmentationConfig()
    geom = cfg.geometry
    img = resize(raw, geom.image_h, geom.image_w, "bilinear")
    return preprocess_image(np.clip(img, 0.0, 1.0), cfg.gf)


def prepare_mask(gt: np.ndarray, geom: PatchGeometry | None = None) -> np.ndarray:
    """Nearest-neighbour resize of a ground-truth mask to the working resolution."""
    geom = geom or PatchGeometry()
    return resize(np.asarray(gt, dtype=bool), geom.image_h, geom.image_w, "nearest")


def _stripe_rows(height: int, stripe: int):
    for r0 in range(0, height, stripe):
        yield r0, min(height, r0 + stripe)


def infer_probability_map(net: TwoPathNetwork, image: np.ndarray, geom: PatchGeometry | None = None,
                          batch_size: int = 16, stripe: int = 100, progress=None) -> np.ndarray:
    """Lesion probability for the patch pair centered on every pixel.

    The local path is evaluated densely over horizontal stripes (windows
    overlap, so convolutions are shared); global patches do not overlap on a
    regular grid and go through the network in batches.  Both give the same
    values as classifying each pixel on its own, up to float32 rounding.
    ``progress(done_rows, total_rows)`` is called after each stripe.
    """
    geom = geom or PatchGeometry()
    image = np.asarray(image)
    if image.shape != (geom.image_h, geom.image_w, 3):
        raise ValueError(f"expected a {geom.image_h}x{geom.image_w}x3 image, got {image.shape}")
    if geom.net_side != net.arch.side or geom.local_side != net.arch.side:
        raise ValueError(f"network expects {net.arch.side}-pixel patches, geometry gives "
                         f"local {geom.local_side} / net {geom.net_side}")
    source = PatchSource(image, geom)
    h, w = image.shape[:2]
    half = geom.local_side // 2
    off = geom.pad - half
    prob = np.empty((h, w), dtype=np.float64)
    for r0, r1 in _stripe_rows(h, stripe):
        parts = []
        if "local" in net.paths:
            block = source.padded[off + r0:off + r1 + 2 * half, off:off + w + 2 * half]
            parts.append(dense_path_features(net, "local", block).reshape((r1 - r0) * w, -1))
        if "global" in net.paths:
            feats = np.empty((r1 - r0, w, net.arch.path_features), dtype=net.dtype)
            for r in range(r0, r1):
                patches = source.global_row(r)
                for s in range(0, w, batch_size):
                    feats[r - r0, s:s + batch_size] = path_features(net, "global", patches[s:s + batch_size])
            parts.append(feats.reshape((r1 - r0) * w, -1))
        f = np.concatenate(parts, axis=1) if len(parts) > 1 else parts[0]
        out = np.empty(len(f), dtype=np.float64)
        for s in range(0, len(f), 4096):
            out[s:s + 4096] = head_forward(net, f[s:s + 4096])[:, 1]
        prob[r0:r1] = out.reshape(r1 - r0, w)
        if progress is not None:
            progress(r1, h)
    return np.clip(prob, 0.0, 1.0)


def threshold_map(prob: np.ndarray, tau: float = 0.6) -> np.ndarray:
    """Lesion where ``P > tau`` (strict)."""
    return np.asarray(prob) > tau


def postprocess(mask: np.ndarray, cfg: SegmentationConfig | None = None) -> np.ndarray:
    """Largest 8-connected component, disk dilation, then hole filling."""
    cfg = cfg or SegmentationConfig()
    kept = morphology.largest_component(mask, connectivity=8)
    grown = morphology.dilate(kept, morphology.disk_se(cfg.dilation_radius))
    return morphology.fill_holes(grown, background_connectivity=4)


def segment(net: TwoPathNetwork, raw_image: np.ndarray, cfg: SegmentationConfig | None = None,
            progress=None) -> tuple[np.ndarray, np.ndarray]:
    """Full pipeline on a raw RGB image; returns ``(mask, probability_map)`` at working resolution."""
    cfg = cfg or SegmentationConfig()
    image = prepare_image(raw_image, cfg)
    prob = infer_probability_map(net, image, cfg.geometry, cfg.batch_size, progress=progress)
    return postprocess(threshold_map(prob, cfg.tau), cfg), prob
