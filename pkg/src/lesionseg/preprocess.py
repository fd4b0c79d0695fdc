"""Edge-preserving smoothing with a self-guided guided filter."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import box_mean

# windows whose guidance variance is below this are treated as flat
_FLAT_VARIANCE = 1e-12


@dataclass(frozen=True)
class GuidedFilterParams:
    """Window radius (window side ``2 * radius + 1``) and regularization.

    The default radius 50 gives a 101 x 101 window, i.e. a neighborhood side of
    about 100 pixels on the 400 x 600 working resolution.
    """

    radius: int = 50
    epsilon: float = 0.01

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"guided filter radius must be >= 1, got {self.radius}")
        if not self.epsilon >= 0:
            raise ValueError(f"guided filter epsilon must be >= 0, got {self.epsilon}")


def guided_filter(src: np.ndarray, guide: np.ndarray, params: GuidedFilterParams) -> np.ndarray:
    """Filter the 2-D image ``src`` under the 2-D guidance image ``guide``.

    Per window a linear model ``q = a * I + b`` is fitted with
    ``a = cov(I, p) / (var(I) + eps)`` and ``b = mean(p) - a * mean(I)``; the
    output averages ``a`` and ``b`` over all windows covering a pixel.  All box
    means use replicate-padded full windows.
    """
    p = np.asarray(src, dtype=np.float64)
    guide_arr = np.asarray(guide, dtype=np.float64)
    if p.shape != guide_arr.shape or p.ndim != 2:
        raise ValueError(f"guided filter needs equal 2-D shapes, got {p.shape} and {guide_arr.shape}")
    if params.epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    r = params.radius
    mean_i = box_mean(guide_arr, r)
    mean_p = box_mean(p, r)
    var_i = box_mean(guide_arr * guide_arr, r) - mean_i * mean_i
    cov_ip = box_mean(guide_arr * p, r) - mean_i * mean_p
    flat = var_i <= _FLAT_VARIANCE
    denom = np.where(flat, 1.0, var_i + params.epsilon)
    a = np.where(flat, 0.0, cov_ip / denom)
    b = mean_p - a * mean_i
    return box_mean(a, r) * guide_arr + box_mean(b, r)


def preprocess_image(img: np.ndarray, params: GuidedFilterParams | None = None) -> np.ndarray:
    """Self-guided filtering of each RGB channel, clamped to [0, 1]."""
    params = params or GuidedFilterParams()
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    out = np.empty_like(img)
    for c in range(3):
        out[..., c] = guided_filter(img[..., c], img[..., c], params)
    return np.clip(out, 0.0, 1.0)
