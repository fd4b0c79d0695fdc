"""Skin-lesion segmentation with a dual-path (local texture / global context) patch CNN."""

__version__ = "0.1.0"

from ._backend import NAME as KERNEL_BACKEND  # noqa: E402
from .imaging import load_image, load_mask, resize, save_mask  # noqa: E402
from .morphology import border_margin, dilate, disk_se, erode, fill_holes, largest_component  # noqa: E402
from .nn import Architecture, SgdConfig, TwoPathNetwork, load_model, save_model, train  # noqa: E402
from .patches import PatchGeometry, build_training_set, extract_pair, sample_training_coords  # noqa: E402
from .pipeline import SegmentationConfig, segment  # noqa: E402
from .preprocess import GuidedFilterParams, preprocess_image  # noqa: E402

__all__ = [
    "KERNEL_BACKEND", "Architecture", "GuidedFilterParams", "PatchGeometry", "SegmentationConfig", "SgdConfig",
    "TwoPathNetwork", "border_margin", "build_training_set", "dilate", "disk_se", "erode", "extract_pair",
    "fill_holes", "largest_component", "load_image", "load_mask", "load_model", "preprocess_image", "resize",
    "sample_training_coords", "save_mask", "save_model", "segment", "train",
]
