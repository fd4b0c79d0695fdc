"""Pixel metrics, leave-group-out cross-validation and the synthetic dataset."""
from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imaging import load_image, load_mask, save_image, save_mask
from .nn import Architecture, SgdConfig, train
from .patches import build_training_set
from .pipeline import SegmentationConfig, prepare_image, prepare_mask, segment

log = logging.getLogger(__name__)

CATEGORIES = ("melanoma", "non_melanoma")
SCOPES = ("all",) + CATEGORIES
NOT_APPLICABLE = None  # metric value when its denominator is zero


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError(f"negative confusion count in {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


def confusion(pred, gt) -> ConfusionCounts:
    """Pixel tallies with lesion as the positive class."""
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise ValueError(f"prediction {pred.shape} and ground truth {gt.shape} differ in size")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    return ConfusionCounts(tp, fp, gt.size - tp - fp - fn, fn)


def _ratio(num: int, den: int):
    return num / den if den else NOT_APPLICABLE


@dataclass(frozen=True)
class MetricsReport:
    """Sensitivity, specificity and accuracy; a metric is ``None`` when undefined."""

    sensitivity: float | None
    specificity: float | None
    accuracy: float
    counts: ConfusionCounts


def metrics(counts: ConfusionCounts) -> MetricsReport:
    if counts.total == 0:
        raise ValueError("no pixels counted; metrics are undefined")
    return MetricsReport(
        sensitivity=_ratio(counts.tp, counts.tp + counts.fn),
        specificity=_ratio(counts.tn, counts.tn + counts.fp),
        accuracy=(counts.tp + counts.tn) / counts.total,
        counts=counts,
    )


def format_metric(value) -> str:
    return "n/a" if value is None else f"{value:.6f}"


# -- manifest ---------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    image: Path
    mask: Path
    category: str


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]

    def __len__(self):
        return len(self.entries)


class ManifestError(ValueError):
    pass


def load_manifest(path, check_files: bool = True) -> DatasetManifest:
    """Read a CSV with header ``image,mask,category``; relative paths resolve against its folder."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such manifest: {path}")
    base = path.parent
    entries = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["image", "mask", "category"]:
            raise ManifestError(f"{path}: header must be 'image,mask,category', got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            cat = (row["category"] or "").strip()
            if cat not in CATEGORIES:
                raise ManifestError(f"{path}:{lineno}: category {cat!r} not in {CATEGORIES}")
            img, msk = base / row["image"].strip(), base / row["mask"].strip()
            if check_files:
                for p in (img, msk):
                    if not p.exists():
                        raise ManifestError(f"{path}:{lineno}: missing file {p}")
            entries.append(ManifestEntry(img, msk, cat))
    return DatasetManifest(entries)


def write_manifest(manifest: DatasetManifest, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["image", "mask", "category"])
        for e in manifest.entries:
            writer.writerow([os.path.relpath(e.image, path.parent), os.path.relpath(e.mask, path.parent), e.category])


# -- cross-validation ---------------------------------------------------------

@dataclass(frozen=True)
class CvPlan:
    assignment: np.ndarray  # entry index -> fold id
    k: int
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)

    def fold_sizes(self) -> list[int]:
        return [int(np.count_nonzero(self.assignment == f)) for f in range(self.k)]


def cv_split(n: int, k: int = 4, seed: int = 0) -> CvPlan:
    """Random partition of ``range(n)`` into ``k`` folds of size ``ceil(n/k)`` or ``floor(n/k)``."""
    if k < 1 or n < k:
        raise ValueError(f"cannot split {n} items into {k} folds")
    perm = np.random.default_rng([seed, 4]).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    for fold, chunk in enumerate(np.array_split(perm, k)):
        assignment[chunk] = fold
    return CvPlan(assignment, k, seed)


@dataclass
class CvReport:
    """Per-fold and aggregate results.

    ``fold_counts[(fold, scope)]`` pools pixels over that fold's test images;
    ``image_counts`` keeps every test image's own tallies for per-image
    averaging.
    """

    fold_counts: dict = field(default_factory=dict)
    image_counts: list = field(default_factory=list)  # (fold, entry index, category, counts)
    folds: list = field(default_factory=list)

    def aggregate(self, scope: str = "all") -> ConfusionCounts:
        total = ConfusionCounts()
        for fold in self.folds:
            total = total + self.fold_counts[(fold, scope)]
        return total

    def per_image_mean(self, scope: str = "all") -> dict:
        """Unweighted mean over images of each metric, skipping undefined values."""
        out = {}
        picked = [metrics(c) for _, _, cat, c in self.image_counts if scope == "all" or cat == scope]
        for name in ("sensitivity", "specificity", "accuracy"):
            vals = [getattr(m, name) for m in picked if getattr(m, name) is not None]
            out[name] = float(np.mean(vals)) if vals else NOT_APPLICABLE
        return out

    def rows(self) -> list[dict]:
        rows = []

        def add(fold, scope, counts):
            m = metrics(counts) if counts.total else None
            rows.append({
                "fold": fold, "scope": scope, "tp": counts.tp, "fp": counts.fp, "tn": counts.tn, "fn": counts.fn,
                "sensitivity": format_metric(m.sensitivity if m else None),
                "specificity": format_metric(m.specificity if m else None),
                "accuracy": format_metric(m.accuracy if m else None),
            })

        for fold in self.folds:
            for scope in SCOPES:
                add(fold, scope, self.fold_counts[(fold, scope)])
        for scope in SCOPES:
            add("aggregate", scope, self.aggregate(scope))
        for scope in SCOPES:
            mean = self.per_image_mean(scope)
            rows.append({"fold": "aggregate_per_image", "scope": scope, "tp": "", "fp": "", "tn": "", "fn": "",
                         **{k: format_metric(v) for k, v in mean.items()}})
        return rows

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.rows())


REPORT_COLUMNS = ["fold", "scope", "tp", "fp", "tn", "fn", "sensitivity", "specificity", "accuracy"]


def run_cv(manifest: DatasetManifest, seg: SegmentationConfig | None = None, sgd: SgdConfig | None = None,
           mode: str = "dual", arch: Architecture | None = None, per_image: int = 4500, seed: int = 0,
           k: int = 4, folds=None, border_radius: int = 15, log_fn=None) -> CvReport:
    """Leave-one-group-out evaluation: train on ``k - 1`` folds, segment the held-out one.

    ``folds`` restricts which held-out folds are run (all by default).
    Confusion counts are taken at the working resolution against the
    nearest-neighbour-resized ground truth.
    """
    seg = seg or SegmentationConfig()
    sgd = sgd or SgdConfig(seed=seed)
    say = log_fn or log.info
    plan = cv_split(len(manifest), k, seed)
    geom = seg.geometry

    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def prepared(i):
        if i not in cache:
            e = manifest.entries[i]
            cache[i] = (prepare_image(load_image(e.image), seg), prepare_mask(load_mask(e.mask), geom))
        return cache[i]

    report = CvReport()
    for fold in (range(k) if folds is None else folds):
        train_idx, test_idx = plan.train_indices(fold), plan.test_indices(fold)
        say(f"fold {fold}: training on {len(train_idx)} images, testing on {len(test_idx)}")
        imgs, gts = zip(*(prepared(i) for i in train_idx))
        try:
            samples = build_training_set(imgs, gts, per_image, geom, seed=seed * 1000 + fold, radius=border_radius)
            net, trace = train(samples, mode, sgd, arch,
                               on_epoch=lambda e, l: say(f"fold {fold} epoch {e} loss {l:.6f}"))
        except Exception as exc:
            raise RuntimeError(f"fold {fold}: training failed: {exc}") from exc
        per_scope = {s: ConfusionCounts() for s in SCOPES}
        for i in test_idx:
            e = manifest.entries[i]
            _, gt = prepared(i)
            mask, _ = segment(net, load_image(e.image), seg)
            c = confusion(mask, gt)
            report.image_counts.append((fold, int(i), e.category, c))
            per_scope["all"] = per_scope["all"] + c
            per_scope[e.category] = per_scope[e.category] + c
            m = metrics(c)
            say(f"fold {fold} image {i} accuracy {m.accuracy:.4f} sensitivity {format_metric(m.sensitivity)}")
        for s in SCOPES:
            report.fold_counts[(fold, s)] = per_scope[s]
        report.folds.append(fold)
    return report


# -- synthetic data -----------------------------------------------------------

SKIN_TONE = np.array([0.86, 0.68, 0.58])
LESION_TONE = np.array([0.42, 0.27, 0.20])


def _smooth_noise(rng, h, w, cell, sigma):
    """Noise with correlation length ~``cell`` pixels (bilinear upsampled lattice)."""
    gh, gw = h // cell + 2, w // cell + 2
    lattice = rng.normal(0.0, sigma, size=(gh, gw))
    ys = np.arange(h) / cell
    xs = np.arange(w) / cell
    y0, x0 = np.floor(ys).astype(int), np.floor(xs).astype(int)
    fy, fx = (ys - y0)[:, None], (xs - x0)[None, :]
    a = lattice[y0][:, x0]
    b = lattice[y0][:, x0 + 1]
    c = lattice[y0 + 1][:, x0]
    d = lattice[y0 + 1][:, x0 + 1]
    return (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy


def synthetic_case(rng, height: int = 400, width: int = 600):
    """One synthetic skin photograph and its lesion mask.

    Skin: a jittered skin tone under a smooth illumination ramp with fine
    per-pixel noise.  Lesion: a random rotated ellipse (axes 40-150 px) in a
    darker tone with coarser blotchy texture, blended over a 3-pixel band.
    """
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    skin = SKIN_TONE + rng.uniform(-0.05, 0.05, size=3)
    lesion = LESION_TONE + rng.uniform(-0.05, 0.05, size=3)

    semi = rng.uniform(20.0, 75.0, size=2)
    theta = rng.uniform(0.0, np.pi)
    reach = semi.max() + 20
    cy = rng.uniform(reach, height - reach)
    cx = rng.uniform(reach, width - reach)
    dy, dx = yy - cy, xx - cx
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    rho = np.sqrt((u / semi[0]) ** 2 + (v / semi[1]) ** 2)
    gt = rho <= 1.0
    # signed distance estimate in pixels, positive inside
    dist = (1.0 - rho) * np.hypot(u / semi[0] ** 2, v / semi[1] ** 2).clip(1e-9) ** -1 * np.maximum(rho, 1e-9)
    alpha = np.clip(0.5 + dist / 3.0, 0.0, 1.0)

    base = skin[None, None, :] * (1 - alpha[..., None]) + lesion[None, None, :] * alpha[..., None]
    texture = (rng.normal(0.0, 0.02, size=(height, width)) * (1 - alpha)
               + _smooth_noise(rng, height, width, 6, 0.05) * alpha)
    gy, gx = rng.uniform(-0.12, 0.12, size=2)
    illum = 1.0 + gy * (yy / height - 0.5) + gx * (xx / width - 0.5) + _smooth_noise(rng, height, width, 150, 0.03)
    img = np.clip(base * illum[..., None] + texture[..., None], 0.0, 1.0)
    return img, gt


def generate_synthetic_dataset(n: int, seed: int, out_dir) -> DatasetManifest:
    """Write ``n`` image/mask PNG pairs plus ``manifest.csv`` into ``out_dir``.

    Categories alternate melanoma / non_melanoma.  Case ``i`` uses generator
    ``(seed, 5, i)`` so output is byte-identical for a given seed.
    """
    if n < 4:
        raise ValueError(f"need at least 4 synthetic images for 4-fold cross-validation, got {n}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(n):
        img, gt = synthetic_case(np.random.default_rng([seed, 5, i]))
        ip, mp = out / f"image_{i:03d}.png", out / f"mask_{i:03d}.png"
        save_image(img, ip)
        save_mask(gt, mp)
        entries.append(ManifestEntry(ip, mp, CATEGORIES[i % 2]))
    manifest = DatasetManifest(entries)
    write_manifest(manifest, out / "manifest.csv")
    return manifest
