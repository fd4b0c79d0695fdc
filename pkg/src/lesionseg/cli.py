"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 usage or input error.  Errors are
reported as one ``lesionseg: error: ...`` line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evaluation import (ManifestError, confusion, format_metric, generate_synthetic_dataset, load_manifest,
                         metrics, run_cv)
from .imaging import (ImageDecodeError, load_image, load_mask, resize, save_image, save_mask, save_overlay,
                      save_probability_map)
from .nn import (Architecture, ModelFormatError, SgdConfig, TrainingDivergedError, TwoPathNetwork, load_model,
                 save_model, train)
from .patches import EmptyRegionError, PatchGeometry, build_training_set, sample_training_coords
from .pipeline import SegmentationConfig, prepare_image, prepare_mask, segment
from .preprocess import GuidedFilterParams, preprocess_image

MODE_NAMES = {"dual": "dual", "local": "local_only", "global": "global_only"}
INPUT_ERRORS = (FileNotFoundError, IsADirectoryError, ImageDecodeError, ManifestError, ModelFormatError,
                EmptyRegionError, ValueError)
KERNEL_PAD = 1
REGION_COLORS = {"lesion": (1.0, 0.0, 0.0), "normal": (0.0, 0.0, 1.0), "border": (0.0, 1.0, 1.0)}


class UsageError(Exception):
    pass


# -- option groups ------------------------------------------------------------

def _add_gf(p):
    p.add_argument("--gf-radius", type=int, default=50,
                   help="guided filter window radius; window side is 2r+1, about the 100-pixel neighborhood")
    p.add_argument("--gf-eps", type=float, default=0.01, help="guided filter regularization on the [0,1] scale")


def _add_train(p):
    p.add_argument("--mode", choices=sorted(MODE_NAMES), default="dual",
                   help="network paths: both, local patches only, or global patches only")
    p.add_argument("--patches-per-image", type=int, default=4500,
                   help="training centers per image, split equally over lesion/normal/border regions")
    p.add_argument("--border-radius", type=int, default=15, help="disk radius defining the border-margin region")
    p.add_argument("--lr", type=float, default=0.01, help="SGD learning rate")
    p.add_argument("--momentum", type=float, default=0.9, help="SGD momentum")
    p.add_argument("--batch-size", type=int, default=64, help="SGD mini-batch size")
    p.add_argument("--epochs", type=int, default=10, help="passes over the training patches")
    p.add_argument("--maps1", type=int, default=60, help="feature maps in the first convolution")
    p.add_argument("--maps2", type=int, default=60, help="feature maps in the second convolution")
    p.add_argument("--fusion", type=int, default=500, help="units in the fully connected fusion layer")
    p.add_argument("--deterministic", action="store_true",
                   help="serial, fixed-order batch reduction (training is always serial in this build)")


def _add_seg(p):
    p.add_argument("--tau", type=float, default=0.6, help="probability threshold; lesion where P > tau")
    p.add_argument("--dilation-radius", type=int, default=10, help="disk radius of the post-processing dilation")
    p.add_argument("--infer-batch", type=int, default=16, help="global patches per inference batch")


def _add_common(p):
    p.add_argument("--config", help="flat key=value file; command-line flags override it")
    p.add_argument("--seed", type=int, default=0, help="single seed from which all randomness is derived")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="lesionseg", formatter_class=fmt,
                                     description="Skin-lesion segmentation with a dual-path patch CNN.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", formatter_class=fmt, help="guided-filter an image")
    p.add_argument("input", help="RGB image to filter")
    p.add_argument("output", help="filtered image to write")
    _add_gf(p)
    _add_common(p)

    p = sub.add_parser("sample-patches", formatter_class=fmt,
                       help="draw training centers for one image and write a marker sheet")
    p.add_argument("--image", required=True, help="RGB image")
    p.add_argument("--mask", required=True, help="ground-truth mask for the image")
    p.add_argument("--out", required=True, help="marker sheet PNG to write")
    p.add_argument("--n", type=int, default=4500, help="total centers (multiple of 3)")
    p.add_argument("--border-radius", type=int, default=15, help="disk radius defining the border-margin region")
    _add_common(p)

    p = sub.add_parser("train", formatter_class=fmt, help="train a network from a manifest")
    p.add_argument("--manifest", required=True, help="CSV with image, mask and category columns")
    p.add_argument("--out", required=True, help="model file to write")
    _add_train(p)
    _add_gf(p)
    _add_common(p)

    p = sub.add_parser("segment", formatter_class=fmt, help="segment one image with a trained model")
    p.add_argument("image", help="raw RGB image, any size")
    p.add_argument("--model", required=True, help="model file written by train")
    p.add_argument("--out-mask", required=True, help="binary mask PNG at 400x600")
    p.add_argument("--out-map", help="write the probability map as 8-bit gray")
    p.add_argument("--out-overlay", help="write the mask contour drawn on the working-size image")
    _add_seg(p)
    _add_gf(p)
    _add_common(p)

    p = sub.add_parser("evaluate", formatter_class=fmt, help="sensitivity/specificity/accuracy of one mask")
    p.add_argument("--pred", required=True, help="predicted mask")
    p.add_argument("--gt", required=True, help="ground-truth mask of the same size")
    p.add_argument("--csv", help="also write the metrics to this CSV file")
    _add_common(p)

    p = sub.add_parser("cross-validate", formatter_class=fmt, help="leave-one-group-out evaluation")
    p.add_argument("--manifest", required=True, help="CSV with image, mask and category columns")
    p.add_argument("--out", default="cv_report.csv", help="report CSV")
    p.add_argument("--folds", type=int, default=4, help="number of groups")
    _add_train(p)
    _add_seg(p)
    _add_gf(p)
    _add_common(p)

    p = sub.add_parser("inspect-kernels", formatter_class=fmt, help="tile first-layer kernels into a PNG")
    p.add_argument("--model", required=True, help="model file written by train")
    p.add_argument("--out", required=True, help="PNG to write")
    p.add_argument("--scale", type=int, default=1, help="integer upscaling of the finished grid")
    _add_common(p)

    p = sub.add_parser("synth-gen", formatter_class=fmt, help="write a synthetic dataset with a manifest")
    p.add_argument("--n", type=int, default=8, help="number of images")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    return parser


# -- config files --------------------------------------------------------------

def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such config file: {path}")
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _subparsers(parser: argparse.ArgumentParser) -> dict:
    return parser._subparsers._group_actions[0].choices  # noqa: SLF001


def _peek(parser: argparse.ArgumentParser, argv):
    """Parse just enough to find the command and config path; required flags may come from the config."""
    relaxed = [a for sub in _subparsers(parser).values() for a in sub._actions  # noqa: SLF001
               if a.option_strings and a.required]
    for a in relaxed:
        a.required = False
    try:
        pre, _ = parser.parse_known_args(argv)
    finally:
        for a in relaxed:
            a.required = True
    return pre


def _apply_config(parser: argparse.ArgumentParser, argv):
    pre = _peek(parser, argv)
    if not getattr(pre, "config", None):
        return parser.parse_args(argv)
    sub = _subparsers(parser)[pre.command]
    actions = {a.dest: a for a in sub._actions if a.option_strings and a.dest not in ("help", "config")}
    defaults = {}
    for key, value in read_config(pre.config).items():
        if key not in actions:
            raise UsageError(f"unknown config key {key!r} for command {pre.command}")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):  # noqa: SLF001
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            conv = action.type or str
            try:
                defaults[key] = conv(value)
            except ValueError as exc:
                raise UsageError(f"config key {key}: {exc}") from exc
            if action.choices is not None and defaults[key] not in action.choices:
                raise UsageError(f"config key {key}: {value!r} not in {sorted(action.choices)}")
    for key in defaults:
        if actions[key].required:
            actions[key].required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


# -- commands -----------------------------------------------------------------

def _gf(args) -> GuidedFilterParams:
    return GuidedFilterParams(args.gf_radius, args.gf_eps)


def _arch(args) -> Architecture:
    return Architecture(maps1=args.maps1, maps2=args.maps2, fusion=args.fusion)


def _sgd(args) -> SgdConfig:
    return SgdConfig(args.lr, args.momentum, args.batch_size, args.epochs, args.seed)


def _seg(args) -> SegmentationConfig:
    return SegmentationConfig(tau=args.tau, dilation_radius=args.dilation_radius, gf=_gf(args),
                              batch_size=args.infer_batch)


def cmd_preprocess(args):
    img = load_image(args.input)
    save_image(preprocess_image(img, _gf(args)), args.output)
    print(f"wrote {args.output}")


def cmd_sample_patches(args):
    geom = PatchGeometry()
    img = resize(load_image(args.image), geom.image_h, geom.image_w)
    gt = prepare_mask(load_mask(args.mask), geom)
    coords, regions = sample_training_coords(gt, args.n, np.random.default_rng([args.seed, 0, 0]),
                                             args.border_radius)
    sheet = img.copy()
    for name, color in REGION_COLORS.items():
        rc = coords[regions == name]
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                rr = np.clip(rc[:, 0] + dy, 0, geom.image_h - 1)
                cc = np.clip(rc[:, 1] + dx, 0, geom.image_w - 1)
                sheet[rr, cc] = color
    save_image(sheet, args.out)
    counts = {name: int(np.count_nonzero(regions == name)) for name in REGION_COLORS}
    print(f"wrote {args.out}: " + ", ".join(f"{k} {v}" for k, v in counts.items()))


def _load_training_data(manifest, seg: SegmentationConfig):
    images, gts = [], []
    for e in manifest.entries:
        images.append(prepare_image(load_image(e.image), seg))
        gts.append(prepare_mask(load_mask(e.mask), seg.geometry))
    return images, gts


def cmd_train(args):
    manifest = load_manifest(args.manifest)
    if len(manifest) == 0:
        raise ManifestError(f"{args.manifest}: manifest has no entries")
    seg = SegmentationConfig(gf=_gf(args))
    images, gts = _load_training_data(manifest, seg)
    samples = build_training_set(images, gts, args.patches_per_image, seg.geometry, seed=args.seed,
                                 radius=args.border_radius)
    print(f"training {args.mode} network on {len(samples)} patches from {len(images)} images")
    net, _ = train(samples, MODE_NAMES[args.mode], _sgd(args), _arch(args),
                   on_epoch=lambda e, l: print(f"epoch {e} loss {l:.6f}", flush=True))
    save_model(net, args.out)
    print(f"wrote {args.out}")


def cmd_segment(args):
    net = load_model(args.model)
    raw = load_image(args.image)
    seg = _seg(args)
    mask, prob = segment(net, raw, seg)
    save_mask(mask, args.out_mask)
    if args.out_map:
        save_probability_map(prob, args.out_map)
    if args.out_overlay:
        save_overlay(resize(raw, seg.geometry.image_h, seg.geometry.image_w), mask, args.out_overlay)
    print(f"wrote {args.out_mask}: {int(mask.sum())} lesion pixels")


def cmd_evaluate(args):
    pred, gt = load_mask(args.pred), load_mask(args.gt)
    if pred.shape != gt.shape:
        raise ValueError(f"size mismatch: prediction {pred.shape} vs ground truth {gt.shape}")
    m = metrics(confusion(pred, gt))
    c = m.counts
    print(f"tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn}")
    print(f"sensitivity {format_metric(m.sensitivity)}")
    print(f"specificity {format_metric(m.specificity)}")
    print(f"accuracy {format_metric(m.accuracy)}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tp", "fp", "tn", "fn", "sensitivity", "specificity", "accuracy"])
            w.writerow([c.tp, c.fp, c.tn, c.fn, format_metric(m.sensitivity), format_metric(m.specificity),
                        format_metric(m.accuracy)])


def cmd_cross_validate(args):
    manifest = load_manifest(args.manifest)
    report = run_cv(manifest, _seg(args), _sgd(args), MODE_NAMES[args.mode], _arch(args),
                    args.patches_per_image, args.seed, args.folds, border_radius=args.border_radius,
                    log_fn=lambda msg: print(msg, flush=True))
    report.write_csv(args.out)
    for row in report.rows():
        if row["fold"] == "aggregate":
            print(f"{row['scope']}: sensitivity {row['sensitivity']} specificity {row['specificity']} "
                  f"accuracy {row['accuracy']}")
    print(f"wrote {args.out}")


def kernel_grid(net: TwoPathNetwork, pad: int = KERNEL_PAD) -> np.ndarray:
    """One row per active path, one ``k x k`` RGB thumbnail per first-layer kernel.

    Each thumbnail is min-max normalized on its own; a constant kernel maps to
    mid-gray.  Cells are ``(k + pad)`` square with the padding on the right
    and bottom.
    """
    k, maps = net.arch.k1, net.arch.maps1
    cell = k + pad
    grid = np.zeros((len(net.paths) * cell, maps * cell, 3))
    for row, path in enumerate(net.paths):
        w = net.params[f"{path}.conv1.w"].astype(np.float64)
        for m in range(maps):
            kern = w[:, :, :, m]
            lo, hi = kern.min(), kern.max()
            thumb = np.full_like(kern, 0.5) if hi - lo <= 0 else (kern - lo) / (hi - lo)
            grid[row * cell:row * cell + k, m * cell:m * cell + k] = thumb
    return grid


def cmd_inspect_kernels(args):
    net = load_model(args.model)
    grid = kernel_grid(net)
    if args.scale > 1:
        grid = np.kron(grid, np.ones((args.scale, args.scale, 1)))
    save_image(grid, args.out)
    print(f"wrote {args.out}: {grid.shape[0]}x{grid.shape[1]}")


def cmd_synth_gen(args):
    if args.n < 4:
        raise UsageError(f"--n must be at least 4 for cross-validation compatibility, got {args.n}")
    manifest = generate_synthetic_dataset(args.n, args.seed, args.out)
    print(f"wrote {len(manifest)} images and {Path(args.out) / 'manifest.csv'}")


COMMANDS = {
    "preprocess": cmd_preprocess,
    "sample-patches": cmd_sample_patches,
    "train": cmd_train,
    "segment": cmd_segment,
    "evaluate": cmd_evaluate,
    "cross-validate": cmd_cross_validate,
    "inspect-kernels": cmd_inspect_kernels,
    "synth-gen": cmd_synth_gen,
}


# output files whose folder must already exist; synth-gen creates its own directory
OUTPUT_ARGS = ("output", "out", "out_mask", "out_map", "out_overlay", "csv")


def _check_outputs(args) -> None:
    """Fail before any heavy work when an output file cannot be created."""
    if args.command == "synth-gen":
        return
    for name in OUTPUT_ARGS:
        value = getattr(args, name, None)
        if not value:
            continue
        parent = Path(value).parent
        if not parent.is_dir():
            raise UsageError(f"cannot write {value}: directory {parent} does not exist")
        if Path(value).is_dir():
            raise UsageError(f"cannot write {value}: it is a directory")


def _fail(code: int, exc) -> int:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"lesionseg: error: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        return _fail(2, exc)
    except FileNotFoundError as exc:
        return _fail(2, exc)
    try:
        _check_outputs(args)
        COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(2, exc)
    except TrainingDivergedError as exc:
        return _fail(1, exc)
    except INPUT_ERRORS as exc:
        return _fail(2, exc)
    except (RuntimeError, OSError, MemoryError) as exc:
        return _fail(1, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
