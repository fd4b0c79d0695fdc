"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Criteria 1-7 are oracle and invariant checks; 8 trains and segments on a
synthetic dataset (about 15 minutes on one core); 9 drives the CLI twice and
compares outputs byte for byte.
"""
import contextlib
import time

import numpy as np
import pytest

import gradcheck
import oracles
from conftest import ACCEPTANCE_LINES, BACKENDS, random_mask
from lesionseg import _backend, _fallback, cli, morphology, nn
from lesionseg import evaluation as ev
from lesionseg.patches import REGIONS, sample_training_coords
from lesionseg.pipeline import SegmentationConfig
from lesionseg.preprocess import GuidedFilterParams, guided_filter, preprocess_image


@contextlib.contextmanager
def criterion(number, title, budget_s):
    """Time the body, then record and print one line; a failure or overrun marks the criterion FAIL."""
    start = time.perf_counter()
    detail = {}
    try:
        yield detail
        elapsed = time.perf_counter() - start
        assert elapsed < budget_s, f"took {elapsed:.1f} s, budget {budget_s} s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"FAIL criterion {number}: {title} ({elapsed:.1f} s) :: {str(exc).splitlines()[0][:200]}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    extra = ", ".join(f"{k}={v}" for k, v in detail.items())
    line = f"PASS criterion {number}: {title} ({elapsed:.1f} s{', ' + extra if extra else ''})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_1_morphology_oracles(monkeypatch):
    with criterion(1, "morphology equals set-definition oracles", 10) as d:
        rng = np.random.default_rng(101)
        masks = [random_mask(rng) for _ in range(100)]
        for name in BACKENDS:
            mod = _fallback if name == "python" else _backend.compiled()
            monkeypatch.setattr(morphology, "kernels", mod)
            for m in masks:
                for r in (1, 3, 15):
                    dil, ero = oracles.dilate_windows(m, r), oracles.erode_windows(m, r)
                    assert np.array_equal(morphology.dilate(m, r), dil), f"dilate r={r} [{name}]"
                    assert np.array_equal(morphology.erode(m, r), ero), f"erode r={r} [{name}]"
                    assert np.array_equal(morphology.border_margin(m, r), dil & ~ero), f"margin r={r} [{name}]"
        for m in masks:
            labels, sizes = oracles.flood_labels(m, 8)
            keep = labels == int(np.argmax(sizes[1:])) + 1
            assert np.array_equal(morphology.largest_component(m, 8), keep)
            assert np.array_equal(morphology.fill_holes(m), oracles.fill_holes_flood(m))
        d["masks"] = len(masks)
        d["backends"] = "+".join(BACKENDS)


def test_criterion_2_guided_filter_identities():
    with criterion(2, "guided filter identities and window oracle", 30) as d:
        rng = np.random.default_rng(202)
        for value in (0.0, 0.3, 1.0):
            img = np.full((37, 41, 3), value)
            for r, eps in ((1, 0.0), (5, 0.01), (50, 0.01)):
                assert np.array_equal(preprocess_image(img, GuidedFilterParams(r, eps)), img)
        worst_identity = 0.0
        for _ in range(5):
            img = rng.random((32, 32, 3))
            worst_identity = max(worst_identity,
                                 np.abs(preprocess_image(img, GuidedFilterParams(5, 0.0)) - img).max())
        assert worst_identity <= 1e-6
        worst_oracle = 0.0
        for _ in range(5):
            img = rng.random((32, 32))
            out = guided_filter(img, img, GuidedFilterParams(5, 0.01))
            worst_oracle = max(worst_oracle, np.abs(out - oracles.guided_filter(img, img, 5, 0.01)).max())
        assert worst_oracle <= 1e-5
        d["identity_err"] = f"{worst_identity:.1e}"
        d["oracle_err"] = f"{worst_oracle:.1e}"


def test_criterion_3_gradient_check():
    with criterion(3, "analytic gradients match central differences", 120) as d:
        errors = gradcheck.relative_errors(*gradcheck.reduced_fixture(mode="dual"))
        assert len(errors) == 12
        worst = max(errors, key=errors.get)
        assert errors[worst] < 1e-4, f"{worst}: relative error {errors[worst]:.2e}"
        d["max_rel_err"] = f"{errors[worst]:.1e}"


def test_criterion_4_architecture_audit():
    with criterion(4, "layer shapes and softmax normalization", 1) as d:
        net = nn.TwoPathNetwork.initialize(rng=404)
        rng = np.random.default_rng(404)
        loc, glo = rng.random((1, 31, 31, 3)), rng.random((1, 31, 31, 3))
        for path, x in (("local", loc), ("global", glo)):
            assert nn.path_shapes(net, x, path) == [(26, 26, 60), (13, 13, 60), (9, 9, 60), (3, 3, 60)]
            assert nn.path_features(net, path, x).shape == (1, 540)
        assert net.params["fusion.w"].shape == (1080, 500)
        probs = net.predict_proba(loc, glo)
        assert probs.shape == (1, 2) and abs(probs.sum() - 1) <= 1e-6
        d["features"] = "540+540=1080"


def _random_gt(rng):
    yy, xx = np.mgrid[:400, :600]
    gt = np.zeros((400, 600), bool)
    for _ in range(rng.integers(1, 4)):
        cy, cx = rng.uniform(60, 340), rng.uniform(60, 540)
        a, b = rng.uniform(15, 80, 2)
        gt |= ((yy - cy) / a) ** 2 + ((xx - cx) / b) ** 2 <= 1
    return gt


def test_criterion_5_patch_sampler_contract():
    with criterion(5, "patch sampler quotas, membership, determinism", 30) as d:
        rng = np.random.default_rng(505)
        for i in range(20):
            gt = _random_gt(rng)
            coords, regions = sample_training_coords(gt, 4500, np.random.default_rng([i, 0, 0]), radius=15)
            assert len(coords) == 4500
            for name in REGIONS:
                assert (regions == name).sum() == 1500, f"{name}: {(regions == name).sum()}"
            lesion, normal, border = (coords[regions == name] for name in REGIONS)
            assert gt[lesion[:, 0], lesion[:, 1]].all(), "lesion coordinate outside the lesion"
            assert not gt[normal[:, 0], normal[:, 1]].any(), "normal coordinate inside the lesion"
            assert oracles.in_margin(gt, border, 15).all(), "border coordinate outside the margin"
            again = sample_training_coords(gt, 4500, np.random.default_rng([i, 0, 0]), radius=15)
            assert np.array_equal(again[0], coords) and np.array_equal(again[1], regions)
        d["masks"] = 20


def test_criterion_6_metrics_oracle():
    with criterion(6, "confusion counts and metrics equal pixel loops", 5) as d:
        rng = np.random.default_rng(606)
        for _ in range(100):
            pred = rng.random((64, 64)) < rng.random()
            gt = rng.random((64, 64)) < rng.random()
            tp, fp, tn, fn = oracles.confusion_loop(pred, gt)
            c = ev.confusion(pred, gt)
            assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)
            m = ev.metrics(c)
            assert m.accuracy == (tp + tn) / (tp + fp + tn + fn)
            assert m.sensitivity == (tp / (tp + fn) if tp + fn else ev.NOT_APPLICABLE)
            assert m.specificity == (tn / (tn + fp) if tn + fp else ev.NOT_APPLICABLE)
        none_pos = ev.metrics(ev.confusion(np.zeros((4, 4)), np.zeros((4, 4))))
        assert none_pos.sensitivity is ev.NOT_APPLICABLE and none_pos.specificity == 1.0
        none_neg = ev.metrics(ev.confusion(np.ones((4, 4)), np.ones((4, 4))))
        assert none_neg.specificity is ev.NOT_APPLICABLE and none_neg.sensitivity == 1.0
        with pytest.raises(ValueError):
            ev.metrics(ev.ConfusionCounts())
        d["pairs"] = 100


def test_criterion_7_cv_split():
    with criterion(7, "cross-validation split invariants", 1) as d:
        plan = ev.cv_split(126, 4, seed=0)
        sizes = plan.fold_sizes()
        assert sorted(sizes) == [31, 31, 32, 32]
        folds = [set(plan.test_indices(f).tolist()) for f in range(4)]
        assert all(not (folds[i] & folds[j]) for i in range(4) for j in range(i + 1, 4))
        assert set().union(*folds) == set(range(126))
        d["sizes"] = sizes


@pytest.mark.slow
def test_criterion_8_end_to_end_synthetic(tmp_path):
    with criterion(8, "synthetic end-to-end segmentation", 30 * 60) as d:
        manifest = ev.generate_synthetic_dataset(20, 0, tmp_path / "synth")
        plan = ev.cv_split(20, 5, seed=0)
        assert len(plan.train_indices(0)) == 16 and len(plan.test_indices(0)) == 4
        seg = SegmentationConfig()
        sgd = nn.SgdConfig(learning_rate=0.01, momentum=0.9, batch_size=64, epochs=5, seed=0)
        results = {}
        for mode in ("local_only", "dual"):
            report = ev.run_cv(manifest, seg, sgd, mode, nn.Architecture(), per_image=498, seed=0, k=5,
                               folds=[0], log_fn=print)
            results[mode] = ev.metrics(report.aggregate("all"))
            per_image = [round(ev.metrics(c).accuracy, 4) for _, _, _, c in report.image_counts]
            print(f"{mode}: pooled {results[mode]}, per-image accuracy {per_image}")
        dual, local = results["dual"], results["local_only"]
        d["dual_acc"] = f"{dual.accuracy:.4f}"
        d["dual_sens"] = f"{dual.sensitivity:.4f}"
        d["local_acc"] = f"{local.accuracy:.4f}"
        assert dual.accuracy >= 0.95, f"dual accuracy {dual.accuracy:.4f}"
        assert dual.sensitivity >= 0.90, f"dual sensitivity {dual.sensitivity:.4f}"
        assert dual.accuracy >= local.accuracy, f"dual {dual.accuracy:.4f} < local {local.accuracy:.4f}"


@pytest.mark.slow
def test_criterion_9_determinism(tmp_path):
    with criterion(9, "repeated train and segment are bit-identical", 10 * 60) as d:
        data = tmp_path / "data"
        assert cli.main(["synth-gen", "--n", "5", "--seed", "9", "--out", str(data)]) == 0
        train_dir = tmp_path / "train"
        train_dir.mkdir()
        lines = (data / "manifest.csv").read_text().splitlines()
        (train_dir / "manifest.csv").write_text("\n".join(lines[:5]).replace("image_", "../data/image_")
                                                .replace("mask_", "../data/mask_") + "\n")
        models = []
        for run in ("a", "b"):
            out = tmp_path / f"model_{run}.bin"
            code = cli.main(["train", "--manifest", str(train_dir / "manifest.csv"), "--out", str(out),
                             "--patches-per-image", "300", "--epochs", "1", "--seed", "9", "--deterministic"])
            assert code == 0
            models.append(out.read_bytes())
        assert models[0] == models[1], "model files differ"
        masks, maps = [], []
        for run in ("a", "b"):
            mask, prob = tmp_path / f"mask_{run}.png", tmp_path / f"prob_{run}.png"
            code = cli.main(["segment", str(data / "image_004.png"), "--model", str(tmp_path / "model_a.bin"),
                             "--out-mask", str(mask), "--out-map", str(prob)])
            assert code == 0
            masks.append(mask.read_bytes())
            maps.append(prob.read_bytes())
        assert masks[0] == masks[1], "masks differ"
        assert maps[0] == maps[1], "probability maps differ"
        d["model_bytes"] = len(models[0])
