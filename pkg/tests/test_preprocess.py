import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from lesionseg.preprocess import GuidedFilterParams, guided_filter, preprocess_image


def _step(rows=6, width=16):
    row = np.r_[np.zeros(width // 2), np.ones(width - width // 2)]
    return np.tile(row, (rows, 1))


class TestParams:
    def test_defaults(self):
        p = GuidedFilterParams()
        assert (p.radius, p.epsilon) == (50, 0.01)

    @pytest.mark.parametrize("r,eps", [(0, 0.01), (-2, 0.01), (3, -1e-3)])
    def test_invalid(self, r, eps):
        with pytest.raises(ValueError):
            GuidedFilterParams(r, eps)


class TestGuidedFilter:
    @pytest.mark.parametrize("r,eps", [(1, 0.0), (3, 0.01), (50, 0.01), (7, 10.0)])
    def test_constant_exact(self, r, eps):
        img = np.full((20, 30), 0.42)
        out = guided_filter(img, img, GuidedFilterParams(r, eps))
        assert (out == 0.42).all()

    def test_eps_zero_identity(self, rng):
        img = rng.random((32, 32))
        np.testing.assert_allclose(guided_filter(img, img, GuidedFilterParams(4, 0.0)), img, atol=1e-6)

    def test_step_edge_matches_window_oracle(self):
        img = _step()
        out = guided_filter(img, img, GuidedFilterParams(2, 0.04))
        np.testing.assert_allclose(out, oracles.guided_filter(img, img, 2, 0.04), atol=1e-12)
        # smoothing never overshoots the step's range, and rows stay identical
        assert out.min() >= -1e-12 and out.max() <= 1 + 1e-12
        np.testing.assert_allclose(out, np.tile(out[0], (out.shape[0], 1)))

    @pytest.mark.parametrize("seed", range(3))
    def test_random_matches_window_oracle(self, seed):
        r = np.random.default_rng(seed)
        img = r.random((32, 32))
        out = guided_filter(img, img, GuidedFilterParams(5, 0.01))
        np.testing.assert_allclose(out, oracles.guided_filter(img, img, 5, 0.01), atol=1e-5)

    def test_separate_guide_matches_oracle(self, rng):
        src, guide = rng.random((18, 21)), rng.random((18, 21))
        out = guided_filter(src, guide, GuidedFilterParams(3, 0.05))
        np.testing.assert_allclose(out, oracles.guided_filter(src, guide, 3, 0.05), atol=1e-10)

    def test_radius_larger_than_image(self, rng):
        img = rng.random((9, 11))
        out = guided_filter(img, img, GuidedFilterParams(50, 0.01))
        np.testing.assert_allclose(out, oracles.guided_filter(img, img, 50, 0.01), atol=1e-10)

    def test_larger_eps_blurs_edge_more(self):
        img = _step(4, 24)
        jumps = []
        for eps in (0.001, 0.01, 0.04, 0.2, 1.0):
            out = guided_filter(img, img, GuidedFilterParams(3, eps))
            jumps.append(np.abs(np.diff(out[0])).max())
        assert all(a > b for a, b in zip(jumps, jumps[1:]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            guided_filter(np.zeros((4, 4)), np.zeros((4, 5)), GuidedFilterParams(1, 0.1))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(1e-4, 1.0))
    def test_output_finite_and_bounded(self, seed, r, eps):
        img = np.random.default_rng(seed).random((12, 12))
        out = guided_filter(img, img, GuidedFilterParams(r, eps))
        assert np.isfinite(out).all()
        # self-guided a lies in [0, 1), so the output cannot stray far from [0, 1]
        assert out.min() > -1 and out.max() < 2


class TestPreprocessImage:
    def test_constant_rgb(self):
        img = np.empty((15, 20, 3))
        img[...] = [0.2, 0.5, 0.9]
        np.testing.assert_array_equal(preprocess_image(img, GuidedFilterParams(5, 0.01)), img)

    def test_eps_zero_identity(self, rng):
        img = rng.random((24, 24, 3))
        np.testing.assert_allclose(preprocess_image(img, GuidedFilterParams(3, 0.0)), img, atol=1e-6)

    def test_per_channel_oracle(self, rng):
        img = rng.random((32, 32, 3))
        out = preprocess_image(img, GuidedFilterParams(5, 0.01))
        for c in range(3):
            np.testing.assert_allclose(out[..., c], oracles.guided_filter(img[..., c], img[..., c], 5, 0.01),
                                       atol=1e-5)

    def test_output_in_unit_range(self, rng):
        img = (rng.random((20, 20, 3)) > 0.5).astype(float)
        out = preprocess_image(img, GuidedFilterParams(2, 0.001))
        assert out.min() >= 0 and out.max() <= 1
