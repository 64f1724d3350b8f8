import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimetic_detect.perturb import (
    apply_and_clip,
    sign_noise,
    smooth_control,
    to_unit_raster,
)

EPS = 16.0 / 255.0


class TestSignNoise:
    def test_every_entry_at_budget(self):
        p = sign_noise(64, 48, EPS, seed=0)
        mags = np.abs(p.delta)
        assert mags.max() == EPS and mags.min() == EPS

    @pytest.mark.parametrize("seed", (1, 2, 3, 17))
    def test_sign_fraction_balanced_128(self, seed):
        p = sign_noise(128, 128, EPS, seed=seed)
        frac = np.mean(p.delta > 0)
        assert 0.47 <= frac <= 0.53  # 3-sigma band for 16384 fair signs

    def test_seed_determinism(self):
        a = sign_noise(32, 32, EPS, seed=9)
        b = sign_noise(32, 32, EPS, seed=9)
        assert np.array_equal(a.delta, b.delta)

    def test_different_seeds_differ(self):
        a = sign_noise(32, 32, EPS, seed=1)
        b = sign_noise(32, 32, EPS, seed=2)
        assert np.any(a.delta != b.delta)

    def test_shape_and_metadata(self):
        p = sign_noise(11, 7, EPS, seed=5)
        assert p.shape == (11, 7)
        assert p.kind == "sign-noise" and p.seed == 5 and p.eps == EPS


class TestSmoothControl:
    def test_zero_on_axes(self):
        p = smooth_control(32, 64, EPS)
        assert np.all(p.delta[0, :] == 0.0)
        assert np.all(p.delta[:, 0] == 0.0)

    def test_peak_at_eighth(self):
        h = w = 128
        p = smooth_control(h, w, EPS)
        assert abs(p.delta[h // 8, w // 8] - EPS) <= 1e-15

    def test_budget_respected(self):
        p = smooth_control(64, 64, EPS)
        assert np.max(np.abs(p.delta)) <= EPS

    def test_deterministic_without_seed(self):
        a = smooth_control(16, 16, EPS)
        b = smooth_control(16, 16, EPS)
        assert np.array_equal(a.delta, b.delta)
        assert a.seed is None


class TestApplyAndClip:
    def test_clips_at_one(self):
        img = np.full((4, 4), 0.99)
        p = sign_noise(4, 4, EPS, seed=3)
        out = apply_and_clip(img, p)
        assert out.max() <= 1.0
        assert out[p.delta > 0].max() == 1.0

    def test_no_clip_in_interior(self):
        img = np.full((4, 4), 0.5)
        p = smooth_control(4, 4, EPS)
        out = apply_and_clip(img, p)
        assert np.allclose(out, img + p.delta, atol=0)

    def test_half_gray_sign_noise_no_clipping(self):
        img = np.full((8, 8), 0.5)
        p = sign_noise(8, 8, EPS, seed=1)
        out = apply_and_clip(img, p)
        assert set(np.round(out, 12).ravel()) <= {
            round(0.5 - EPS, 12), round(0.5 + EPS, 12)
        }

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            apply_and_clip(np.zeros((4, 4)), sign_noise(4, 5, EPS, seed=0))

    @given(st.integers(0, 10**6))
    @settings(deadline=None, max_examples=30)
    def test_clipping_only_shrinks(self, seed):
        img = np.random.default_rng(seed).uniform(size=(6, 6))
        p = sign_noise(6, 6, EPS, seed=seed)
        out = apply_and_clip(img, p)
        assert np.all(np.abs(out - img) <= np.abs(p.delta) + 1e-15)


def test_unit_raster_affine_map():
    p = sign_noise(8, 8, EPS, seed=2)
    u = to_unit_raster(p)
    assert set(np.unique(u)) == {0.0, 1.0}
    q = smooth_control(8, 8, EPS)
    uq = to_unit_raster(q)
    assert uq.min() >= 0.0 and uq.max() <= 1.0
    assert np.allclose(uq * 2 * EPS - EPS, q.delta, atol=1e-15)
