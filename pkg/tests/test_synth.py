import numpy as np
import pytest

from etckit.synth import reference_images, synth_natural_image


class TestSynthNaturalImage:
    def test_shape_and_dtype(self):
        img = synth_natural_image(48, 80, seed=0)
        assert (img.height, img.width, img.channels) == (80, 48, 3)
        assert img.data.dtype == np.uint8

    def test_grayscale_variant(self):
        img = synth_natural_image(32, 32, seed=0, channels=1)
        assert img.channels == 1

    def test_deterministic(self):
        a = synth_natural_image(64, 64, seed=5)
        b = synth_natural_image(64, 64, seed=5)
        assert a == b

    def test_seed_changes_content(self):
        a = synth_natural_image(64, 64, seed=5)
        b = synth_natural_image(64, 64, seed=6)
        assert a != b

    def test_uses_full_tonal_range_without_saturating(self):
        img = synth_natural_image(256, 256, seed=1)
        lum = img.data.astype(np.float64).mean(axis=2)
        assert 40.0 < lum.mean() < 215.0
        assert lum.std() > 10.0  # textured, not flat
        saturated = ((img.data == 0) | (img.data == 255)).mean()
        assert saturated < 0.25

    def test_chroma_is_smooth_relative_to_luma(self):
        # block-scrambled borders must not leak chroma energy; the generator
        # keeps chroma variation well below luma variation like photographs do
        img = synth_natural_image(256, 256, seed=2)
        rgb = img.data.astype(np.float64)
        lum = rgb @ (0.299, 0.587, 0.114)
        cb = rgb[:, :, 2] - lum
        assert np.std(np.diff(cb, axis=1)) < 0.5 * np.std(np.diff(lum, axis=1))

    def test_rejects_bad_channels(self):
        with pytest.raises(ValueError):
            synth_natural_image(16, 16, seed=0, channels=2)


class TestReferenceImages:
    def test_count_size_and_determinism(self):
        imgs = reference_images(count=2, size=64)
        again = reference_images(count=2, size=64)
        assert len(imgs) == 2
        for a, b in zip(imgs, again, strict=True):
            assert (a.height, a.width) == (64, 64)
            assert a == b

    def test_images_are_distinct(self):
        imgs = reference_images(count=3, size=64)
        assert imgs[0] != imgs[1] != imgs[2]
