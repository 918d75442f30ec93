import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from etckit.images import (
    BlockGrid,
    ImageBuffer,
    load_ppm,
    merge_blocks,
    pad_replicate,
    psnr,
    save_ppm,
    split_blocks,
)


def _img(h, w, c, seed=0):
    rng = np.random.default_rng(seed)
    return ImageBuffer(rng.integers(0, 256, (h, w, c), dtype=np.uint8))


class TestImageBuffer:
    def test_properties(self):
        img = _img(4, 6, 3)
        assert (img.height, img.width, img.channels) == (4, 6, 3)

    def test_rejects_bad_dtype(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((4, 4, 1), dtype=np.float64))

    def test_rejects_bad_channel_count(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((4, 4, 2), dtype=np.uint8))

    def test_promotes_rank_2_to_grayscale(self):
        img = ImageBuffer(np.zeros((4, 5), dtype=np.uint8))
        assert (img.height, img.width, img.channels) == (4, 5, 1)

    def test_rejects_bad_rank(self):
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((4, 4, 1, 1), dtype=np.uint8))
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((0, 4, 1), dtype=np.uint8))

    def test_equality(self):
        a, b = _img(3, 3, 1, 1), _img(3, 3, 1, 1)
        assert a == b
        assert a != _img(3, 3, 1, 2)


class TestPPM:
    def test_round_trip_color(self):
        img = _img(5, 7, 3)
        assert load_ppm(save_ppm(img)) == img

    def test_round_trip_gray(self):
        img = _img(7, 5, 1)
        assert load_ppm(save_ppm(img)) == img

    def test_canonical_header(self):
        img = ImageBuffer(np.zeros((2, 3, 3), dtype=np.uint8))
        raw = save_ppm(img)
        assert raw.startswith(b"P6\n3 2\n255\n")
        assert len(raw) == len(b"P6\n3 2\n255\n") + 2 * 3 * 3

    def test_gray_uses_p5(self):
        img = ImageBuffer(np.zeros((2, 3, 1), dtype=np.uint8))
        assert save_ppm(img).startswith(b"P5\n")

    def test_comments_and_whitespace(self):
        raw = b"P5 # a comment\n# another\n 2\t2 #w\n255\n\x01\x02\x03\x04"
        img = load_ppm(raw)
        assert img.data[:, :, 0].tolist() == [[1, 2], [3, 4]]

    def test_rejects_bad_magic(self):
        with pytest.raises(ValueError):
            load_ppm(b"P3\n1 1\n255\n0 0 0")

    def test_rejects_truncated_payload(self):
        with pytest.raises(ValueError):
            load_ppm(b"P5\n2 2\n255\n\x00\x00\x00")

    def test_rejects_nonmax_255(self):
        with pytest.raises(ValueError):
            load_ppm(b"P5\n1 1\n65535\n\x00\x00")

    @given(st.integers(1, 12), st.integers(1, 12), st.sampled_from([1, 3]), st.integers(0, 50))
    def test_round_trip_property(self, h, w, c, seed):
        img = _img(h, w, c, seed)
        assert load_ppm(save_ppm(img)) == img


class TestBlocks:
    def test_split_merge_round_trip(self):
        img = _img(32, 48, 3)
        blocks, grid = split_blocks(img, 16)
        assert grid == BlockGrid(block_size=16, rows=2, cols=3)
        assert blocks.shape == (6, 16, 16, 3)
        assert merge_blocks(blocks, grid, 3) == img

    def test_block_order_is_row_major(self):
        data = np.arange(16, dtype=np.uint8).reshape(4, 4, 1)
        blocks, grid = split_blocks(ImageBuffer(data), 2)
        assert blocks[0, :, :, 0].tolist() == [[0, 1], [4, 5]]
        assert blocks[1, :, :, 0].tolist() == [[2, 3], [6, 7]]
        assert blocks[2, :, :, 0].tolist() == [[8, 9], [12, 13]]

    def test_split_rejects_non_divisible(self):
        with pytest.raises(ValueError):
            split_blocks(_img(30, 32, 1), 16)

    def test_merge_rejects_wrong_count(self):
        blocks, grid = split_blocks(_img(32, 32, 1), 16)
        with pytest.raises(ValueError):
            merge_blocks(blocks[:3], grid, 1)

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 8), st.sampled_from([1, 3]))
    def test_split_merge_property(self, rows, cols, bs, c):
        img = _img(rows * bs, cols * bs, c, seed=rows * 31 + cols)
        blocks, grid = split_blocks(img, bs)
        assert merge_blocks(blocks, grid, c) == img


class TestPadReplicate:
    def test_no_padding_needed(self):
        img = _img(16, 16, 3)
        padded, pr, pb = pad_replicate(img, 16)
        assert (pr, pb) == (0, 0)
        assert padded == img

    def test_pads_to_divisibility(self):
        img = _img(30, 41, 3)
        padded, pr, pb = pad_replicate(img, 16)
        assert (padded.height, padded.width) == (32, 48)
        assert (pr, pb) == (7, 2)
        # replicated edge values
        assert (padded.data[:30, 41:, :] == img.data[:, 40:41, :]).all()
        assert (padded.data[30:, :41, :] == img.data[29:30, :41, :]).all()


class TestPSNR:
    def test_identical_is_infinite(self):
        img = _img(8, 8, 3)
        assert psnr(img, img) == math.inf

    def test_known_value(self):
        a = ImageBuffer(np.zeros((4, 4, 1), dtype=np.uint8))
        b = ImageBuffer(np.full((4, 4, 1), 255, dtype=np.uint8))
        assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_single_unit_error(self):
        a = ImageBuffer(np.zeros((1, 1, 1), dtype=np.uint8))
        b = ImageBuffer(np.ones((1, 1, 1), dtype=np.uint8))
        assert psnr(a, b) == pytest.approx(10 * math.log10(255**2), rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr(_img(4, 4, 1), _img(4, 5, 1))

    def test_symmetry(self):
        a, b = _img(8, 8, 3, 1), _img(8, 8, 3, 2)
        assert psnr(a, b) == psnr(b, a)
