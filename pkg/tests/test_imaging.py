import numpy as np
import pytest

from helpers import flood_fill_labels, otsu_oracle
from maskforge import (
    abs_diff_sum,
    binarize,
    connected_components,
    disc_footprint,
    mask_bbox,
    mask_iou,
    morph_close,
    morph_open,
    otsu_threshold,
    rgb_to_value,
    rle_decode,
    rle_encode,
)
from maskforge.errors import (
    ChannelMismatch,
    DegenerateHistogram,
    DimensionMismatch,
    EmptyMask,
    MalformedRle,
)
from maskforge.imaging import CircularRegion, resize_bilinear


def rgb(*pixels, shape=None):
    arr = np.array(pixels, dtype=np.uint8)
    if shape:
        return arr.reshape(shape)
    return arr.reshape(1, len(pixels), 3)


class TestRgbToValue:
    def test_max_of_channels(self):
        assert rgb_to_value(rgb((10, 200, 30)))[0, 0] == 200

    def test_black(self):
        assert rgb_to_value(rgb((0, 0, 0)))[0, 0] == 0

    def test_matches_per_pixel_max_oracle(self):
        rng = np.random.default_rng(3)
        img = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
        got = rgb_to_value(img)
        for y in range(8):
            for x in range(8):
                assert got[y, x] == max(int(c) for c in img[y, x])

    def test_rejects_gray(self):
        with pytest.raises(ChannelMismatch):
            rgb_to_value(np.zeros((4, 4), dtype=np.uint8))


class TestAbsDiffSum:
    def test_identical_inputs_zero(self):
        rng = np.random.default_rng(0)
        a = rng.integers(0, 256, (5, 7, 3), dtype=np.uint8)
        assert not abs_diff_sum(a, a).any()

    def test_saturates_at_255(self):
        a = rgb((255, 255, 255))
        b = rgb((0, 0, 0))
        assert abs_diff_sum(a, b)[0, 0] == 255

    def test_matches_arithmetic_oracle(self):
        rng = np.random.default_rng(1)
        a = rng.integers(0, 256, (6, 6, 3), dtype=np.uint8)
        b = rng.integers(0, 256, (6, 6, 3), dtype=np.uint8)
        got = abs_diff_sum(a, b)
        for y in range(6):
            for x in range(6):
                total = sum(abs(int(a[y, x, c]) - int(b[y, x, c])) for c in range(3))
                assert got[y, x] == min(255, total)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            abs_diff_sum(np.zeros((2, 2, 3), np.uint8), np.zeros((3, 2, 3), np.uint8))


class TestOtsu:
    def test_bimodal_matches_exhaustive_search(self):
        img = np.full((10, 10), 50, dtype=np.uint8)
        img.ravel()[:40] = 200
        t = otsu_threshold(img)
        assert t == otsu_oracle(img)
        assert 50 <= t <= 199

    def test_constant_degenerates(self):
        with pytest.raises(DegenerateHistogram):
            otsu_threshold(np.full((4, 4), 128, dtype=np.uint8))

    def test_two_extremes_tie_breaks_low(self):
        img = np.zeros((2, 4), dtype=np.uint8)
        img[:, 2:] = 255
        assert otsu_threshold(img) == 0

    def test_random_images_match_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            img = rng.integers(0, 256, (8, 8), dtype=np.uint8)
            if len(np.unique(img)) < 2:
                continue
            assert otsu_threshold(img) == otsu_oracle(img)


class TestBinarize:
    def test_all_zero_empty(self):
        assert not binarize(np.zeros((3, 3), np.uint8), 0).any()

    def test_all_255_full(self):
        assert binarize(np.full((3, 3), 255, np.uint8), 0).all()

    def test_value_at_threshold_is_background(self):
        assert not binarize(np.full((2, 2), 77, np.uint8), 77).any()


class TestMorphology:
    def test_close_fills_interior_hole(self):
        m = np.zeros((7, 7), dtype=bool)
        m[1:6, 1:6] = True
        m[3, 3] = False
        closed = morph_close(m, 1)
        assert closed[3, 3]
        assert (closed >= m).all()

    def test_empty_stays_empty(self):
        m = np.zeros((6, 6), dtype=bool)
        assert not morph_close(m, 2).any()
        assert not morph_open(m, 2).any()

    def test_idempotent_and_monotone_on_random_masks(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            m = rng.random((32, 32)) < 0.45
            closed = morph_close(m, 2)
            opened = morph_open(m, 2)
            assert np.array_equal(morph_close(closed, 2), closed)
            assert np.array_equal(morph_open(opened, 2), opened)
            assert (closed >= m).all(), "closing must be extensive"
            assert (opened <= m).all(), "opening must be anti-extensive"

    def test_border_mask_survives_closing(self):
        m = np.ones((8, 8), dtype=bool)
        assert morph_close(m, 3).all()

    def test_disc_footprint_membership(self):
        fp = disc_footprint(2)
        assert fp.shape == (5, 5)
        assert fp[2, 2] and fp[0, 2] and fp[2, 0]
        assert not fp[0, 0]  # 2^2 + 2^2 > 2^2


class TestConnectedComponents:
    def test_two_disjoint_squares(self):
        m = np.zeros((10, 10), dtype=bool)
        m[1:4, 1:4] = True
        m[6:9, 6:9] = True
        labels = connected_components(m)
        assert labels.max() == 2

    def test_diagonal_touch_depends_on_connectivity(self):
        m = np.zeros((4, 4), dtype=bool)
        m[1, 1] = m[2, 2] = True
        assert connected_components(m, connectivity=8).max() == 1
        assert connected_components(m, connectivity=4).max() == 2

    @pytest.mark.parametrize("connectivity", [4, 8])
    def test_matches_flood_fill_oracle(self, connectivity):
        rng = np.random.default_rng(23)
        for _ in range(10):
            m = rng.random((32, 32)) < 0.4
            assert np.array_equal(
                connected_components(m, connectivity), flood_fill_labels(m, connectivity)
            )

    def test_labels_contiguous_and_cover_foreground(self):
        rng = np.random.default_rng(5)
        m = rng.random((20, 20)) < 0.5
        labels = connected_components(m)
        present = np.unique(labels)
        assert list(present) == list(range(labels.max() + 1))
        assert np.array_equal(labels > 0, m)


class TestMaskIou:
    def test_identical_nonempty(self):
        m = np.zeros((4, 4), dtype=bool)
        m[1:3, 1:3] = True
        assert mask_iou(m, m) == 1.0

    def test_disjoint(self):
        a = np.zeros((4, 4), dtype=bool)
        b = np.zeros((4, 4), dtype=bool)
        a[0, 0] = True
        b[3, 3] = True
        assert mask_iou(a, b) == 0.0

    def test_partial_overlap(self):
        a = np.zeros((4, 4), dtype=bool)
        b = np.zeros((4, 4), dtype=bool)
        a[0:2, 0:2] = True
        b[0:2, 1:3] = True
        assert mask_iou(a, b) == pytest.approx(2 / 6)

    def test_both_empty(self):
        e = np.zeros((3, 3), dtype=bool)
        assert mask_iou(e, e) == 0.0

    def test_symmetric(self):
        rng = np.random.default_rng(2)
        a = rng.random((8, 8)) < 0.5
        b = rng.random((8, 8)) < 0.5
        assert mask_iou(a, b) == mask_iou(b, a)
        assert 0.0 <= mask_iou(a, b) <= 1.0


class TestRle:
    def test_all_background(self):
        m = np.zeros((2, 2), dtype=bool)
        assert rle_encode(m) == [4]

    def test_first_pixel_foreground_starts_with_zero_run(self):
        m = np.zeros((2, 2), dtype=bool)
        m[0, 0] = True
        assert rle_encode(m) == [0, 1, 3]

    def test_round_trip_random(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            m = rng.random((16, 16)) < rng.random()
            assert np.array_equal(rle_decode(rle_encode(m), 16, 16), m)

    def test_malformed_counts(self):
        with pytest.raises(MalformedRle):
            rle_decode([3], 2, 2)
        with pytest.raises(MalformedRle):
            rle_decode([-1, 5], 2, 2)


class TestGeometry:
    def test_mask_bbox_tight(self):
        m = np.zeros((6, 8), dtype=bool)
        m[2:4, 3:7] = True
        assert mask_bbox(m) == (3, 2, 4, 2)

    def test_mask_bbox_empty_raises(self):
        with pytest.raises(EmptyMask):
            mask_bbox(np.zeros((3, 3), dtype=bool))

    def test_circular_region_rasterizes_at_pixel_centers(self):
        region = CircularRegion(center_x=2, center_y=2, radius=1.5)
        m = region.to_mask(5, 5)
        assert m[2, 2] and m[2, 1] and m[1, 2]
        assert not m[0, 0]

    def test_resize_bilinear_identity(self):
        rng = np.random.default_rng(4)
        img = rng.random((7, 5))
        assert np.allclose(resize_bilinear(img, (7, 5)), img)

    def test_resize_bilinear_constant(self):
        img = np.full((8, 8), 3.5)
        assert np.allclose(resize_bilinear(img, (3, 5)), 3.5)
