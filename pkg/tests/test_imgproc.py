import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ocuscreen import phantom
from ocuscreen.colorspace import Bgr8Image, bgr_to_hsv8, bgr_to_lab8
from ocuscreen.errors import ConstantImage, NoCircleFound
from ocuscreen.imgproc import (
    K3,
    K5,
    BinaryMask,
    close,
    dilate,
    erode,
    hough_iris,
    lesion_mask,
    otsu_threshold,
    scleral_mask_luminance,
    scleral_mask_three_gate,
)


class TestOtsu:
    def test_bimodal_split(self):
        values = np.array([50] * 100 + [200] * 100, dtype=np.uint8)
        t = otsu_threshold(values.reshape(10, 20))
        assert 50 < t <= 200
        assert t == oracles.otsu_brute_force(values)

    def test_constant_image_rejected(self):
        with pytest.raises(ConstantImage):
            otsu_threshold(np.full((8, 8), 7, dtype=np.uint8))

    def test_extreme_two_level_tie_break(self):
        values = np.array([0] * 50 + [255] * 50, dtype=np.uint8)
        t = otsu_threshold(values.reshape(10, 10))
        assert 0 < t <= 255
        assert t == oracles.otsu_brute_force(values)

    def test_matches_brute_force_on_random_histograms(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = int(rng.integers(20, 400))
            values = rng.integers(0, 256, size=n).astype(np.uint8)
            if values.min() == values.max():
                values[0] = (values[0] + 1) % 256
            assert otsu_threshold(values.reshape(1, -1)) == oracles.otsu_brute_force(
                values
            )

    @given(st.lists(st.integers(0, 255), min_size=2, max_size=60))
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force_property(self, values):
        if min(values) == max(values):
            values = values + [(values[0] + 1) % 256]
        arr = np.array(values, dtype=np.uint8).reshape(1, -1)
        assert otsu_threshold(arr) == oracles.otsu_brute_force(values)


def _rand_mask(rng, h=64, w=64, p=0.5):
    return BinaryMask(rng.random((h, w)) < p)


class TestMorphology:
    def test_empty_mask_fixed_point(self):
        empty = BinaryMask(np.zeros((9, 9), dtype=bool))
        for op in (dilate, erode, close):
            for k in (K3, K5):
                assert op(empty, k).pixel_count == 0

    def test_single_pixel_dilates_to_block(self):
        m = np.zeros((9, 9), dtype=bool)
        m[4, 4] = True
        out = dilate(BinaryMask(m), K3)
        expected = np.zeros((9, 9), dtype=bool)
        expected[3:6, 3:6] = True
        assert np.array_equal(out.data, expected)

    def test_block_survives_close_with_large_element(self):
        m = np.zeros((16, 16), dtype=bool)
        m[6:9, 6:9] = True
        out = close(BinaryMask(m), K5)
        assert np.array_equal(out.data, m)

    def test_matches_set_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            raw = rng.random((12, 14)) < 0.5
            rows = raw.tolist()
            for k, size in ((K3, 3), (K5, 5)):
                assert np.array_equal(
                    dilate(BinaryMask(raw), k).data,
                    np.array(oracles.dilate_set(rows, size)),
                )
                assert np.array_equal(
                    erode(BinaryMask(raw), k).data,
                    np.array(oracles.erode_set(rows, size)),
                )
                assert np.array_equal(
                    close(BinaryMask(raw), k).data,
                    np.array(oracles.close_set(rows, size)),
                )

    def test_duality_on_interior(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            m = _rand_mask(rng)
            for k, rad in ((K3, 1), (K5, 2)):
                lhs = erode(m, k).data[rad:-rad, rad:-rad]
                rhs = ~dilate(BinaryMask(~m.data), k).data[rad:-rad, rad:-rad]
                assert np.array_equal(lhs, rhs)

    def test_close_idempotent(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            m = _rand_mask(rng, p=float(rng.uniform(0.2, 0.8)))
            for k in (K3, K5):
                once = close(m, k)
                assert np.array_equal(once.data, close(once, k).data)

    def test_hole_filled_by_close(self):
        m = np.zeros((30, 30), dtype=bool)
        m[5:25, 5:25] = True
        m[14, 14] = False
        out = close(BinaryMask(m), K3)
        assert bool(out.data[14, 14])


def _flat_image(bgr):
    return Bgr8Image(np.tile(np.array(bgr, dtype=np.uint8), (8, 8, 1)))


class TestMasks:
    def test_luminance_mask_gates(self):
        bright = _flat_image((200, 200, 220))
        lab = bgr_to_lab8(bright)
        assert scleral_mask_luminance(lab).pixel_count == 64

    def test_luminance_mask_a_gate_excludes(self):
        red = _flat_image((40, 40, 250))
        lab = bgr_to_lab8(red)
        assert int(lab.a_plane[0, 0]) >= 160
        assert scleral_mask_luminance(lab).pixel_count == 0

    def test_luminance_mask_dark_floor(self):
        dark = _flat_image((60, 60, 60))
        lab = bgr_to_lab8(dark)
        assert scleral_mask_luminance(lab).pixel_count == 0

    def test_luminance_constant_plane_falls_back_to_floor(self):
        img = _flat_image((255, 255, 255))
        lab = bgr_to_lab8(img)
        assert int(lab.l_plane.min()) == int(lab.l_plane.max())
        assert scleral_mask_luminance(lab).pixel_count == 64

    def test_three_gate_accepts_bright_unsaturated(self):
        # The closing's border-0 erosion trims one frame ring; the interior
        # of a uniformly passing image stays fully set.
        img = _flat_image((230, 235, 235))
        mask = scleral_mask_three_gate(bgr_to_lab8(img), bgr_to_hsv8(img))
        assert np.all(mask.data[1:-1, 1:-1])
        assert mask.pixel_count == 36

    def test_three_gate_rejects_saturated(self):
        img = _flat_image((80, 200, 240))
        hsv = bgr_to_hsv8(img)
        assert int(hsv.s_plane[0, 0]) > 60
        mask = scleral_mask_three_gate(bgr_to_lab8(img), hsv)
        assert mask.pixel_count == 0

    def test_lesion_mask_yellow_branch(self):
        # dilate/erode cancel on a uniform field; the K5 closing's erosion
        # trims two frame rings.
        img = _flat_image((180, 235, 240))
        lab, hsv = bgr_to_lab8(img), bgr_to_hsv8(img)
        assert int(lab.b_plane[0, 0]) >= 140
        mask = lesion_mask(lab, hsv)
        assert np.all(mask.data[2:-2, 2:-2])
        assert mask.pixel_count == 16

    def test_lesion_mask_brightness_gate(self):
        img = _flat_image((90, 110, 120))
        lab, hsv = bgr_to_lab8(img), bgr_to_hsv8(img)
        assert int(lab.l_plane[0, 0]) < 180
        assert lesion_mask(lab, hsv).pixel_count == 0

    def test_luminance_mask_equals_its_gate_formula(self):
        rng = np.random.default_rng(37)
        img = Bgr8Image(rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8))
        lab = bgr_to_lab8(img)
        mask = scleral_mask_luminance(lab)
        tau = max(160, otsu_threshold(lab.l_plane))
        sel = (lab.l_plane.astype(int) >= tau) & (lab.a_plane.astype(int) < 160)
        assert np.array_equal(mask.data, sel)

    def test_fixed_threshold_masks_monotone_in_luminance(self):
        # Raising L pixelwise can only grow the gate set, and the
        # morphology chain preserves set inclusion.
        rng = np.random.default_rng(43)
        lab_raw = rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8)
        hsv_raw = rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8)
        hsv_raw[:, :, 0] = rng.integers(0, 180, size=(24, 24))
        lab = bgr_to_lab8(Bgr8Image(lab_raw)).__class__(lab_raw)
        hsv = bgr_to_hsv8(Bgr8Image(lab_raw)).__class__(hsv_raw)
        raised_raw = lab_raw.copy()
        raised_raw[:, :, 0] = np.clip(raised_raw[:, :, 0].astype(int) + 30, 0, 255)
        raised = lab.__class__(raised_raw)
        for builder in (scleral_mask_three_gate, lesion_mask):
            before = builder(lab, hsv).data
            after = builder(raised, hsv).data
            assert not np.any(before & ~after)


class TestHough:
    def test_single_disk_recovered(self):
        img = phantom.synth_disks(400, 300, [(200.0, 150.0, 80.0)])
        c = hough_iris(img)
        assert abs(c.center[0] - 200) <= 2 and abs(c.center[1] - 150) <= 2
        assert abs(c.radius - 80 * 1.05) <= 3.0
        assert c.accumulator_score >= 0.25

    def test_blank_image_has_no_circle(self):
        blank = Bgr8Image(np.full((300, 400, 3), 255, dtype=np.uint8))
        with pytest.raises(NoCircleFound):
            hough_iris(blank)

    def test_radius_range_selects_large_disk(self):
        img = phantom.synth_disks(
            400, 300, [(100.0, 150.0, 40.0), (280.0, 150.0, 80.0)]
        )
        c = hough_iris(img, (70.0, 90.0))
        assert abs(c.center[0] - 280) <= 2 and abs(c.center[1] - 150) <= 2
        assert abs(c.radius - 84.0) <= 3.0

    def test_random_placements(self):
        rng = np.random.default_rng(41)
        for _ in range(6):
            r = float(rng.uniform(40, 90))
            cx = float(rng.uniform(r + 10, 400 - r - 10))
            cy = float(rng.uniform(r + 10, 300 - r - 10))
            img = phantom.synth_disks(400, 300, [(cx, cy, r)])
            c = hough_iris(img, (max(10.0, r - 20), min(145.0, r + 20)))
            assert np.hypot(c.center[0] - cx, c.center[1] - cy) <= 2.0
            assert abs(c.radius - 1.05 * r) <= 0.04 * (1.05 * r)

    def test_invalid_range_rejected(self):
        img = phantom.synth_disks(200, 200, [(100.0, 100.0, 40.0)])
        with pytest.raises(ValueError):
            hough_iris(img, (50.0, 50.0))
        with pytest.raises(ValueError):
            hough_iris(img, (10.0, 150.0))
