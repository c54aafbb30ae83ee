import numpy as np
import pytest

from driveraug import imaging
from driveraug.imaging import (
    JitterParams,
    adjust_brightness,
    center_crop,
    color_jitter,
    denormalize,
    gaussian_blur,
    gaussian_kernel_1d,
    grayscale,
    hsv_to_rgb,
    normalize,
    resize_bilinear,
    rgb_to_hsv,
    rgb_to_norm_rgb,
    rgb_to_ycbcr,
    rotate,
)


def random_image(rng, h=16, w=16):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


# ---------------------------------------------------------------------------
# Color conversions
# ---------------------------------------------------------------------------

class TestRgbToHsv:
    def test_pure_red(self):
        assert rgb_to_hsv((255, 0, 0)) == (0.0, 1.0, 1.0)

    def test_gray_has_zero_saturation(self):
        h, s, v = rgb_to_hsv((128, 128, 128))
        assert h == 0.0
        assert s == 0.0
        assert v == pytest.approx(128 / 255, abs=1e-9)

    def test_reference_conversion(self):
        # Frozen from a scalar hexcone computation done by hand:
        # max=g, h = 60*((b-r)/delta + 2), s = delta/max, v = max.
        h, s, v = rgb_to_hsv((10, 200, 57))
        assert h == pytest.approx(134.8421052631579, abs=1e-9)
        assert s == pytest.approx(0.95, abs=1e-9)
        assert v == pytest.approx(200 / 255, abs=1e-9)

    def test_round_trip_grid(self):
        # 16^3 grid of RGB values survives hsv->rgb within +/-1 per channel.
        levels = list(range(0, 256, 17))
        for r in levels:
            for g in levels:
                for b in levels:
                    back = hsv_to_rgb(*rgb_to_hsv((r, g, b)))
                    assert max(abs(back[0] - r), abs(back[1] - g),
                               abs(back[2] - b)) <= 1

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(7)
        img = random_image(rng, 8, 8)
        hsv = imaging.rgb_to_hsv_image(img)
        for y in range(8):
            for x in range(8):
                ref = rgb_to_hsv(tuple(img[y, x]))
                assert np.allclose(hsv[y, x], ref, atol=1e-12)


class TestRgbToYcbcr:
    def test_white(self):
        assert rgb_to_ycbcr((255, 255, 255)) == (255, 128, 128)

    def test_black(self):
        assert rgb_to_ycbcr((0, 0, 0)) == (0, 128, 128)

    def test_reference_conversion(self):
        # Frozen from evaluating the full-range BT.601 matrix by hand.
        assert rgb_to_ycbcr((200, 30, 99)) == (89, 134, 207)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(11)
        img = random_image(rng, 6, 5)
        ycc = imaging.rgb_to_ycbcr_image(img)
        for y in range(6):
            for x in range(5):
                assert tuple(ycc[y, x]) == rgb_to_ycbcr(tuple(img[y, x]))


class TestRgbToNormRgb:
    def test_equal_channels(self):
        assert rgb_to_norm_rgb((100, 100, 100)) == pytest.approx((1/3, 1/3, 1/3))

    def test_pure_red(self):
        assert rgb_to_norm_rgb((255, 0, 0)) == (1.0, 0.0, 0.0)

    def test_black_convention(self):
        assert rgb_to_norm_rgb((0, 0, 0)) == pytest.approx((1/3, 1/3, 1/3))

    def test_components_sum_to_one(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = tuple(int(v) for v in rng.integers(0, 256, 3))
            assert sum(rgb_to_norm_rgb(p)) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Gaussian blur
# ---------------------------------------------------------------------------

def dense_blur_oracle(img, sigma):
    """Direct (non-separable) 2-D convolution with the same reflect padding."""
    k1 = gaussian_kernel_1d(sigma)
    k2 = np.outer(k1, k1)
    r = (len(k1) - 1) // 2
    a = img.astype(np.float64)
    padded = np.pad(a, ((r, r), (r, r), (0, 0)), mode="reflect")
    h, w = img.shape[:2]
    out = np.zeros_like(a)
    for y in range(h):
        for x in range(w):
            patch = padded[y:y + 2 * r + 1, x:x + 2 * r + 1]
            out[y, x] = np.tensordot(k2, patch, axes=([0, 1], [0, 1]))
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


class TestGaussianBlur:
    def test_constant_image_unchanged(self):
        img = np.full((12, 9, 3), 77, dtype=np.uint8)
        for sigma in (0.5, 1.0, 3.0):
            assert np.array_equal(gaussian_blur(img, sigma), img)

    def test_energy_conservation_center_impulse(self):
        img = np.zeros((33, 33, 3), dtype=np.uint8)
        img[16, 16] = (255, 255, 255)
        # Unit-sum kernel away from borders: total intensity within 0.1%.
        out_f = imaging.gaussian_blur_float(img.astype(np.float64), 1.0)
        assert abs(out_f[..., 0].sum() - 255.0) <= 0.001 * 255
        # The quantized path only adds per-pixel rounding on top.
        out_q = gaussian_blur(img, 1.0).astype(np.float64)
        assert abs(out_q[..., 0].sum() - 255.0) <= 0.001 * 255 + len(
            gaussian_kernel_1d(1.0))

    def test_matches_dense_convolution_oracle(self):
        rng = np.random.default_rng(42)
        img = random_image(rng, 8, 8)
        got = gaussian_blur(img, 1.5).astype(np.int64)
        want = dense_blur_oracle(img, 1.5).astype(np.int64)
        assert np.abs(got - want).max() <= 1

    def test_output_within_input_range(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            img = random_image(rng, 10, 14)
            sigma = float(rng.uniform(0.3, 4.0))
            out = gaussian_blur(img, sigma)
            assert out.min() >= img.min()
            assert out.max() <= img.max()

    def test_rejects_nonpositive_sigma(self):
        img = np.zeros((4, 4, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            gaussian_blur(img, 0.0)
        with pytest.raises(ValueError):
            gaussian_blur(img, -1.0)

    def test_kernel_radius_and_sum(self):
        for sigma in (0.4, 1.0, 2.7):
            k = gaussian_kernel_1d(sigma)
            assert len(k) == 2 * int(np.ceil(3 * sigma)) + 1
            assert k.sum() == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Geometric transforms
# ---------------------------------------------------------------------------

class TestRotate:
    def test_zero_angle_identity(self):
        rng = np.random.default_rng(1)
        img = random_image(rng, 15, 20)
        assert np.array_equal(rotate(img, 0), img)

    def test_rotate_and_back(self):
        # Square image with a black frame (rotated content stays in frame);
        # composing +90 / -90 must reproduce the center region within
        # interpolation error.
        rng = np.random.default_rng(2)
        img = random_image(rng, 48, 48)
        img[:3, :] = 0
        img[-3:, :] = 0
        img[:, :3] = 0
        img[:, -3:] = 0
        back = rotate(rotate(img, 90), -90).astype(np.int64)
        center = (slice(2, -2), slice(2, -2))
        assert np.abs(back[center] - img[center].astype(np.int64)).max() <= 2

    def test_45_degrees_fills_corners(self):
        img = np.full((40, 40, 3), 255, dtype=np.uint8)
        out = rotate(img, 45, fill=(0, 0, 0))
        for corner in ((0, 0), (0, -1), (-1, 0), (-1, -1)):
            assert tuple(out[corner]) == (0, 0, 0)

    def test_rejects_out_of_range_angle(self):
        img = np.zeros((4, 4, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            rotate(img, 181)


class TestResizeCropNormalize:
    def test_resize_same_dims_identity(self):
        rng = np.random.default_rng(8)
        img = random_image(rng, 13, 17)
        assert np.array_equal(resize_bilinear(img, 17, 13), img)

    def test_center_crop_offsets(self):
        img = np.zeros((256, 256, 3), dtype=np.uint8)
        img[16, 16] = (1, 2, 3)
        out = center_crop(img, 224, 224)
        assert out.shape == (224, 224, 3)
        assert tuple(out[0, 0]) == (1, 2, 3)  # (16,16) maps to the origin

    def test_crop_larger_than_source_rejected(self):
        img = np.zeros((10, 10, 3), dtype=np.uint8)
        with pytest.raises(ValueError):
            center_crop(img, 11, 10)

    def test_normalize_mean_pixel_is_zero(self):
        # Channel R: pixel 124 ~ 0.485*255, so the standardized value ~ 0.
        img = np.full((2, 2, 3), 124, dtype=np.uint8)
        t = normalize(img)
        assert abs(float(t[0, 0, 0])) < 0.01

    def test_normalize_invertible(self):
        rng = np.random.default_rng(12)
        img = random_image(rng, 9, 9)
        assert np.array_equal(denormalize(normalize(img)), img)

    def test_normalize_finite(self):
        rng = np.random.default_rng(13)
        t = normalize(random_image(rng))
        assert np.isfinite(t).all()

    def test_standard_preprocess_shape(self):
        rng = np.random.default_rng(14)
        img = random_image(rng, 480, 640)
        t = imaging.standard_preprocess(img)
        assert t.shape == (224, 224, 3)
        assert t.dtype == np.float32


# ---------------------------------------------------------------------------
# Color jitter
# ---------------------------------------------------------------------------

class TestColorJitter:
    def test_identity_params_exact(self):
        rng = np.random.default_rng(21)
        img = random_image(rng)
        out = color_jitter(img, JitterParams.identity(), np.random.default_rng(0))
        assert np.array_equal(out, img)

    def test_brightness_scales_constant_image(self):
        img = np.full((4, 4, 3), 100, dtype=np.uint8)
        assert np.array_equal(adjust_brightness(img, 2.0),
                              np.full((4, 4, 3), 200, dtype=np.uint8))

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(22)
        img = random_image(rng, 12, 12)
        params = JitterParams()
        a = color_jitter(img, params, np.random.default_rng(99))
        b = color_jitter(img, params, np.random.default_rng(99))
        assert np.array_equal(a, b)

    def test_invalid_ranges_rejected(self):
        with pytest.raises(ValueError):
            JitterParams(brightness=(1.2, 0.8))
        with pytest.raises(ValueError):
            JitterParams(contrast=(0.0, 1.0))

    def test_hue_shift_preserves_gray(self):
        img = np.full((3, 3, 3), 90, dtype=np.uint8)
        out = imaging.adjust_hue(img, 40.0)
        assert np.array_equal(out, img)


class TestGrayscale:
    def test_luma_weights(self):
        img = np.zeros((1, 3, 3), dtype=np.uint8)
        img[0, 0] = (255, 0, 0)
        img[0, 1] = (0, 255, 0)
        img[0, 2] = (0, 0, 255)
        g = grayscale(img)
        assert g[0, 0] == pytest.approx(0.299 * 255)
        assert g[0, 1] == pytest.approx(0.587 * 255)
        assert g[0, 2] == pytest.approx(0.114 * 255)
