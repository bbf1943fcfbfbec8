import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from hfsr import image


def _rgb(*px):
    return np.array([[px]], dtype=np.uint8).reshape(1, len(px), 3)


# --- colour -----------------------------------------------------------------

@pytest.mark.parametrize("px,expected", [
    ((255, 255, 255), (255.0, 128.0, 128.0)),
    ((0, 0, 0), (0.0, 128.0, 128.0)),
])
def test_grey_fixed_points(px, expected):
    y, cb, cr = image.rgb_to_ycbcr(_rgb(px))
    assert np.allclose([y[0, 0], cb[0, 0], cr[0, 0]], expected, atol=1e-9)


def test_pure_red_matches_coefficients():
    y, cb, cr = image.rgb_to_ycbcr(_rgb((255, 0, 0)))
    # plugging R=255 into the full-range matrix by hand
    assert y[0, 0] == pytest.approx(0.299 * 255)
    assert y[0, 0] == pytest.approx(76.245)
    assert cb[0, 0] == pytest.approx(128 - 0.168736 * 255)
    assert cb[0, 0] == pytest.approx(84.97232)
    # real-valued Cr exceeds the 8-bit range; clipped it is 255
    assert cr[0, 0] == pytest.approx(255.5)


def test_against_pillow_jpeg_conversion(rng):
    # Pillow's YCbCr is the same full-range matrix in 8-bit fixed point
    img = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
    ref = np.asarray(Image.fromarray(img).convert("YCbCr"), dtype=np.float64)
    ours = np.stack(image.rgb_to_ycbcr(img), axis=-1)
    assert np.abs(np.clip(ours, 0, 255) - ref).max() <= 1.0


@settings(max_examples=200, deadline=None)
@given(arrays(np.uint8, (4, 5, 3)))
def test_ycbcr_round_trip_within_one(img):
    back = image.ycbcr_to_rgb(*image.rgb_to_ycbcr(img))
    assert np.abs(back.astype(int) - img.astype(int)).max() <= 1


def test_luma_scale():
    assert image.luma(_rgb((255, 255, 255)))[0, 0] == pytest.approx(1.0)


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        image.rgb_to_ycbcr(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        image.as_plane(np.array([[np.nan]]))


# --- patches ----------------------------------------------------------------

@pytest.mark.parametrize("n,origins", [
    (6, [(0, 0)]),
    (8, [(0, 0), (0, 2), (2, 0), (2, 2)]),
    (9, [(r, c) for r in (0, 2, 3) for c in (0, 2, 3)]),
])
def test_patch_origins(n, origins):
    patches = image.extract_patches(np.arange(n * n, dtype=float).reshape(n, n), 6, 4)
    assert [p.origin for p in patches] == origins


def test_patch_flattening_is_row_major():
    plane = np.arange(64, dtype=float).reshape(8, 8)
    p = image.extract_patches(plane, 6, 4)[1]
    i, j = 2, 5
    assert p.pixels[i * 6 + j] == plane[p.origin[0] + i, p.origin[1] + j]
    assert np.array_equal(p.as_2d(), plane[0:6, 2:8])


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 30), st.integers(3, 30), st.integers(1, 8), st.data())
def test_patches_cover_every_pixel(h, w, patch, data):
    patch = min(patch, h, w)
    overlap = data.draw(st.integers(0, patch - 1))
    cover = np.zeros((h, w), bool)
    for p in image.extract_patches(np.zeros((h, w)), patch, overlap):
        r, c = p.origin
        assert r + patch <= h and c + patch <= w
        cover[r:r + patch, c:c + patch] = True
    assert cover.all()


def test_patch_errors():
    with pytest.raises(ValueError):
        image.extract_patches(np.zeros((5, 5)), 6, 4)
    with pytest.raises(ValueError):
        image.extract_patches(np.zeros((8, 8)), 6, 6)


# --- area downsampling --------------------------------------------------------

@pytest.mark.parametrize("shape,out", [((7, 7), (6, 6)), ((12, 9), (6, 5)), ((10, 10), (3, 7))])
def test_downsample_constant(shape, out):
    res = image.downsample(np.full(shape, 0.37), out[1], out[0])
    assert res.shape == out
    assert np.allclose(res, 0.37, atol=1e-14)


def test_downsample_checkerboard_mean():
    assert image.downsample(np.array([[0.0, 1.0], [1.0, 0.0]]), 1, 1)[0, 0] == pytest.approx(0.5)


def test_downsample_three_to_two_overlap_oracle(rng):
    # ratio 1.5: split every input pixel into 2x2 quarters, then each output
    # cell is the plain mean of a 3x3 block of quarters
    plane = rng.random((3, 3))
    quarters = np.repeat(np.repeat(plane, 2, axis=0), 2, axis=1)
    oracle = quarters.reshape(2, 3, 2, 3).mean(axis=(1, 3))
    assert np.allclose(image.downsample(plane, 2, 2), oracle, atol=1e-15)


def test_downsample_matrix_matches_function(rng):
    plane = rng.random((7, 7))
    D = image.downsample_matrix(7, 7, 6, 6)
    assert np.allclose(D @ plane.ravel(), image.downsample(plane, 6, 6).ravel(), atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.floats(-3, 3), st.floats(-3, 3), st.data())
def test_downsample_linear(h, w, a, b, data):
    oh = data.draw(st.integers(1, h))
    ow = data.draw(st.integers(1, w))
    rng = np.random.default_rng(h * 31 + w)
    P, Q = rng.random((h, w)), rng.random((h, w))
    lhs = image.downsample(a * P + b * Q, ow, oh)
    rhs = a * image.downsample(P, ow, oh) + b * image.downsample(Q, ow, oh)
    assert np.abs(lhs - rhs).max() <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 4))
def test_downsample_preserves_mean_on_even_ratios(oh, ow, f):
    plane = np.random.default_rng(oh + 7 * ow).random((oh * f, ow * f))
    assert abs(image.downsample(plane, ow, oh).mean() - plane.mean()) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 4))
def test_nearest_then_downsample_is_identity(h, w, f):
    plane = np.random.default_rng(h * 13 + w).random((h, w))
    back = image.downsample(image.upsample_nearest(plane, f), w, h)
    assert np.allclose(back, plane, atol=1e-14)


def test_downsample_errors():
    with pytest.raises(ValueError):
        image.downsample(np.zeros((4, 4)), 0, 2)
    with pytest.raises(ValueError):
        image.downsample(np.zeros((4, 4)), 5, 2)


# --- bicubic ----------------------------------------------------------------

def _keys(x, a=-0.5):
    x = abs(x)
    if x <= 1:
        return (a + 2) * x ** 3 - (a + 3) * x ** 2 + 1
    if x < 2:
        return a * x ** 3 - 5 * a * x ** 2 + 8 * a * x - 4 * a
    return 0.0


def _bicubic_oracle(plane, factor):
    """Brute-force separable Keys interpolation with clamped edges."""
    h, w = plane.shape
    oh, ow = round(h * factor), round(w * factor)
    out = np.zeros((oh, ow))
    for r in range(oh):
        y = (r + 0.5) / factor - 0.5
        for c in range(ow):
            x = (c + 0.5) / factor - 0.5
            acc = 0.0
            for ty in range(int(np.floor(y)) - 1, int(np.floor(y)) + 3):
                for tx in range(int(np.floor(x)) - 1, int(np.floor(x)) + 3):
                    v = plane[min(max(ty, 0), h - 1), min(max(tx, 0), w - 1)]
                    acc += v * _keys(y - ty) * _keys(x - tx)
            out[r, c] = acc
    return out


def test_bicubic_ramp_matches_oracle():
    ramp = np.add.outer(np.arange(4.0), 2 * np.arange(4.0)) / 10
    assert np.abs(image.upsample_bicubic(ramp, 2) - _bicubic_oracle(ramp, 2)).max() <= 1e-9


def test_bicubic_random_matches_oracle(rng):
    # sizes chosen so factor * size is integral and the ratio is exact
    plane = rng.random((6, 4))
    for f in (2, 3, 1.5):
        assert np.abs(image.upsample_bicubic(plane, f) - _bicubic_oracle(plane, f)).max() <= 1e-9


def test_bicubic_constant_and_identity(rng):
    assert np.allclose(image.upsample_bicubic(np.full((5, 4), 0.3), 2.5), 0.3, atol=1e-14)
    plane = rng.random((6, 6))
    assert np.array_equal(image.upsample_bicubic(plane, 1), plane)
    assert image.upsample_bicubic(plane, 1.5).shape == (9, 9)


def test_bicubic_shrink_is_normalised(rng):
    W = image.bicubic_weights(12, 6)
    assert np.allclose(W.sum(axis=1), 1.0)
    assert np.allclose(image.resize_bicubic(np.full((12, 12), 0.8), 6, 6), 0.8)


def test_bicubic_rejects_shrink_factor():
    with pytest.raises(ValueError):
        image.upsample_bicubic(np.zeros((3, 3)), 0.5)


# --- nearest ----------------------------------------------------------------

def test_nearest_examples():
    out = image.upsample_nearest(np.array([[1.0, 2.0], [3.0, 4.0]]), 2)
    assert np.array_equal(out, [[1, 1, 2, 2], [1, 1, 2, 2], [3, 3, 4, 4], [3, 3, 4, 4]])
    assert np.array_equal(image.upsample_nearest(np.array([[7.0]]), 3), np.full((3, 3), 7.0))
    plane = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(image.upsample_nearest(plane, 1), plane)
    with pytest.raises(ValueError):
        image.upsample_nearest(plane, 1.5)


def test_mod_crop():
    assert image.mod_crop(np.zeros((11, 8, 3)), 3).shape == (9, 6, 3)


# --- I/O ----------------------------------------------------------------------

@pytest.mark.parametrize("suffix", [".png", ".bmp"])
def test_read_write_round_trip(tmp_path, rng, suffix):
    img = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
    path = tmp_path / f"x{suffix}"
    image.write_rgb(path, img)
    assert np.array_equal(image.read_rgb(path), img)


def test_read_grey_png_as_rgb(tmp_path):
    Image.fromarray(np.full((3, 4), 9, np.uint8)).save(tmp_path / "g.png")
    out = image.read_rgb(tmp_path / "g.png")
    assert out.shape == (3, 4, 3) and np.all(out == 9)
