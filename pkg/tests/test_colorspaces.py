import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stainkit.colorspaces import (
    lalphabeta_to_rgb,
    od_to_rgb,
    rgb_to_lalphabeta,
    rgb_to_log_chroma,
    rgb_to_od,
)
from stainkit.errors import ParameterError

EPS = 1 / 255

images = arrays(
    np.uint8,
    st.tuples(st.integers(1, 8), st.integers(1, 8), st.just(3)),
    elements=st.integers(0, 255),
)


def all_colors_by_red():
    g, b = np.meshgrid(np.arange(256), np.arange(256), indexing="ij")
    for r in range(256):
        yield np.stack([np.full_like(g, r), g, b], axis=-1).astype(np.uint8)


def halving_shift_bound(min_level=0):
    """Brute force: worst change of one log-chroma plane when an even-valued
    pixel is halved, over every pair of channel values >= min_level."""
    levels = np.arange(min_level + (min_level % 2), 256, 2) / 255.0
    a, b = np.meshgrid(levels, levels)
    before = np.log((a + EPS) / (b + EPS))
    after = np.log((a / 2 + EPS) / (b / 2 + EPS))
    return np.abs(before - after).max()


def test_gray_is_zero():
    planes = rgb_to_log_chroma(np.full((4, 5, 3), 128, dtype=np.uint8))
    assert planes.shape == (4, 5, 6)
    assert np.all(planes == 0)


def test_hand_evaluated_pixel():
    # intensities are normalized to [0, 1] before adding epsilon
    r, g, b = 200 / 255, 100 / 255, 50 / 255
    planes = rgb_to_log_chroma(np.array([[[200, 100, 50]]], dtype=np.uint8), EPS)[0, 0]
    assert planes[0] == pytest.approx(math.log((r + EPS) / (g + EPS)), abs=1e-12)
    assert planes[1] == pytest.approx(math.log((r + EPS) / (b + EPS)), abs=1e-12)
    assert planes[0] == pytest.approx(0.688184, abs=1e-6)
    assert planes[1] == pytest.approx(1.371479, abs=1e-6)


@pytest.mark.parametrize("eps", [0.0, -1e-3])
def test_non_positive_epsilon(eps):
    with pytest.raises(ParameterError):
        rgb_to_log_chroma(np.zeros((1, 1, 3)), eps)


@given(images)
def test_reciprocal_planes_are_exact_negatives(img):
    p = rgb_to_log_chroma(img)
    assert np.all(np.isfinite(p))
    np.testing.assert_array_equal(p[..., 0], -p[..., 2])  # uR = -uG
    np.testing.assert_array_equal(p[..., 1], -p[..., 4])  # vR = -uB
    np.testing.assert_array_equal(p[..., 3], -p[..., 5])  # vG = -vB


def test_halving_bound_oracle_values():
    # frozen from the brute-force oracle
    assert halving_shift_bound() == pytest.approx(0.689233, abs=1e-6)
    assert halving_shift_bound(100) < 0.006


@settings(max_examples=50)
@given(images)
def test_halving_shift_within_brute_force_bound(img):
    even = (img // 2) * 2
    shift = np.abs(rgb_to_log_chroma(even) - rgb_to_log_chroma(even // 2))
    assert shift.max() <= halving_shift_bound() + 1e-12


def test_bright_pixels_nearly_illumination_invariant(rng):
    img = rng.integers(50, 128, size=(16, 16, 3)) * 2
    shift = np.abs(rgb_to_log_chroma(img) - rgb_to_log_chroma(img // 2))
    assert shift.max() <= halving_shift_bound(100) + 1e-12
    assert shift.max() < 0.02


def test_lalphabeta_gray_is_achromatic():
    for v in (0, 1, 100, 255):
        lab = rgb_to_lalphabeta(np.full((1, 1, 3), v))
        assert abs(lab[0, 0, 1]) < 1e-6 and abs(lab[0, 0, 2]) < 1e-6


def test_lalphabeta_black_round_trip():
    black = np.zeros((2, 2, 3), dtype=np.uint8)
    lab = rgb_to_lalphabeta(black)
    assert np.all(np.isfinite(lab))
    np.testing.assert_array_equal(lalphabeta_to_rgb(lab), black)


def test_lalphabeta_round_trip_random(rng):
    img = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
    back = lalphabeta_to_rgb(rgb_to_lalphabeta(img))
    assert np.abs(back.astype(int) - img).max() <= 1


def test_lalphabeta_round_trip_exhaustive():
    for plane in all_colors_by_red():
        back = lalphabeta_to_rgb(rgb_to_lalphabeta(plane))
        assert np.abs(back.astype(int) - plane).max() <= 1


def test_od_hand_values():
    od = rgb_to_od(np.array([[[255, 25.5, 255]]]))
    assert od[0, 0, 0] == 0.0
    assert od[0, 0, 1] == pytest.approx(1.0, abs=1e-12)


def test_od_black_is_finite():
    od = rgb_to_od(np.zeros((1, 1, 3), dtype=np.uint8))
    assert np.all(np.isfinite(od)) and np.all(od > 0)


def test_od_round_trip_exhaustive():
    for plane in all_colors_by_red():
        od = rgb_to_od(plane)
        assert od.min() >= 0
        assert np.abs(od_to_rgb(od).astype(int) - plane).max() <= 1


def test_od_rejects_bad_i0():
    with pytest.raises(ParameterError):
        rgb_to_od(np.zeros((1, 1, 3)), i0=0)


def test_row_partitioning_is_bit_identical(rng):
    img = rng.integers(0, 256, size=(10, 7, 3), dtype=np.uint8)
    for fn in (rgb_to_log_chroma, rgb_to_lalphabeta, rgb_to_od):
        whole = fn(img)
        parts = np.concatenate([fn(img[:4]), fn(img[4:])], axis=0)
        np.testing.assert_array_equal(whole, parts)


def test_rejects_non_rgb():
    with pytest.raises(ParameterError):
        rgb_to_od(np.zeros((3, 3)))
