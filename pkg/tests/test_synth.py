import numpy as np
import pytest

from stainkit.colorspaces import od_to_rgb
from stainkit.errors import ParameterError
from stainkit.histogram import compute_histogram, hellinger_distance, kl_divergence
from stainkit.synth import DEFAULT_STAINS, SeriesSpec, SynthSpec, darken, darken_series, synthesize_stain_image
from stainkit.transfer import macenko_estimate_stains
from stainkit.transfer._stains import column_angles


def test_zero_concentration_is_white():
    img = synthesize_stain_image(SynthSpec(concentration_range=(0.0, 0.0)))[0]
    assert np.all(img == 255)


def test_beer_lambert_composition(sparse_sample):
    img, stains, conc, labels = sparse_sample
    expected = od_to_rgb(np.einsum("ck,khw->hwc", stains, conc))
    assert np.array_equal(img, expected)
    assert np.array_equal(stains, DEFAULT_STAINS)
    assert conc.shape == (2, 128, 128) and not labels.any()


@pytest.mark.parametrize("law", ["sparse-random", "blob-cells"])
def test_deterministic(law):
    a = synthesize_stain_image(SynthSpec(concentration_law=law, seed=5))
    b = synthesize_stain_image(SynthSpec(concentration_law=law, seed=5))
    c = synthesize_stain_image(SynthSpec(concentration_law=law, seed=6))
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[3], b[3])
    assert not np.array_equal(a[0], c[0])


def test_blob_cells_labels(blob_sample):
    img, _, conc, labels = blob_sample
    assert labels.max() == 12
    assert set(np.unique(labels)) == set(range(13))
    # cells carry the first stain well above the non-specific floor
    assert conc[0][labels > 0].min() > conc[0][labels == 0].max()


def test_stains_recoverable(sparse_sample):
    img, stains, _, _ = sparse_sample
    assert max(column_angles(macenko_estimate_stains(img), stains)) < 2.0


def test_darken_identity(blob_sample):
    img = blob_sample[0]
    assert np.array_equal(darken(img, 1.0), img)


def test_darken_monotone(blob_sample):
    img = blob_sample[0].astype(int)
    prev = img
    for k in (1.2, 1.5, 2.0, 3.0):
        cur = darken(blob_sample[0], k).astype(int)
        assert np.all(cur <= prev)
        prev = cur


def test_series_distance_increases(blob_sample):
    series = darken_series(SeriesSpec(blob_sample[0], [1.0, 1.2, 1.5, 2.0, 3.0]))
    h0 = compute_histogram(series[0])
    hs = [hellinger_distance(h0, compute_histogram(s)) for s in series[1:]]
    ks = [kl_divergence(h0, compute_histogram(s)) for s in series[1:]]
    assert all(a < b for a, b in zip(hs, hs[1:]))
    assert all(a < b for a, b in zip(ks, ks[1:]))


def test_validation():
    with pytest.raises(ParameterError):
        SynthSpec(stain_matrix=np.ones((2, 2)))
    with pytest.raises(ParameterError):
        SynthSpec(concentration_law="stripes")
    with pytest.raises(ParameterError):
        SynthSpec(width=0)
    base = np.zeros((2, 2, 3), dtype=np.uint8)
    for factors in ([], [0.5], [1.0, 1.0], [2.0, 1.5]):
        with pytest.raises(ParameterError):
            SeriesSpec(base, factors)


def test_spec_dict_round_trip():
    spec = SynthSpec(width=40, height=30, concentration_law="blob-cells", seed=3, n_cells=4)
    back = SynthSpec.from_dict(spec.to_dict())
    assert np.array_equal(synthesize_stain_image(back)[0], synthesize_stain_image(spec)[0])
    with pytest.raises(ParameterError):
        SynthSpec.from_dict({"colour": 1})
