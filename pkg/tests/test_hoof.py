import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mer.core_data import make_grid
from mer.descriptors.base import l1_normalize
from mer.descriptors.hoof import FlowField, HoofConfig, extract_hoof, hoof_histogram, optical_flow, orientation_bins
from mer.errors import ExtractionError, ValidationError

ZERO_BIN = 4  # bin containing theta = 0 with 8 folded bins over [-pi/2, pi/2]


def texture(size=40, period=8.0, amp=60.0):
    yy, xx = np.mgrid[0:size, 0:size]
    k = 2 * np.pi / period
    return 128 + amp * 0.5 * (np.sin(k * xx) + np.sin(k * yy + 1.0))


def test_identical_frames_zero_flow():
    a = np.random.default_rng(0).integers(0, 256, (20, 20))
    f = optical_flow(a, a)
    assert np.all(f.u == 0) and np.all(f.v == 0)


def test_shift_right_gives_positive_u():
    # high-contrast, short-period texture: Horn-Schunck with alpha=1 on [0, 1]
    # intensities underestimates displacement on low-contrast inputs
    a = 128 + 60 * np.sin(2 * np.pi * np.arange(40) / 8.0)[None, :].repeat(40, axis=0)
    b = np.roll(a, 1, axis=1)
    f = optical_flow(a, b)
    assert 0.5 <= f.u.mean() <= 1.5
    assert abs(f.v.mean()) <= 0.2


def test_moving_dot_localises_flow():
    a = np.zeros((30, 30))
    b = np.zeros((30, 30))
    a[12:15, 17:20] = 255
    b[12:15, 18:21] = 255
    mag = optical_flow(a, b).magnitude
    yy, xx = np.mgrid[0:30, 0:30]
    cy, cx = (mag * yy).sum() / mag.sum(), (mag * xx).sum() / mag.sum()
    assert abs(cy - 13) < 2 and abs(cx - 19) < 2
    py, px = np.unravel_index(mag.argmax(), mag.shape)
    assert abs(py - 13) <= 2 and abs(px - 19) <= 2
    assert mag[0, 0] < 0.05 * mag.max()


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        optical_flow(np.zeros((10, 10)), np.zeros((10, 11)))


def test_histogram_examples():
    ones = np.ones((5, 5))
    h = hoof_histogram(FlowField(ones, 0 * ones))
    assert h[ZERO_BIN] == 25 and h.sum() == 25
    assert np.array_equal(hoof_histogram(FlowField(-ones, 0 * ones)), h)
    assert not hoof_histogram(FlowField(0 * ones, 0 * ones)).any()


def test_unfolded_bins_cover_full_circle():
    cfg = HoofConfig(fold_symmetry=False)
    theta = np.linspace(-np.pi, np.pi, 17)[:-1] + 0.01
    idx = orientation_bins(np.cos(theta), np.sin(theta), cfg)
    assert idx.tolist() == [k // 2 for k in range(16)]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fold_symmetry(seed):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, 12, 12))
    np.testing.assert_allclose(hoof_histogram(FlowField(-u, v)), hoof_histogram(FlowField(u, v)), rtol=0, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
def test_magnitude_scale_invariance(seed, k):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, 12, 12))
    a = l1_normalize(hoof_histogram(FlowField(u, v)))
    b = l1_normalize(hoof_histogram(FlowField(k * u, k * v)))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)


def test_static_clip_all_zero():
    vol = np.repeat(np.random.default_rng(0).integers(0, 256, (1, 20, 20)), 4, axis=0)
    fv = extract_hoof(vol)
    assert len(fv) == 200 and not fv.values.any()


def test_rightward_translation_argmax():
    stripes = texture(60)[:1].repeat(40, axis=0)  # varies along x only
    vol = np.stack([stripes[:, 10 - t:50 - t] for t in range(6)])
    fv = extract_hoof(vol)
    blocks = fv.values.reshape(25, 8)
    moving = blocks.sum(axis=1) > 0
    assert moving.any()
    assert np.all(blocks[moving].argmax(axis=1) == ZERO_BIN)


def test_bins_change_length():
    vol = np.random.default_rng(0).integers(0, 256, (3, 20, 20))
    assert len(extract_hoof(vol, make_grid(20, 20), HoofConfig(bins=12))) == 300


def test_needs_two_frames():
    with pytest.raises(ExtractionError):
        extract_hoof(np.zeros((1, 20, 20)))
