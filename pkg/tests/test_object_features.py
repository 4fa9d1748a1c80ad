import numpy as np
import pytest

from ctxsal.core_types import BinaryMask, FeatureField
from ctxsal.errors import DimensionMismatch, EmptyMask, InsufficientData
from ctxsal.object_features import (
    STD_FLOOR,
    apply_whitening,
    fit_whitening,
    pool_object_feature,
)


def test_pool_constant_field():
    bits = np.zeros((8, 8), bool)
    bits[1:4, 2:6] = True
    f = FeatureField(np.full((4, 8, 8), 0.6, np.float32))
    out = pool_object_feature(BinaryMask(bits), f)
    assert out.shape == (4,)
    assert np.allclose(out, 0.6, atol=1e-7)


def test_pool_two_pixels():
    bits = np.zeros((4, 4), bool)
    bits[0, 0] = bits[3, 3] = True
    data = np.zeros((1, 4, 4), np.float32)
    data[0, 3, 3] = 1.0
    out = pool_object_feature(BinaryMask(bits), FeatureField(data))
    assert abs(out[0] - 0.5) < 1e-12


def test_pool_matches_naive_loop(rng):
    bits = rng.random((16, 16)) < 0.5
    bits[5, 5] = True
    data = rng.random((3, 16, 16)).astype(np.float32)
    out = pool_object_feature(BinaryMask(bits), FeatureField(data))
    acc = np.zeros(3)
    count = 0
    for y in range(16):
        for x in range(16):
            if bits[y, x]:
                acc += data[:, y, x].astype(np.float64)
                count += 1
    assert np.abs(out - acc / count).max() < 1e-9


def test_pool_order_invariance(rng):
    bits = rng.random((12, 12)) < 0.4
    bits[0, 0] = True
    data = rng.random((2, 12, 12)).astype(np.float32)
    out = pool_object_feature(BinaryMask(bits), FeatureField(data))
    # transpose everything: same pixel set, enumerated column-major
    out_t = pool_object_feature(
        BinaryMask(bits.T.copy()), FeatureField(data.transpose(0, 2, 1).copy())
    )
    assert np.abs(out - out_t).max() < 1e-9


def test_pool_empty_mask_raises():
    with pytest.raises(EmptyMask):
        pool_object_feature(
            BinaryMask(np.zeros((4, 4), bool)), FeatureField(np.zeros((1, 4, 4), np.float32))
        )


def test_pool_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        pool_object_feature(
            BinaryMask(np.ones((4, 4), bool)), FeatureField(np.zeros((1, 5, 5), np.float32))
        )


def test_whitening_two_points():
    stats = fit_whitening([[0.0], [2.0]])
    assert stats.mean[0] == 1.0
    assert stats.std[0] == 1.0


def test_whitening_identical_rows_floored():
    stats = fit_whitening([[3.0, -1.0]] * 5)
    assert np.all(stats.std == STD_FLOOR)


def test_whitening_insufficient():
    with pytest.raises(InsufficientData):
        fit_whitening([[1.0, 2.0]])


def test_whitened_rows_standardized(rng):
    rows = rng.normal(3.0, 2.5, size=(100, 6))
    stats = fit_whitening(rows)
    out = apply_whitening(stats, rows)
    assert np.abs(out.mean(axis=0)).max() < 1e-9
    assert np.abs(out.var(axis=0) - 1.0).max() < 1e-9


def test_apply_whitening_examples(rng):
    rows = rng.random((10, 3))
    stats = fit_whitening(rows)
    assert np.abs(apply_whitening(stats, stats.mean)).max() == 0.0
    assert np.abs(apply_whitening(stats, stats.mean + stats.std) - 1.0).max() < 1e-12
    v = rng.random(3)
    expect = np.array([(v[i] - stats.mean[i]) / stats.std[i] for i in range(3)])
    assert np.array_equal(apply_whitening(stats, v), expect)


def test_whitening_roundtrip(rng):
    rows = rng.random((50, 4)) * 10
    stats = fit_whitening(rows)
    v = rng.random(4) * 10
    back = apply_whitening(stats, v) * stats.std + stats.mean
    assert np.abs(back - v).max() < 1e-9


def test_apply_whitening_dim_mismatch(rng):
    stats = fit_whitening(rng.random((5, 3)))
    with pytest.raises(DimensionMismatch):
        apply_whitening(stats, np.zeros(4))
