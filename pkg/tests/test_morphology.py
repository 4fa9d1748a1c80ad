import numpy as np
import pytest

from conftest import oracle_context, oracle_dilate, random_blob_mask

from ctxsal.core_types import BinaryMask
from ctxsal.errors import EmptyMask
from ctxsal.morphology import dilate_n8, generate_context


def test_dilate_single_pixel():
    bits = np.zeros((32, 32), bool)
    bits[10, 10] = True
    out = dilate_n8(BinaryMask(bits))
    expect = np.zeros((32, 32), bool)
    expect[9:12, 9:12] = True
    assert np.array_equal(out.bits, expect)


def test_dilate_corner_clips():
    bits = np.zeros((8, 8), bool)
    bits[0, 0] = True
    out = dilate_n8(BinaryMask(bits))
    expect = np.zeros((8, 8), bool)
    expect[0:2, 0:2] = True
    assert np.array_equal(out.bits, expect)


def test_dilate_matches_union_of_blocks(rng):
    bits = rng.random((64, 64)) < 0.2
    out = dilate_n8(BinaryMask(bits))
    expect = np.zeros((64, 64), bool)
    for y, x in zip(*np.nonzero(bits)):
        expect[max(0, y - 1) : y + 2, max(0, x - 1) : x + 2] = True
    assert np.array_equal(out.bits, expect)


def test_context_isolated_pixel():
    bits = np.zeros((32, 32), bool)
    bits[15, 16] = True
    res = generate_context(BinaryMask(bits))
    assert res.dilation_count == 1
    assert res.context.area() == 8
    assert res.valid


def test_context_square_in_100():
    bits = np.zeros((100, 100), bool)
    bits[45:55, 45:55] = True
    res = generate_context(BinaryMask(bits))
    assert res.dilation_count == 3
    assert res.context.area() == 156
    assert res.valid


def test_context_full_image_invalid():
    res = generate_context(BinaryMask(np.ones((16, 16), bool)))
    assert not res.valid
    assert res.context.area() == 0


def test_context_empty_mask_raises():
    with pytest.raises(EmptyMask):
        generate_context(BinaryMask(np.zeros((4, 4), bool)))


def test_context_matches_bruteforce_oracle(rng):
    for _ in range(120):
        h = int(rng.integers(4, 64))
        w = int(rng.integers(4, 64))
        bits = random_blob_mask(rng, h, w)
        if not bits.any():
            continue
        res = generate_context(BinaryMask(bits))
        ring, n, valid = oracle_context(bits)
        assert np.array_equal(res.context.bits, ring)
        assert res.dilation_count == n
        assert res.valid == valid


def test_context_saturation_cases(rng):
    # masks covering more than half the image force saturation
    bits = np.ones((10, 10), bool)
    bits[0, 0] = False
    res = generate_context(BinaryMask(bits))
    ring, n, valid = oracle_context(bits)
    assert np.array_equal(res.context.bits, ring)
    assert res.dilation_count == n
    assert res.valid == valid
    assert res.context.area() == 1


def test_minimality(rng):
    for _ in range(60):
        bits = random_blob_mask(rng, 48, 48)
        if not bits.any():
            continue
        res = generate_context(BinaryMask(bits))
        if not res.valid or res.dilation_count <= 1:
            continue
        grown = bits.copy()
        for _ in range(res.dilation_count - 1):
            grown = oracle_dilate(grown)
        ring = grown & ~bits
        assert int(ring.sum()) < int(bits.sum())


def test_disjointness(rng):
    for _ in range(40):
        bits = random_blob_mask(rng, 32, 32)
        if not bits.any():
            continue
        res = generate_context(BinaryMask(bits))
        assert not (res.context.bits & bits).any()


def test_ring_growth_monotone_for_rectangles(rng):
    # per-step ring area grows with n for interior rectangles
    for _ in range(20):
        h, w = 60, 60
        y0 = int(rng.integers(20, 30))
        x0 = int(rng.integers(20, 30))
        bits = np.zeros((h, w), bool)
        bits[y0 : y0 + 10, x0 : x0 + 12] = True
        grown = bits.copy()
        cum_prev = 0
        layer_prev = None
        for _ in range(5):
            grown = oracle_dilate(grown)
            cum = int((grown & ~bits).sum())
            layer = cum - cum_prev
            if layer_prev is not None:
                assert layer >= layer_prev
            layer_prev = layer
            cum_prev = cum


def test_translation_equivariance(rng):
    bits = np.zeros((40, 40), bool)
    bits[10:16, 12:20] = rng.random((6, 8)) < 0.7
    bits[12, 14] = True
    res_a = generate_context(BinaryMask(bits))
    shifted = np.roll(np.roll(bits, 3, axis=0), -2, axis=1)
    res_b = generate_context(BinaryMask(shifted))
    expect = np.roll(np.roll(res_a.context.bits, 3, axis=0), -2, axis=1)
    assert res_a.dilation_count == res_b.dilation_count
    assert np.array_equal(res_b.context.bits, expect)
