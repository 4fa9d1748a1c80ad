"""Shared fixtures and independent oracle implementations.

Oracles here deliberately avoid the package's own kernels: dilation goes
through scipy, context features through the public scalar ops in a plain
triple loop, convolution through an explicit dense 2-D sum.
"""

import math

import numpy as np
import pytest
from scipy import ndimage

from ctxsal.context_features import (
    point_continuity_c2,
    point_contrast_c1,
    ray_endpoints,
)
from ctxsal.core_types import BinaryMask

N8 = np.ones((3, 3), dtype=bool)


def oracle_dilate(bits: np.ndarray) -> np.ndarray:
    return ndimage.binary_dilation(bits, structure=N8)


def oracle_context(bits: np.ndarray):
    """Brute-force dilate-and-check: dilate step by step, stop when the ring
    reaches the object's area or growth saturates."""
    area = int(bits.sum())
    assert area > 0
    grown = bits.copy()
    n = 0
    while True:
        nxt = oracle_dilate(grown)
        n += 1
        ring = nxt & ~bits
        if int(ring.sum()) >= area:
            return ring, n, True
        if int(nxt.sum()) == int(grown.sum()):
            return ring, n, bool(ring.any())
        grown = nxt


def naive_context_features(mask, ctx, field, phis, lam, sigma, smooth_field_fn,
                           normalize_by_valid_pairs=True):
    """Triple loop over (pixel, orientation) built from the public scalar ops."""
    smoothed = smooth_field_fn(field, sigma)
    raw = field.data
    smo = smoothed.data
    c1_vals, c2_vals, c3_vals = [], [], []
    ys, xs = np.nonzero(mask.bits)
    for py, px in zip(ys, xs):
        for phi in phis.angles:
            ep = ray_endpoints(mask, ctx, (px, py), phi)
            if not ep.valid:
                continue
            f_m = raw[:, py, px]
            f_u = smo[:, ep.u[1], ep.u[0]]
            f_d = smo[:, ep.d[1], ep.d[0]]
            c1 = point_contrast_c1(f_m, f_u, f_d, lam)
            c2 = point_continuity_c2(f_u, f_d, lam)
            c1_vals.append(c1)
            c2_vals.append(c2)
            if phi == 0.0:
                c3_vals.append(c1)
    if 0.0 not in phis.angles:
        for py, px in zip(ys, xs):
            ep = ray_endpoints(mask, ctx, (px, py), 0.0)
            if not ep.valid:
                continue
            f_m = raw[:, py, px]
            f_u = smo[:, ep.u[1], ep.u[0]]
            f_d = smo[:, ep.d[1], ep.d[0]]
            c3_vals.append(point_contrast_c1(f_m, f_u, f_d, lam))
    area = mask.area()

    def mean(vals):
        if not vals:
            return 0.0
        denom = len(vals) if normalize_by_valid_pairs else area
        return math.fsum(vals) / denom

    return mean(c1_vals), mean(c2_vals), mean(c3_vals), (len(c1_vals), len(c1_vals), len(c3_vals))


def dense_gaussian_oracle(data: np.ndarray, sigma: float) -> np.ndarray:
    """Direct (non-separable) 2-D convolution with the truncated, renormalized
    Gaussian kernel and mirrored borders."""
    radius = int(math.ceil(3.0 * sigma))
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    k1 = np.exp(-(ax**2) / (2.0 * sigma * sigma))
    k2 = np.outer(k1, k1)
    k2 = k2 / k2.sum()
    channels, height, width = data.shape
    padded = np.pad(
        data.astype(np.float64), ((0, 0), (radius, radius), (radius, radius)), mode="symmetric"
    )
    out = np.zeros((channels, height, width), dtype=np.float64)
    for ch in range(channels):
        for y in range(height):
            for x in range(width):
                patch = padded[ch, y : y + 2 * radius + 1, x : x + 2 * radius + 1]
                out[ch, y, x] = float((patch * k2).sum())
    return out


def random_blob_mask(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    """A random mask biased toward blobby shapes: thresholded smoothed noise,
    with a plain Bernoulli fallback so degenerate sizes still work."""
    noise = rng.random((height, width))
    sm = ndimage.uniform_filter(noise, size=5)
    mask = sm > np.quantile(sm, 0.8)
    if not mask.any():
        mask = rng.random((height, width)) < 0.3
    return mask


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def valid_context_instance(rng, height, width, channels=3):
    """(mask, context, field) with a usable context ring, or None."""
    from ctxsal.morphology import generate_context

    bits = random_blob_mask(rng, height, width)
    if not bits.any() or bits.all():
        return None
    mask = BinaryMask(bits)
    ctx = generate_context(mask)
    if not ctx.valid or ctx.context.area() == 0:
        return None
    field = rng.random((channels, height, width)).astype(np.float32)
    return mask, ctx.context, field
