"""Ray-cast context features.

For every pixel of an object proposal, rays are marched along a set of
orientations until they hit the context ring on both sides. Each valid
(pixel, orientation) pair yields a contrast-over-continuity sample and a
pure continuity sample; their averages form the 3-vector (C1, C2, C3):

* C1 - contrast against the context, damped by context continuity, over
  all orientations.
* C2 - context continuity alone, over all orientations.
* C3 - same construction as C1 restricted to horizontal rays, aimed at
  horizontal scene clutter.

Endpoint features are sampled from a Gaussian-smoothed field; the feature
at the object pixel itself comes from the unsmoothed field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core_types import BinaryMask, FeatureField
from .errors import DegenerateContext, DimensionMismatch

DEFAULT_LAMBDA = 40.0
DEFAULT_SIGMA = 3.0
DEFAULT_ORIENTATIONS = (0.0, math.pi / 4.0, math.pi / 2.0, 3.0 * math.pi / 4.0)

_HALF_SQRT2 = math.sqrt(0.5)
# exact direction table for multiples of pi/4 so quarter-turn rotations and
# flips of the raster map marches onto each other bit-for-bit
_AXIS_DIRECTIONS = {
    0: (1.0, 0.0),
    1: (_HALF_SQRT2, _HALF_SQRT2),
    2: (0.0, 1.0),
    3: (-_HALF_SQRT2, _HALF_SQRT2),
    4: (-1.0, 0.0),
}


@dataclass(frozen=True)
class OrientationSet:
    """Orientations in [0, pi) along which context rays are cast."""

    angles: tuple = field(default_factory=lambda: DEFAULT_ORIENTATIONS)

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if not self.angles:
            raise ValueError("orientation set must not be empty")
        for a in self.angles:
            if not (0.0 <= a < math.pi):
                raise ValueError(f"orientation {a} outside [0, pi)")


@dataclass(frozen=True)
class RayEndpoints:
    u: tuple | None
    d: tuple | None
    valid: bool


@dataclass(frozen=True)
class ContextFeatureVector:
    c1: float
    c2: float
    c3: float
    valid_pair_counts: tuple  # (pairs behind c1, c2, c3)


@dataclass(frozen=True)
class RaySamples:
    """Per-(pixel, orientation) samples, for diagnostics and tests."""

    dir_idx: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    directions: np.ndarray
    in_phi: np.ndarray
    horizontal: np.ndarray


def unit_direction(phi: float) -> tuple:
    """Unit vector (dx, dy) for an orientation, with multiples of pi/4
    snapped to exact table values."""
    k = phi / (math.pi / 4.0)
    r = round(k)
    if abs(k - r) < 1e-9 and 0 <= r <= 4:
        return _AXIS_DIRECTIONS[r]
    return (math.cos(phi), math.sin(phi))


def smooth_field(f: FeatureField, sigma: float) -> FeatureField:
    """Separable Gaussian smoothing, kernel radius ceil(3*sigma), kernel
    renormalized to sum 1, borders mirrored (edge pixel included).

    The per-row pass accumulates symmetric neighbor pairs as k*(left+right)
    so mirrored inputs produce bit-mirrored outputs.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return f
    radius = int(math.ceil(3.0 * sigma))
    offs = np.arange(1, radius + 1, dtype=np.float64)
    side = np.exp(-(offs**2) / (2.0 * sigma * sigma))
    norm = 1.0 + 2.0 * side.sum()
    center = 1.0 / norm
    side = side / norm

    data = f.data.astype(np.float64)
    for axis in (2, 1):  # x pass, then y pass
        padw = [(0, 0), (0, 0), (0, 0)]
        padw[axis] = (radius, radius)
        padded = np.pad(data, padw, mode="symmetric")
        out = center * data
        length = data.shape[axis]
        for i in range(1, radius + 1):
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[axis] = slice(radius - i, radius - i + length)
            hi[axis] = slice(radius + i, radius + i + length)
            out += side[i - 1] * (padded[tuple(lo)] + padded[tuple(hi)])
        data = out
    return FeatureField(data.astype(np.float32))


def _round_away(v: float) -> int:
    if v >= 0.0:
        return int(math.floor(v + 0.5))
    return -int(math.floor(0.5 - v))


def _march_scalar(px, py, dx, dy, ctx_bits, width, height, max_steps):
    prev_x, prev_y = px, py
    for t in range(1, max_steps + 1):
        ix = _round_away(px + t * dx)
        iy = _round_away(py + t * dy)
        if ix == prev_x and iy == prev_y:
            continue
        prev_x, prev_y = ix, iy
        if ix < 0 or ix >= width or iy < 0 or iy >= height:
            return None
        if ctx_bits[iy, ix]:
            return (ix, iy)
    return None


def ray_endpoints(m: BinaryMask, c: BinaryMask, p: tuple, phi: float) -> RayEndpoints:
    """First context pixels hit when marching from p both ways along phi.

    Marches in unit steps, rounding every sample to the nearest pixel
    (half away from zero) and skipping consecutive duplicates. A ray that
    leaves the image before touching context invalidates the pair.
    """
    dx, dy = unit_direction(phi)
    width, height = m.width, m.height
    max_steps = int(math.ceil(math.hypot(width, height))) + 2
    px, py = int(p[0]), int(p[1])
    u = _march_scalar(px, py, dx, dy, c.bits, width, height, max_steps)
    d = _march_scalar(px, py, -dx, -dy, c.bits, width, height, max_steps)
    if u is None or d is None:
        return RayEndpoints(u=u, d=d, valid=False)
    return RayEndpoints(u=u, d=d, valid=True)


def _l2(a: np.ndarray, b: np.ndarray) -> float:
    acc = 0.0
    for ch in range(a.shape[0]):
        diff = float(a[ch]) - float(b[ch])
        acc += diff * diff
    return math.sqrt(acc)


def contrast_from_distances(s_u: float, s_d: float, s_du: float, lam: float) -> float:
    """arctan(min(s_d, s_u) / (s_du + lambda)): contrast over continuity."""
    return math.atan(min(s_d, s_u) / (s_du + lam))


def continuity_from_distance(s_du: float, lam: float) -> float:
    """arctan(1 / (s_du + lambda)): continuity alone."""
    return math.atan(1.0 / (s_du + lam))


def point_contrast_c1(f_at_m, f_at_u, f_at_d, lam: float) -> float:
    f_at_m = np.asarray(f_at_m, dtype=np.float64)
    f_at_u = np.asarray(f_at_u, dtype=np.float64)
    f_at_d = np.asarray(f_at_d, dtype=np.float64)
    if not (f_at_m.shape == f_at_u.shape == f_at_d.shape):
        raise DimensionMismatch("feature vectors must share dimension")
    s_u = _l2(f_at_u, f_at_m)
    s_d = _l2(f_at_d, f_at_m)
    s_du = _l2(f_at_d, f_at_u)
    return contrast_from_distances(s_u, s_d, s_du, lam)


def point_continuity_c2(f_at_u, f_at_d, lam: float) -> float:
    f_at_u = np.asarray(f_at_u, dtype=np.float64)
    f_at_d = np.asarray(f_at_d, dtype=np.float64)
    if f_at_u.shape != f_at_d.shape:
        raise DimensionMismatch("feature vectors must share dimension")
    return continuity_from_distance(_l2(f_at_d, f_at_u), lam)


def _direction_table(phis: OrientationSet):
    """Directions for the orientation set, plus a horizontal direction when
    the set itself has none (C3 always uses horizontal rays)."""
    dirs = []
    in_phi = []
    horizontal = []
    for a in phis.angles:
        dx, dy = unit_direction(a)
        dirs.append((dx, dy))
        in_phi.append(True)
        horizontal.append((dx, dy) == (1.0, 0.0))
    if not any(horizontal):
        dirs.append((1.0, 0.0))
        in_phi.append(False)
        horizontal.append(True)
    return (
        np.array(dirs, dtype=np.float64),
        np.array(in_phi, dtype=bool),
        np.array(horizontal, dtype=bool),
    )


def context_feature_samples(
    m: BinaryMask,
    c: BinaryMask,
    f: FeatureField,
    phis: OrientationSet | None = None,
    lam: float = DEFAULT_LAMBDA,
    sigma: float = DEFAULT_SIGMA,
    presmoothed: FeatureField | None = None,
) -> RaySamples:
    """Raw per-pair samples behind :func:`context_features`.

    ``presmoothed`` lets callers smooth the field once per image and share
    it across proposals; it must equal ``smooth_field(f, sigma)``.
    """
    if phis is None:
        phis = OrientationSet()
    if not (m.width == c.width == f.width and m.height == c.height == f.height):
        raise DimensionMismatch("mask, context and feature field dimensions differ")
    if c.area() == 0:
        raise DegenerateContext("context mask is empty")
    smooth = presmoothed if presmoothed is not None else smooth_field(f, sigma)
    dirs, in_phi, horizontal = _direction_table(phis)
    dir_idx, c1, c2 = _kernels.ray_feature_samples(
        m.as_u8(), c.as_u8(), f.data, smooth.data, dirs, float(lam)
    )
    return RaySamples(
        dir_idx=dir_idx, c1=c1, c2=c2, directions=dirs, in_phi=in_phi, horizontal=horizontal
    )


def context_features(
    m: BinaryMask,
    c: BinaryMask,
    f: FeatureField,
    phis: OrientationSet | None = None,
    lam: float = DEFAULT_LAMBDA,
    sigma: float = DEFAULT_SIGMA,
    normalize_by_valid_pairs: bool = True,
    presmoothed: FeatureField | None = None,
) -> ContextFeatureVector:
    """The (C1, C2, C3) context feature vector for one proposal.

    Averages use the number of valid (pixel, orientation) pairs by default;
    with ``normalize_by_valid_pairs=False`` the sums are divided by |M| as
    in the plain per-pixel formulation (excluded rays then deflate the
    features of border-touching objects). Sums are exact (fsum), so the
    result does not depend on accumulation order. Features with zero valid
    pairs are 0.
    """
    samples = context_feature_samples(
        m, c, f, phis=phis, lam=lam, sigma=sigma, presmoothed=presmoothed
    )
    area = m.area()

    sel = samples.in_phi[samples.dir_idx] if samples.dir_idx.size else np.zeros(0, bool)
    selh = samples.horizontal[samples.dir_idx] if samples.dir_idx.size else np.zeros(0, bool)
    n_omni = int(np.count_nonzero(sel))
    n_horiz = int(np.count_nonzero(selh))

    def _mean(values: np.ndarray, count: int) -> float:
        if count == 0:
            return 0.0
        denom = count if normalize_by_valid_pairs else area
        return math.fsum(values) / denom

    c1 = _mean(samples.c1[sel], n_omni)
    c2 = _mean(samples.c2[sel], n_omni)
    c3 = _mean(samples.c1[selh], n_horiz)
    return ContextFeatureVector(
        c1=c1, c2=c2, c3=c3, valid_pair_counts=(n_omni, n_omni, n_horiz)
    )
