"""N8 binary dilation and context-proposal generation.

The context of an object proposal M is the ring C = (M dilated n times) \\ M
for the smallest n whose ring holds at least as many pixels as M itself.
Dilation is clipped to the image domain, so the context of border-touching
objects stays inside the image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core_types import BinaryMask
from .errors import EmptyMask


@dataclass(frozen=True, eq=False)
class ContextResult:
    context: BinaryMask
    dilation_count: int
    valid: bool


def dilate_n8(m: BinaryMask) -> BinaryMask:
    """One dilation with the 3x3 all-ones structural element."""
    src = m.bits
    out = src.copy()
    out[1:, :] |= src[:-1, :]
    out[:-1, :] |= src[1:, :]
    out[:, 1:] |= src[:, :-1]
    out[:, :-1] |= src[:, 1:]
    out[1:, 1:] |= src[:-1, :-1]
    out[1:, :-1] |= src[:-1, 1:]
    out[:-1, 1:] |= src[1:, :-1]
    out[:-1, :-1] |= src[1:, 1:]
    return BinaryMask(out)


def generate_context(m: BinaryMask) -> ContextResult:
    """Grow the context ring until it holds at least |M| pixels.

    Iterating n8 dilations is equivalent to thresholding the Chebyshev
    distance to the mask, which the kernel computes in one pass. When the
    dilation saturates (the mask plus ring covers the whole image) before
    the ring reaches |M| pixels, the saturated ring is returned and the
    result is valid only if that ring is nonempty.
    """
    area = m.area()
    if area == 0:
        raise EmptyMask("context generation needs a nonempty object mask")

    dist = _kernels.chebyshev_ring_distance(m.as_u8())
    ring = dist > 0
    hist = np.bincount(dist[ring]) if ring.any() else np.zeros(1, dtype=np.int64)
    cum = np.cumsum(hist)

    reach = np.nonzero(cum >= area)[0]
    if reach.size:
        n = int(reach[0])
        context = BinaryMask(ring & (dist <= n))
        return ContextResult(context=context, dilation_count=n, valid=True)

    # saturated: one more dilation step changes nothing
    d_max = int(dist.max())
    n = d_max + 1 if d_max > 0 else 1
    context = BinaryMask(ring)
    return ContextResult(context=context, dilation_count=n, valid=bool(ring.any()))
