"""Regression targets for the two forests.

The object target is the salient fraction of the proposal; the context
target additionally penalizes salient pixels leaking into the context ring
and is clamped at zero.
"""

from __future__ import annotations

import numpy as np

from .core_types import BinaryMask
from .errors import DimensionMismatch, EmptyContext, EmptyMask


def _check_dims(a: BinaryMask, b: BinaryMask) -> None:
    if a.width != b.width or a.height != b.height:
        raise DimensionMismatch("mask dimensions differ")


def sal_object(m: BinaryMask, s: BinaryMask) -> float:
    """|M intersect S| / |M|: fraction of the proposal that is salient."""
    _check_dims(m, s)
    area = m.area()
    if area == 0:
        raise EmptyMask("object mask is empty")
    hit = int(np.count_nonzero(m.bits & s.bits))
    return hit / area


def sal_context(m: BinaryMask, c: BinaryMask, s: BinaryMask) -> float:
    """Object fraction minus context fraction of salient pixels, floored at 0."""
    _check_dims(m, s)
    _check_dims(c, s)
    m_area = m.area()
    if m_area == 0:
        raise EmptyMask("object mask is empty")
    c_area = c.area()
    if c_area == 0:
        raise EmptyContext("context mask is empty")
    m_ratio = int(np.count_nonzero(m.bits & s.bits)) / m_area
    c_ratio = int(np.count_nonzero(c.bits & s.bits)) / c_area
    return max(m_ratio - c_ratio, 0.0)
