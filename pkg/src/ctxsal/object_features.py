"""Pooled per-proposal descriptors and whitening of the pooled features.

Whitening is per-dimension standardization (subtract mean, divide by the
population standard deviation, floored to avoid blowups on constant
dimensions). Statistics are fitted on training rows only and travel with
the trained model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_types import BinaryMask, FeatureField
from .errors import DimensionMismatch, EmptyMask, InsufficientData

STD_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class WhiteningStats:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean and std must be 1-D vectors of equal length")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def pool_object_feature(m: BinaryMask, f: FeatureField) -> np.ndarray:
    """Per-channel mean of the field over the mask's set pixels."""
    if m.width != f.width or m.height != f.height:
        raise DimensionMismatch("mask and feature field dimensions differ")
    ys, xs = np.nonzero(m.bits)
    if ys.size == 0:
        raise EmptyMask("cannot pool features over an empty mask")
    vals = f.data[:, ys, xs].astype(np.float64)
    return vals.sum(axis=1) / ys.size


def fit_whitening(rows) -> WhiteningStats:
    """Per-dimension mean and population standard deviation of the rows."""
    mat = np.asarray(rows, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < 2:
        raise InsufficientData("whitening needs at least 2 rows")
    mean = mat.mean(axis=0)
    std = mat.std(axis=0)  # population convention, divisor N
    std = np.maximum(std, STD_FLOOR)
    return WhiteningStats(mean=mean, std=std)


def apply_whitening(stats: WhiteningStats, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != stats.dim:
        raise DimensionMismatch(
            f"vector dimension {v.shape[-1]} does not match whitening dimension {stats.dim}"
        )
    return (v - stats.mean) / stats.std
