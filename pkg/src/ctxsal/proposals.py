"""Object-proposal ingestion and a built-in stand-in generator.

External proposal masks (one ``<k>.png`` per proposal) replay the output of
whatever proposal method produced them. The built-in generator is a
minimum-spanning-forest graph segmentation (threshold k/|component|) run at
several scales, plus pairwise merges of adjacent segments; it exists so the
pipeline runs self-contained, not to reproduce any published method.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .context_features import smooth_field
from .core_types import BinaryMask, ImageBuffer, load_mask, rgb_feature_field
from .errors import DimensionMismatch, MissingDirectory

DEFAULT_MIN_AREA = 4500
DEFAULT_MAX_PROPOSALS = 256
DEFAULT_K_SCALES = (0.6, 1.2, 2.4)
PRESEG_SIGMA = 0.8

_MASK_NAME = re.compile(r"^(\d+)\.png$")


@dataclass
class ProposalSet:
    image_id: str
    masks: list
    source: str  # "external" | "builtin"

    def __len__(self) -> int:
        return len(self.masks)


def _filter_and_truncate(masks, min_area: int, max_count: int):
    kept = [m for m in masks if m.area() >= min_area]
    return kept[:max_count]


def load_proposals(
    directory: str,
    min_area: int = DEFAULT_MIN_AREA,
    max_count: int = DEFAULT_MAX_PROPOSALS,
    expected_size: tuple | None = None,
    image_id: str | None = None,
) -> ProposalSet:
    """Load ``<k>.png`` masks in ascending k, filter by area, truncate.

    Filtering precedes truncation, so the first ``max_count`` sufficiently
    large proposals survive in their original ranking.
    """
    if not os.path.isdir(directory):
        raise MissingDirectory(f"proposal directory not found: {directory}")
    keyed = []
    for name in os.listdir(directory):
        match = _MASK_NAME.match(name)
        if match:
            keyed.append((int(match.group(1)), name))
    keyed.sort()
    masks = []
    for _, name in keyed:
        mask = load_mask(os.path.join(directory, name))
        if expected_size is not None and (mask.width, mask.height) != tuple(expected_size):
            raise DimensionMismatch(
                f"proposal {name} in {directory} is {mask.width}x{mask.height}, "
                f"expected {expected_size[0]}x{expected_size[1]}"
            )
        masks.append(mask)
    if image_id is None:
        image_id = os.path.basename(os.path.normpath(directory))
    return ProposalSet(
        image_id=image_id,
        masks=_filter_and_truncate(masks, min_area, max_count),
        source="external",
    )


def _segment_labels(field: np.ndarray, k: float) -> np.ndarray:
    """Graph segmentation of a (D, H, W) field; returns (H, W) int labels."""
    _, height, width = field.shape
    n = height * width
    idx = np.arange(n, dtype=np.int64).reshape(height, width)

    diff_r = field[:, :, 1:] - field[:, :, :-1]
    w_right = np.sqrt((diff_r * diff_r).sum(axis=0)).ravel()
    a_right = idx[:, :-1].ravel()
    b_right = idx[:, 1:].ravel()

    diff_d = field[:, 1:, :] - field[:, :-1, :]
    w_down = np.sqrt((diff_d * diff_d).sum(axis=0)).ravel()
    a_down = idx[:-1, :].ravel()
    b_down = idx[1:, :].ravel()

    edge_a = np.concatenate([a_right, a_down])
    edge_b = np.concatenate([b_right, b_down])
    weights = np.concatenate([w_right, w_down]).astype(np.float64)
    order = np.argsort(weights, kind="stable").astype(np.int64)

    roots = _kernels.felzenszwalb_labels(n, edge_a, edge_b, weights, order, float(k))
    _, labels = np.unique(roots, return_inverse=True)
    return labels.reshape(height, width)


def generate_builtin(
    img: ImageBuffer,
    k_scales=DEFAULT_K_SCALES,
    min_area: int = DEFAULT_MIN_AREA,
    max_count: int = DEFAULT_MAX_PROPOSALS,
    seed: int = 0,
    image_id: str = "",
) -> ProposalSet:
    """Segments at each scale become proposals; adjacent segments are then
    merged pairwise until max_count candidates exist. Deterministic for a
    fixed input (the seed parameter is accepted for interface stability).
    """
    del seed  # segmentation and merge enumeration are already deterministic
    field = smooth_field(rgb_feature_field(img), PRESEG_SIGMA).data.astype(np.float64)

    masks = []
    seen = set()

    def add(bits: np.ndarray) -> None:
        key = np.packbits(bits).tobytes()
        if key not in seen:
            seen.add(key)
            masks.append(BinaryMask(bits))

    per_scale_labels = []
    for k in k_scales:
        labels = _segment_labels(field, float(k))
        per_scale_labels.append(labels)
        for lbl in range(labels.max() + 1):
            add(labels == lbl)

    if len(masks) < max_count:
        for labels in per_scale_labels:
            pairs = set()
            horiz = labels[:, :-1] != labels[:, 1:]
            for a, b in zip(labels[:, :-1][horiz].ravel(), labels[:, 1:][horiz].ravel()):
                pairs.add((min(int(a), int(b)), max(int(a), int(b))))
            vert = labels[:-1, :] != labels[1:, :]
            for a, b in zip(labels[:-1, :][vert].ravel(), labels[1:, :][vert].ravel()):
                pairs.add((min(int(a), int(b)), max(int(a), int(b))))
            for a, b in sorted(pairs):
                if len(masks) >= max_count:
                    break
                add((labels == a) | (labels == b))
            if len(masks) >= max_count:
                break

    return ProposalSet(
        image_id=image_id,
        masks=_filter_and_truncate(masks, min_area, max_count),
        source="builtin",
    )
