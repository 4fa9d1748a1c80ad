"""Synthetic dataset generator: vivid shapes on muted textured grounds.

Each image holds 1-3 colored rectangles/ellipses over a noisy low-contrast
background; the ground truth is the union of the shapes. Image i of a run
is a pure function of (seed, i), so regenerating a dataset reproduces
identical bytes.
"""

from __future__ import annotations

import os

import numpy as np

from .core_types import (
    BinaryMask,
    DatasetManifest,
    ImageBuffer,
    ManifestEntry,
    save_image,
    save_manifest,
    save_mask,
)

DEFAULT_SIZE = (96, 96)  # (width, height)
_MARGIN = 3


def _shape_color(rng: np.random.Generator, background: np.ndarray) -> np.ndarray:
    while True:
        highs = rng.random(3) < 0.5
        if not highs.any():
            continue
        color = np.where(highs, rng.uniform(0.75, 1.0, 3), rng.uniform(0.0, 0.2, 3))
        if np.linalg.norm(color - background) >= 0.45:
            return color


def synth_image(seed: int, index: int, width: int, height: int):
    """One (image, ground truth) pair."""
    rng = np.random.default_rng([seed, index])
    background = rng.uniform(0.3, 0.6, 3)
    img = np.tile(background, (height, width, 1))
    img += rng.uniform(-0.04, 0.04, (height, width, 3))

    gt = np.zeros((height, width), dtype=bool)
    yy, xx = np.mgrid[0:height, 0:width]
    n_shapes = int(rng.integers(1, 4))
    for _ in range(n_shapes):
        color = _shape_color(rng, background)
        sw = int(rng.uniform(0.18, 0.45) * width)
        sh = int(rng.uniform(0.18, 0.45) * height)
        sw = max(sw, 6)
        sh = max(sh, 6)
        cx = int(rng.integers(_MARGIN + sw // 2, width - _MARGIN - sw // 2))
        cy = int(rng.integers(_MARGIN + sh // 2, height - _MARGIN - sh // 2))
        if rng.random() < 0.5:
            shape = (np.abs(xx - cx) <= sw // 2) & (np.abs(yy - cy) <= sh // 2)
        else:
            rx = max(sw / 2.0, 1.0)
            ry = max(sh / 2.0, 1.0)
            shape = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
        img[shape] = color + rng.uniform(-0.02, 0.02, (int(shape.sum()), 3))
        gt |= shape

    img = np.clip(img, 0.0, 1.0)
    return ImageBuffer(img), BinaryMask(gt)


def generate_dataset(
    out_dir: str,
    n_images: int,
    seed: int,
    width: int = DEFAULT_SIZE[0],
    height: int = DEFAULT_SIZE[1],
) -> DatasetManifest:
    """Write images/, gt/ and manifest.json under out_dir."""
    img_dir = os.path.join(out_dir, "images")
    gt_dir = os.path.join(out_dir, "gt")
    os.makedirs(img_dir, exist_ok=True)
    os.makedirs(gt_dir, exist_ok=True)

    entries = []
    for i in range(n_images):
        image_id = f"img_{i:04d}"
        img, gt = synth_image(seed, i, width, height)
        image_path = os.path.join(img_dir, f"{image_id}.png")
        gt_path = os.path.join(gt_dir, f"{image_id}.png")
        save_image(img, image_path)
        save_mask(gt, gt_path)
        entries.append(ManifestEntry(image_id=image_id, image_path=image_path, gt_path=gt_path))

    manifest = DatasetManifest(entries)
    save_manifest(manifest, os.path.join(out_dir, "manifest.json"))
    return manifest
