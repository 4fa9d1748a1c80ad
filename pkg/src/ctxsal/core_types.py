"""Shared containers (images, masks, feature fields), manifest handling and
the binary tensor format.

Coordinate convention: origin at the top-left, x grows rightward, y grows
downward, row-major storage. All containers freeze their arrays after
construction and are safe to share across workers.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import CorruptTensor, DimensionMismatch, MissingFile

TENSOR_MAGIC = b"CSFT"
TENSOR_VERSION = 1


def _own(arr: np.ndarray, dtype) -> np.ndarray:
    """Return a C-contiguous read-only array of the requested dtype."""
    out = np.ascontiguousarray(arr, dtype=dtype)
    if np.may_share_memory(out, arr):
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """An RGB image with intensities normalized to [0, 1], shape (H, W, 3)."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _own(self.data, np.float64))
        if self.data.ndim != 3:
            raise ValueError("image data must be (height, width, channels)")
        if self.data.size and (self.data.min() < 0.0 or self.data.max() > 1.0):
            raise ValueError("image intensities must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """A boolean raster, shape (H, W). Used for object proposals, their
    contexts and ground-truth salient regions alike."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", _own(self.bits, np.bool_))
        if self.bits.ndim != 2:
            raise ValueError("mask bits must be (height, width)")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def area(self) -> int:
        return int(np.count_nonzero(self.bits))

    def as_u8(self) -> np.ndarray:
        return self.bits.view(np.uint8)


@dataclass(frozen=True, eq=False)
class FeatureField:
    """Per-pixel features, planar channel-major float32, shape (D, H, W).

    float32 is the storage dtype of the tensor file format, so a field
    round-trips through disk bit-exactly.
    """

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _own(self.data, np.float32))
        if self.data.ndim != 3:
            raise ValueError("feature data must be (channels, height, width)")
        if not np.isfinite(self.data).all():
            raise ValueError("feature field contains NaN or Inf")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass
class ProposalRecord:
    """Everything extracted from one object proposal."""

    object_mask: BinaryMask
    context_mask: BinaryMask | None
    dilation_count: int
    context_valid: bool
    f_object: np.ndarray
    f_context: np.ndarray | None = None
    sal_object: float | None = None
    sal_context: float | None = None
    predicted_score: float | None = None


@dataclass
class ManifestEntry:
    image_id: str
    image_path: str
    gt_path: str | None = None
    proposals_dir: str | None = None
    features_path: str | None = None


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)


def mask_area(m: BinaryMask) -> int:
    """Number of set pixels."""
    return m.area()


def load_image(path: str) -> ImageBuffer:
    if not os.path.isfile(path):
        raise MissingFile(f"image not found: {path}")
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return ImageBuffer(arr)


def save_image(img: ImageBuffer, path: str) -> None:
    q = np.floor(img.data * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(q, mode="RGB").save(path, format="PNG")


def load_mask(path: str) -> BinaryMask:
    """Read an 8-bit mask PNG; values >= 128 map to foreground."""
    if not os.path.isfile(path):
        raise MissingFile(f"mask not found: {path}")
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return BinaryMask(arr >= 128)


def save_mask(mask: BinaryMask, path: str) -> None:
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def rgb_feature_field(img: ImageBuffer) -> FeatureField:
    """Raw [0,1] channel values as a 3-channel feature field."""
    return FeatureField(np.transpose(img.data, (2, 0, 1)).astype(np.float32))


def write_feature_tensor(f: FeatureField, path: str) -> None:
    header = TENSOR_MAGIC + struct.pack(
        "<IIII", TENSOR_VERSION, f.width, f.height, f.channels
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.data, dtype="<f4").tobytes())


def read_feature_tensor(path: str) -> FeatureField:
    if not os.path.isfile(path):
        raise MissingFile(f"feature tensor not found: {path}")
    with open(path, "rb") as fh:
        head = fh.read(20)
        if len(head) < 20 or head[:4] != TENSOR_MAGIC:
            raise CorruptTensor(f"bad tensor header in {path}")
        version, width, height, channels = struct.unpack("<IIII", head[4:])
        if version != TENSOR_VERSION:
            raise CorruptTensor(f"unsupported tensor version {version} in {path}")
        payload = fh.read(4 * width * height * channels + 1)
    if len(payload) != 4 * width * height * channels:
        raise CorruptTensor(f"tensor payload size mismatch in {path}")
    data = np.frombuffer(payload, dtype="<f4").reshape(channels, height, width)
    return FeatureField(data)


def load_manifest(path: str) -> DatasetManifest:
    """Parse and validate a dataset manifest.

    Relative paths are resolved against the manifest's directory. Every
    referenced file must exist, and each ground truth must match its image's
    dimensions.
    """
    if not os.path.isfile(path):
        raise MissingFile(f"manifest not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(base, p)

    entries = []
    for raw in doc.get("images", []):
        entry = ManifestEntry(
            image_id=str(raw["id"]),
            image_path=resolve(raw["image_path"]),
            gt_path=resolve(raw["gt_path"]) if raw.get("gt_path") else None,
            proposals_dir=resolve(raw["proposals_dir"]) if raw.get("proposals_dir") else None,
            features_path=resolve(raw["features_path"]) if raw.get("features_path") else None,
        )
        if not os.path.isfile(entry.image_path):
            raise MissingFile(f"entry {entry.image_id}: image missing at {entry.image_path}")
        if entry.gt_path is not None and not os.path.isfile(entry.gt_path):
            raise MissingFile(f"entry {entry.image_id}: ground truth missing at {entry.gt_path}")
        if entry.proposals_dir is not None and not os.path.isdir(entry.proposals_dir):
            raise MissingFile(
                f"entry {entry.image_id}: proposal directory missing at {entry.proposals_dir}"
            )
        if entry.features_path is not None and not os.path.isfile(entry.features_path):
            raise MissingFile(
                f"entry {entry.image_id}: feature tensor missing at {entry.features_path}"
            )
        if entry.gt_path is not None:
            with Image.open(entry.image_path) as im:
                img_size = im.size
            with Image.open(entry.gt_path) as gt:
                gt_size = gt.size
            if img_size != gt_size:
                raise DimensionMismatch(
                    f"entry {entry.image_id}: image {img_size} vs ground truth {gt_size}"
                )
        entries.append(entry)
    return DatasetManifest(entries)


def save_manifest(manifest: DatasetManifest, path: str) -> None:
    """Write a manifest with paths stored relative to the output directory."""
    base = os.path.dirname(os.path.abspath(path))

    def rel(p: str | None) -> str | None:
        return None if p is None else os.path.relpath(p, base)

    images = []
    for e in manifest.entries:
        doc = {"id": e.image_id, "image_path": rel(e.image_path)}
        if e.gt_path is not None:
            doc["gt_path"] = rel(e.gt_path)
        if e.proposals_dir is not None:
            doc["proposals_dir"] = rel(e.proposals_dir)
        if e.features_path is not None:
            doc["features_path"] = rel(e.features_path)
        images.append(doc)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"images": images}, fh, indent=2, sort_keys=True)
        fh.write("\n")
