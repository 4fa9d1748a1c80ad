"""End-to-end orchestration: feature extraction per proposal, dual-forest
training, scoring, and fusion of proposal scores into a saliency map.

Each proposal contributes a pooled object descriptor and, when its context
ring is usable, the 3-vector of context features. Two forests are trained:
one on whitened object descriptors against the object target, one on
context features against the context target. At test time the two
predictions are summed per proposal and the per-pixel map averages the
scores of all proposals covering the pixel.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace as dc_replace

import numpy as np
from PIL import Image

from . import forest as forest_mod
from .config import RunConfig
from .context_features import OrientationSet, context_features, smooth_field
from .core_types import (
    BinaryMask,
    DatasetManifest,
    FeatureField,
    ImageBuffer,
    ManifestEntry,
    ProposalRecord,
    load_image,
    load_mask,
    read_feature_tensor,
    rgb_feature_field,
)
from .errors import (
    CorruptModel,
    DimensionMismatch,
    InsufficientData,
    MissingFile,
    ModelDimensionMismatch,
)
from .labels import sal_context, sal_object
from .morphology import generate_context
from .object_features import apply_whitening, fit_whitening, pool_object_feature
from .proposals import ProposalSet, generate_builtin, load_proposals


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    """Per-pixel saliency scores in [0, 1]."""

    scores: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.scores, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("saliency scores must be (height, width)")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("saliency scores must lie in [0, 1]")
        object.__setattr__(self, "scores", arr)

    @property
    def height(self) -> int:
        return self.scores.shape[0]

    @property
    def width(self) -> int:
        return self.scores.shape[1]


def save_saliency_png(sal: SaliencyMap, path: str) -> None:
    q = np.floor(sal.scores * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(q, mode="L").save(path, format="PNG")


def load_saliency_png(path: str) -> SaliencyMap:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    return SaliencyMap(arr)


@dataclass
class SaliencyModel:
    """The trained pair of forests; whitening travels with the object forest."""

    object_forest: forest_mod.ForestModel
    context_forest: forest_mod.ForestModel

    def save(self, path: str) -> None:
        forest_mod.save_sections(
            {"object": self.object_forest, "context": self.context_forest}, path
        )

    @classmethod
    def load(cls, path: str) -> "SaliencyModel":
        sections = forest_mod.load_sections(path)
        if "object" not in sections or "context" not in sections:
            raise CorruptModel(
                f"model file {path} must contain 'object' and 'context' sections"
            )
        return cls(object_forest=sections["object"], context_forest=sections["context"])


def entry_feature_field(entry: ManifestEntry, img: ImageBuffer, cfg: RunConfig) -> FeatureField:
    if cfg.feature_source == "tensor" or entry.features_path is not None:
        if entry.features_path is None:
            raise MissingFile(f"entry {entry.image_id} has no feature tensor path")
        field = read_feature_tensor(entry.features_path)
        if field.width != img.width or field.height != img.height:
            raise DimensionMismatch(
                f"entry {entry.image_id}: tensor {field.width}x{field.height} "
                f"vs image {img.width}x{img.height}"
            )
        return field
    return rgb_feature_field(img)


def entry_proposals(entry: ManifestEntry, img: ImageBuffer, cfg: RunConfig) -> ProposalSet:
    if entry.proposals_dir is not None:
        return load_proposals(
            entry.proposals_dir,
            min_area=cfg.min_area,
            max_count=cfg.max_proposals,
            expected_size=(img.width, img.height),
            image_id=entry.image_id,
        )
    return generate_builtin(
        img,
        k_scales=cfg.k_scales,
        min_area=cfg.min_area,
        max_count=cfg.max_proposals,
        seed=cfg.seed,
        image_id=entry.image_id,
    )


def extract_records(
    img: ImageBuffer,
    proposals: ProposalSet,
    field: FeatureField,
    cfg: RunConfig,
    gt: BinaryMask | None = None,
) -> list:
    """Build one ProposalRecord per proposal mask.

    The feature field is smoothed once here and reused by every proposal.
    Proposals whose context is unusable carry the object descriptor only.
    """
    phis = OrientationSet(cfg.orientations)
    smoothed = smooth_field(field, cfg.sigma)
    records = []
    for mask in proposals.masks:
        ctx = generate_context(mask)
        f_obj = pool_object_feature(mask, field)
        f_ctx = None
        if ctx.valid:
            vec = context_features(
                mask,
                ctx.context,
                field,
                phis=phis,
                lam=cfg.lam,
                sigma=cfg.sigma,
                normalize_by_valid_pairs=cfg.normalize_by_valid_pairs,
                presmoothed=smoothed,
            )
            f_ctx = np.array([vec.c1, vec.c2, vec.c3], dtype=np.float64)
        rec = ProposalRecord(
            object_mask=mask,
            context_mask=ctx.context,
            dilation_count=ctx.dilation_count,
            context_valid=ctx.valid,
            f_object=f_obj,
            f_context=f_ctx,
        )
        if gt is not None:
            rec.sal_object = sal_object(mask, gt)
            if ctx.valid and ctx.context.area() > 0:
                rec.sal_context = sal_context(mask, ctx.context, gt)
        records.append(rec)
    return records


def _training_rows(args):
    entry, cfg = args
    img = load_image(entry.image_path)
    gt = load_mask(entry.gt_path)
    field = entry_feature_field(entry, img, cfg)
    proposals = entry_proposals(entry, img, cfg)
    records = extract_records(img, proposals, field, cfg, gt=gt)
    obj_rows = [r.f_object for r in records]
    obj_y = [r.sal_object for r in records]
    ctx_rows = [r.f_context for r in records if r.sal_context is not None]
    ctx_y = [r.sal_context for r in records if r.sal_context is not None]
    return obj_rows, obj_y, ctx_rows, ctx_y


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def train_pipeline(manifest: DatasetManifest, cfg: RunConfig, model_out: str) -> SaliencyModel:
    """Train both forests from a manifest whose entries all carry ground truth."""
    for entry in manifest.entries:
        if entry.gt_path is None:
            raise MissingFile(f"entry {entry.image_id} has no ground truth; cannot train")

    results = _map_jobs(_training_rows, [(e, cfg) for e in manifest.entries], cfg.jobs)

    obj_rows, obj_y, ctx_rows, ctx_y = [], [], [], []
    for o_rows, o_y, c_rows, c_y in results:
        obj_rows.extend(o_rows)
        obj_y.extend(o_y)
        ctx_rows.extend(c_rows)
        ctx_y.extend(c_y)

    if len(obj_rows) < 2:
        raise InsufficientData(f"only {len(obj_rows)} usable proposals; need at least 2")
    if len(ctx_rows) < 2:
        raise InsufficientData(
            f"only {len(ctx_rows)} proposals with a usable context; need at least 2"
        )

    whitening = fit_whitening(obj_rows)
    obj_x = apply_whitening(whitening, np.asarray(obj_rows, dtype=np.float64))

    base_seed = (cfg.seed << 1) % 2**64
    obj_cfg = forest_mod.ForestConfig(n_trees=cfg.n_trees, seed=base_seed)
    ctx_cfg = forest_mod.ForestConfig(n_trees=cfg.n_trees, seed=(base_seed + 1) % 2**64)

    obj_forest = forest_mod.train(obj_x, np.asarray(obj_y, dtype=np.float64), obj_cfg)
    obj_forest = dc_replace(obj_forest, whitening=whitening)
    ctx_forest = forest_mod.train(
        np.asarray(ctx_rows, dtype=np.float64), np.asarray(ctx_y, dtype=np.float64), ctx_cfg
    )

    model = SaliencyModel(object_forest=obj_forest, context_forest=ctx_forest)
    if model_out:
        model.save(model_out)
    return model


def score_records(records: list, model: SaliencyModel) -> np.ndarray:
    """Per-proposal raw scores: object prediction plus context prediction
    (object-only when the record has no usable context)."""
    if not records:
        return np.zeros(0, dtype=np.float64)
    if model.object_forest.whitening is None:
        raise ModelDimensionMismatch("object forest is missing whitening statistics")
    for rec in records:
        if rec.f_object.shape[0] != model.object_forest.feature_dim:
            raise ModelDimensionMismatch(
                f"object feature dimension {rec.f_object.shape[0]} does not match "
                f"model dimension {model.object_forest.feature_dim}"
            )
    obj_x = apply_whitening(
        model.object_forest.whitening,
        np.asarray([r.f_object for r in records], dtype=np.float64),
    )
    scores = forest_mod.predict_many(model.object_forest, obj_x)
    ctx_ids = [i for i, r in enumerate(records) if r.f_context is not None]
    if ctx_ids:
        ctx_x = np.asarray([records[i].f_context for i in ctx_ids], dtype=np.float64)
        ctx_scores = forest_mod.predict_many(model.context_forest, ctx_x)
        for j, i in enumerate(ctx_ids):
            scores[i] += ctx_scores[j]
    for rec, s in zip(records, scores):
        rec.predicted_score = float(s)
    return scores


def fuse_scores(masks: list, scores: np.ndarray, width: int, height: int, mode: str = "mean") -> np.ndarray:
    """Raw fused map (no normalization): per pixel, the mean (or max) of the
    scores of the proposals containing it; 0 where nothing covers."""
    if mode not in ("mean", "max"):
        raise ValueError("fusion mode must be 'mean' or 'max'")
    if mode == "max":
        out = np.zeros((height, width), dtype=np.float64)
        for mask, s in zip(masks, scores):
            region = mask.bits
            out[region] = np.maximum(out[region], s)
        return out
    acc = np.zeros((height, width), dtype=np.float64)
    cnt = np.zeros((height, width), dtype=np.int64)
    for mask, s in zip(masks, scores):
        region = mask.bits
        acc[region] += s
        cnt[region] += 1
    covered = cnt > 0
    out = np.zeros((height, width), dtype=np.float64)
    out[covered] = acc[covered] / cnt[covered]
    return out


def normalize_map(raw: np.ndarray, enabled: bool = True) -> np.ndarray:
    """Min-max normalization to [0, 1]; all-equal maps become all-zero.
    When disabled, values are clipped to [0, 1] instead."""
    if not enabled:
        return np.clip(raw, 0.0, 1.0)
    lo = float(raw.min())
    hi = float(raw.max())
    if hi == lo:
        return np.zeros_like(raw)
    return (raw - lo) / (hi - lo)


def score_and_fuse(records: list, model: SaliencyModel, width: int, height: int, cfg: RunConfig) -> SaliencyMap:
    scores = score_records(records, model)
    raw = fuse_scores([r.object_mask for r in records], scores, width, height, cfg.fusion_mode)
    return SaliencyMap(normalize_map(raw, cfg.normalize_map))


def predict_entry(entry: ManifestEntry, cfg: RunConfig, model: SaliencyModel) -> SaliencyMap:
    img = load_image(entry.image_path)
    field = entry_feature_field(entry, img, cfg)
    proposals = entry_proposals(entry, img, cfg)
    records = extract_records(img, proposals, field, cfg)
    return score_and_fuse(records, model, img.width, img.height, cfg)
