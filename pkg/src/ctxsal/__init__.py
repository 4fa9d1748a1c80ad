"""Salient object detection from object proposals paired with context
proposals: morphological context rings, ray-cast context features, pooled
object descriptors, dual random-forest regression and per-pixel fusion."""

from ._kernels import BACKEND
from .config import RunConfig
from .context_features import (
    ContextFeatureVector,
    OrientationSet,
    context_features,
    point_contrast_c1,
    point_continuity_c2,
    ray_endpoints,
    smooth_field,
)
from .core_types import (
    BinaryMask,
    DatasetManifest,
    FeatureField,
    ImageBuffer,
    ProposalRecord,
    load_manifest,
    mask_area,
    read_feature_tensor,
    write_feature_tensor,
)
from .evaluation import PRCurve, best_f, f_measure, pr_curve
from .forest import ForestConfig, ForestModel, load_model, predict, save_model, train
from .labels import sal_context, sal_object
from .morphology import ContextResult, dilate_n8, generate_context
from .object_features import (
    WhiteningStats,
    apply_whitening,
    fit_whitening,
    pool_object_feature,
)
from .pipeline import SaliencyMap, SaliencyModel, extract_records, score_and_fuse, train_pipeline
from .proposals import ProposalSet, generate_builtin, load_proposals

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BinaryMask",
    "ContextFeatureVector",
    "ContextResult",
    "DatasetManifest",
    "FeatureField",
    "ForestConfig",
    "ForestModel",
    "ImageBuffer",
    "OrientationSet",
    "PRCurve",
    "ProposalRecord",
    "ProposalSet",
    "RunConfig",
    "SaliencyMap",
    "SaliencyModel",
    "WhiteningStats",
    "apply_whitening",
    "best_f",
    "context_features",
    "dilate_n8",
    "extract_records",
    "f_measure",
    "fit_whitening",
    "generate_builtin",
    "generate_context",
    "load_manifest",
    "load_model",
    "load_proposals",
    "mask_area",
    "point_contrast_c1",
    "point_continuity_c2",
    "pool_object_feature",
    "pr_curve",
    "predict",
    "ray_endpoints",
    "read_feature_tensor",
    "sal_context",
    "sal_object",
    "save_model",
    "score_and_fuse",
    "smooth_field",
    "train",
    "train_pipeline",
    "write_feature_tensor",
]
