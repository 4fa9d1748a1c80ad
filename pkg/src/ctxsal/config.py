"""Run configuration shared by the CLI and the pipeline.

Defaults follow the published hyperparameters: lambda 40, four ray
orientations, 200 trees, 4500-pixel minimum proposal area, 256 proposals
per image, beta^2 = 0.3. The minimum area is tuned for benchmark-scale
photographs (~300x400 px); synthetic desk-scale runs override it.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

from .context_features import DEFAULT_LAMBDA, DEFAULT_ORIENTATIONS, DEFAULT_SIGMA
from .proposals import DEFAULT_K_SCALES, DEFAULT_MAX_PROPOSALS, DEFAULT_MIN_AREA


@dataclass(frozen=True)
class RunConfig:
    lam: float = DEFAULT_LAMBDA
    sigma: float = DEFAULT_SIGMA
    orientations: tuple = field(default_factory=lambda: DEFAULT_ORIENTATIONS)
    n_trees: int = 200
    min_area: int = DEFAULT_MIN_AREA
    max_proposals: int = DEFAULT_MAX_PROPOSALS
    seed: int = 0
    feature_source: str = "rgb"  # "rgb" | "tensor"
    fusion_mode: str = "mean"  # "mean" | "max"
    normalize_map: bool = True
    normalize_by_valid_pairs: bool = True
    beta2: float = 0.3
    pr_aggregate: str = "mean"  # "mean" | "micro"
    k_scales: tuple = field(default_factory=lambda: DEFAULT_K_SCALES)
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "orientations", tuple(self.orientations))
        object.__setattr__(self, "k_scales", tuple(self.k_scales))
        if self.feature_source not in ("rgb", "tensor"):
            raise ValueError("feature_source must be 'rgb' or 'tensor'")
        if self.fusion_mode not in ("mean", "max"):
            raise ValueError("fusion_mode must be 'mean' or 'max'")
        if self.pr_aggregate not in ("mean", "micro"):
            raise ValueError("pr_aggregate must be 'mean' or 'micro'")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        doc = self.to_dict()
        doc["orientations"] = list(doc["orientations"])
        doc["k_scales"] = list(doc["k_scales"])
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def override(self, **kwargs) -> "RunConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self
