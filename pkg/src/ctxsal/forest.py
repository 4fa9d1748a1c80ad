"""From-scratch random-forest regressor with fully deterministic training.

Tree t draws all of its randomness from a counter-based Philox stream keyed
by (seed, t), so a forest is a pure function of (data, config) regardless
of how many trees are trained or in which order. Splits minimize the summed
child squared error over midpoint candidates between consecutive distinct
values; ties break toward the lowest dimension, then the lowest threshold.
Node statistics are computed over (value, label)-sorted samples, which makes
the grown trees invariant to row permutations when bootstrap is off and all
features are candidates.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CorruptModel,
    DimensionMismatch,
    InsufficientData,
    NonFiniteInput,
)
from .object_features import WhiteningStats

MODEL_MAGIC = b"CSRF"
MODEL_VERSION = 1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 200
    max_depth: int | None = None
    min_samples_leaf: int = 5
    features_per_split: int | None = None  # None: ceil(D / 3), resolved at fit
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat binary regression tree; feature == -1 marks a leaf."""

    feature: np.ndarray  # int32
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple
    config: ForestConfig
    feature_dim: int
    whitening: WhiteningStats | None = None


def _exact_mean(values: np.ndarray) -> float:
    # the mean of identical values is that value, bit for bit
    first = float(values[0])
    if np.all(values == first):
        return first
    return math.fsum(np.sort(values)) / values.shape[0]


def _best_split(col: np.ndarray, yv: np.ndarray, min_leaf: int):
    """Best (sse, threshold) on one dimension, or None if no legal split."""
    order = np.lexsort((yv, col))
    cs = col[order]
    ys = yv[order]
    n = cs.shape[0]
    boundaries = np.nonzero(cs[1:] != cs[:-1])[0]
    if boundaries.size == 0:
        return None
    n_left = boundaries + 1
    keep = (n_left >= min_leaf) & (n - n_left >= min_leaf)
    boundaries = boundaries[keep]
    if boundaries.size == 0:
        return None
    pre = np.cumsum(ys)
    pre2 = np.cumsum(ys * ys)
    total, total2 = pre[-1], pre2[-1]
    n_left = (boundaries + 1).astype(np.float64)
    sum_left = pre[boundaries]
    sq_left = pre2[boundaries]
    n_right = n - n_left
    sse = (sq_left - sum_left**2 / n_left) + (
        (total2 - sq_left) - (total - sum_left) ** 2 / n_right
    )
    best = int(np.argmin(sse))  # first minimum: lowest threshold wins ties
    i = int(boundaries[best])
    lo, hi = cs[i], cs[i + 1]
    thr = (lo + hi) / 2.0
    if thr >= hi:  # adjacent floats: midpoint rounded up would empty the right side
        thr = lo
    return float(sse[best]), float(thr)


def _grow_tree(x: np.ndarray, y: np.ndarray, cfg: ForestConfig, m: int, t: int) -> Tree:
    rng = np.random.Generator(np.random.Philox(key=[cfg.seed % 2**64, t]))
    n, dim = x.shape
    if cfg.bootstrap:
        pick = rng.integers(0, n, n)
        xs, ys = x[pick], y[pick]
    else:
        xs, ys = x, y

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    max_depth = cfg.max_depth if cfg.max_depth is not None else -1
    stack = [(new_node(), np.arange(n, dtype=np.int64), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yv = ys[idx]
        splittable = (
            idx.shape[0] >= 2 * cfg.min_samples_leaf
            and (max_depth < 0 or depth < max_depth)
            and np.ptp(yv) != 0.0
        )
        best = None
        if splittable:
            if m >= dim:
                dims = range(dim)
            else:
                dims = np.sort(rng.choice(dim, size=m, replace=False))
            for d in dims:
                cand = _best_split(xs[idx, d], yv, cfg.min_samples_leaf)
                if cand is not None and (best is None or cand[0] < best[0]):
                    best = (cand[0], int(d), cand[1])
        if best is None:
            value[node] = _exact_mean(yv)
            continue
        _, d, thr = best
        go_left = xs[idx, d] <= thr
        feature[node] = d
        threshold[node] = thr
        lid = new_node()
        rid = new_node()
        left[node] = lid
        right[node] = rid
        stack.append((rid, idx[~go_left], depth + 1))
        stack.append((lid, idx[go_left], depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        value=np.array(value, dtype=np.float64),
    )


def train(x, y, cfg: ForestConfig | None = None) -> ForestModel:
    """Train a forest of variance-reduction regression trees."""
    if cfg is None:
        cfg = ForestConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionMismatch("x must be (N, D) and y must be (N,)")
    if x.shape[0] < 2:
        raise InsufficientData("training needs at least 2 samples")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise NonFiniteInput("training data contains NaN or Inf")

    dim = x.shape[1]
    m = cfg.features_per_split
    if m is None:
        m = math.ceil(dim / 3)
    if not 1 <= m <= dim:
        raise ValueError(f"features_per_split must be in [1, {dim}]")
    resolved = replace(cfg, features_per_split=m)
    trees = tuple(_grow_tree(x, y, resolved, m, t) for t in range(cfg.n_trees))
    return ForestModel(trees=trees, config=resolved, feature_dim=dim)


def _tree_apply(tree: Tree, x: np.ndarray) -> np.ndarray:
    """Leaf values for all rows of x under one tree."""
    node = np.zeros(x.shape[0], dtype=np.int64)
    while True:
        is_split = tree.feature[node] >= 0
        if not is_split.any():
            break
        feat = np.where(is_split, tree.feature[node], 0)
        go_left = x[np.arange(x.shape[0]), feat] <= tree.threshold[node]
        nxt = np.where(go_left, tree.left[node], tree.right[node])
        node = np.where(is_split, nxt, node)
    return tree.value[node]


def predict_many(model: ForestModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.feature_dim:
        raise DimensionMismatch(
            f"expected rows of dimension {model.feature_dim}, got shape {x.shape}"
        )
    per_tree = np.empty((len(model.trees), x.shape[0]), dtype=np.float64)
    for t, tree in enumerate(model.trees):
        per_tree[t] = _tree_apply(tree, x)
    total = np.zeros(x.shape[0], dtype=np.float64)
    for t in range(per_tree.shape[0]):  # fixed tree order
        total += per_tree[t]
    out = total / len(model.trees)
    all_equal = (per_tree == per_tree[0]).all(axis=0)
    return np.where(all_equal, per_tree[0], out)


def predict(model: ForestModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("predict takes a single feature vector")
    return float(predict_many(model, x[None, :])[0])


# ---------------------------------------------------------------------------
# serialization: one file can hold several named forests (the trained model
# stores the object and context forests as two sections)

def _pack_tree(tree: Tree) -> bytes:
    n = tree.feature.shape[0]
    parts = [struct.pack("<I", n)]
    parts.append(tree.feature.astype("<i4").tobytes())
    parts.append(tree.threshold.astype("<f8").tobytes())
    parts.append(tree.left.astype("<i4").tobytes())
    parts.append(tree.right.astype("<i4").tobytes())
    parts.append(tree.value.astype("<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, blob: bytes, path: str):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.blob):
            raise CorruptModel(f"truncated model file: {self.path}")
        out = self.blob[self.pos : self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _unpack_tree(r: _Reader) -> Tree:
    (n,) = r.unpack("<I")
    feature = np.frombuffer(r.take(4 * n), dtype="<i4").copy()
    threshold = np.frombuffer(r.take(8 * n), dtype="<f8").copy()
    left = np.frombuffer(r.take(4 * n), dtype="<i4").copy()
    right = np.frombuffer(r.take(4 * n), dtype="<i4").copy()
    value = np.frombuffer(r.take(8 * n), dtype="<f8").copy()
    return Tree(feature=feature, threshold=threshold, left=left, right=right, value=value)


def _pack_model(model: ForestModel) -> bytes:
    cfg = model.config
    parts = [
        struct.pack(
            "<IiIiBQ",
            cfg.n_trees,
            -1 if cfg.max_depth is None else cfg.max_depth,
            cfg.min_samples_leaf,
            -1 if cfg.features_per_split is None else cfg.features_per_split,
            1 if cfg.bootstrap else 0,
            cfg.seed % 2**64,
        ),
        struct.pack("<I", model.feature_dim),
    ]
    if model.whitening is not None:
        parts.append(struct.pack("<BI", 1, model.whitening.dim))
        parts.append(model.whitening.mean.astype("<f8").tobytes())
        parts.append(model.whitening.std.astype("<f8").tobytes())
    else:
        parts.append(struct.pack("<BI", 0, 0))
    parts.append(struct.pack("<I", len(model.trees)))
    for tree in model.trees:
        parts.append(_pack_tree(tree))
    return b"".join(parts)


def _unpack_model(r: _Reader) -> ForestModel:
    n_trees, max_depth, min_leaf, fps, bootstrap, seed = r.unpack("<IiIiBQ")
    (feature_dim,) = r.unpack("<I")
    has_whitening, wdim = r.unpack("<BI")
    whitening = None
    if has_whitening:
        mean = np.frombuffer(r.take(8 * wdim), dtype="<f8").copy()
        std = np.frombuffer(r.take(8 * wdim), dtype="<f8").copy()
        whitening = WhiteningStats(mean=mean, std=std)
    (tree_count,) = r.unpack("<I")
    trees = tuple(_unpack_tree(r) for t in range(tree_count))
    cfg = ForestConfig(
        n_trees=n_trees,
        max_depth=None if max_depth < 0 else max_depth,
        min_samples_leaf=min_leaf,
        features_per_split=None if fps < 0 else fps,
        bootstrap=bool(bootstrap),
        seed=seed,
    )
    return ForestModel(trees=trees, config=cfg, feature_dim=feature_dim, whitening=whitening)


def save_sections(sections: dict, path: str) -> None:
    """Write named forests into one model file."""
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<II", MODEL_VERSION, len(sections)))
        for name, model in sections.items():
            blob = _pack_model(model)
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)


def load_sections(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise CorruptModel(f"cannot read model file {path}: {exc}") from exc
    r = _Reader(blob, path)
    if r.take(4) != MODEL_MAGIC:
        raise CorruptModel(f"bad magic in model file: {path}")
    version, n_sections = r.unpack("<II")
    if version != MODEL_VERSION:
        raise CorruptModel(f"unsupported model version {version} in {path}")
    sections = {}
    for _ in range(n_sections):
        (name_len,) = r.unpack("<I")
        name = r.take(name_len).decode("utf-8")
        (blob_len,) = r.unpack("<Q")
        sub = _Reader(r.take(blob_len), path)
        sections[name] = _unpack_model(sub)
        if sub.pos != blob_len:
            raise CorruptModel(f"section {name} has trailing bytes in {path}")
    if r.pos != len(blob):
        raise CorruptModel(f"trailing bytes in model file: {path}")
    return sections


def save_model(model: ForestModel, path: str) -> None:
    save_sections({"model": model}, path)


def load_model(path: str) -> ForestModel:
    sections = load_sections(path)
    if len(sections) != 1:
        raise CorruptModel(
            f"expected a single-forest file, found {len(sections)} sections in {path}"
        )
    return next(iter(sections.values()))
