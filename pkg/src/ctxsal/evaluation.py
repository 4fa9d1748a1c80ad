"""Precision-recall sweep over 256 thresholds and best-threshold F-measure.

A map is binarized at T = k/255 (score >= T counts as salient) for
k = 0..255. Per-image precision is defined as 1 when the binarization is
empty, which keeps curves monotone at high thresholds. Dataset curves
average per-image precision and recall by default; a micro-averaged
(pooled-count) mode is available.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyGroundTruth

N_LEVELS = 256
DEFAULT_BETA2 = 0.3


@dataclass(frozen=True, eq=False)
class PRCurve:
    thresholds: np.ndarray  # (256,) = k/255
    precision: np.ndarray
    recall: np.ndarray

    def __post_init__(self):
        for name in ("thresholds", "precision", "recall"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
        if not (self.thresholds.shape == self.precision.shape == self.recall.shape):
            raise ValueError("curve arrays must share shape")


def _counts_for_image(scores: np.ndarray, gt: np.ndarray):
    """Per-threshold (tp, predicted-positive, positives) via a histogram of
    score levels, equivalent to binarizing at every threshold separately."""
    thresholds = np.arange(N_LEVELS, dtype=np.float64) / 255.0
    tp = np.empty(N_LEVELS, dtype=np.int64)
    pp = np.empty(N_LEVELS, dtype=np.int64)
    flat = scores.ravel()
    gt_flat = gt.ravel()
    for k in range(N_LEVELS):
        sel = flat >= thresholds[k]
        pp[k] = int(np.count_nonzero(sel))
        tp[k] = int(np.count_nonzero(sel & gt_flat))
    pos = int(np.count_nonzero(gt_flat))
    return tp, pp, pos


def pr_curve(maps, gts, aggregate: str = "mean") -> PRCurve:
    """PR curve over a dataset of saliency maps and ground-truth masks."""
    if len(maps) != len(gts):
        raise DimensionMismatch("map and ground-truth counts differ")
    if len(maps) == 0:
        raise EmptyGroundTruth("cannot evaluate an empty dataset")
    if aggregate not in ("mean", "micro"):
        raise ValueError("aggregate must be 'mean' or 'micro'")

    thresholds = np.arange(N_LEVELS, dtype=np.float64) / 255.0
    sum_p = np.zeros(N_LEVELS, dtype=np.float64)
    sum_r = np.zeros(N_LEVELS, dtype=np.float64)
    tot_tp = np.zeros(N_LEVELS, dtype=np.float64)
    tot_pp = np.zeros(N_LEVELS, dtype=np.float64)
    tot_pos = 0.0

    for sal, gt in zip(maps, gts):
        if sal.width != gt.width or sal.height != gt.height:
            raise DimensionMismatch("map and ground truth dimensions differ")
        if gt.area() == 0:
            raise EmptyGroundTruth("a ground-truth mask has zero area")
        tp, pp, pos = _counts_for_image(sal.scores, gt.bits)
        precision = np.where(pp > 0, tp / np.maximum(pp, 1), 1.0)
        recall = tp / pos
        sum_p += precision
        sum_r += recall
        tot_tp += tp
        tot_pp += pp
        tot_pos += pos

    n = len(maps)
    if aggregate == "mean":
        return PRCurve(thresholds=thresholds, precision=sum_p / n, recall=sum_r / n)
    precision = np.where(tot_pp > 0, tot_tp / np.maximum(tot_pp, 1.0), 1.0)
    recall = tot_tp / tot_pos
    return PRCurve(thresholds=thresholds, precision=precision, recall=recall)


def f_measure(precision: float, recall: float, beta2: float = DEFAULT_BETA2) -> float:
    """(1 + b2) * P * R / (b2 * P + R); 0 when the denominator vanishes."""
    denom = beta2 * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta2) * precision * recall / denom


def best_f(curve: PRCurve, beta2: float = DEFAULT_BETA2) -> dict:
    """Maximum F over the curve; ties resolve to the lowest threshold."""
    if curve.thresholds.shape[0] == 0:
        raise ValueError("curve is empty")
    best_val = -1.0
    best_idx = 0
    for k in range(curve.thresholds.shape[0]):
        f = f_measure(float(curve.precision[k]), float(curve.recall[k]), beta2)
        if f > best_val:
            best_val = f
            best_idx = k
    return {
        "f": best_val,
        "threshold": float(curve.thresholds[best_idx]),
        "level": int(round(float(curve.thresholds[best_idx]) * 255.0)),
        "precision": float(curve.precision[best_idx]),
        "recall": float(curve.recall[best_idx]),
    }


def write_curve_csv(curve: PRCurve, path: str, beta2: float = DEFAULT_BETA2) -> None:
    lines = ["threshold,precision,recall,f"]
    for k in range(curve.thresholds.shape[0]):
        p = float(curve.precision[k])
        r = float(curve.recall[k])
        lines.append(f"{curve.thresholds[k]:.10g},{p:.10g},{r:.10g},{f_measure(p, r, beta2):.10g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary_json(curve: PRCurve, path: str, beta2: float = DEFAULT_BETA2) -> dict:
    summary = best_f(curve, beta2)
    summary["beta2"] = beta2
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
