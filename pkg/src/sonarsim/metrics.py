"""Pixelwise scoring of predicted obstacle masks against ground truth.

Positive class is obstacle (mask value 1). Five metrics: accuracy,
precision, sensitivity, specificity, and IoU. A metric whose denominator
is zero is reported as None (JSON null) and never coerced to 0 or 1, so
empty-scene samples cannot bias an aggregate; the one exception is
foreground IoU of two empty masks, which is 1 by the usual convention.

IoU has two modes. "foreground" is the Jaccard index over the obstacle
class, tp / (tp + fp + fn). "agreement" is (tp + tn) / total, which
equals accuracy; it is provided because published overlap figures are
sometimes computed background-inclusively, and scoring against such a
figure needs the matching definition.

Aggregation is a micro-average: confusion counts are summed over the
sample set first, then the formulas are applied once.
"""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "ConfusionCounts",
    "MetricsReport",
    "binarize",
    "confusion",
    "score",
    "iou",
    "iou_from_counts",
    "aggregate",
    "report_to_dict",
    "report_to_json",
]

IOU_MODES = ("foreground", "agreement")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.tn + other.tn,
                               self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class MetricsReport:
    """Five metrics plus the counts they came from. None = undefined."""

    accuracy: float
    precision: Optional[float]
    sensitivity: Optional[float]
    specificity: Optional[float]
    iou: float
    iou_mode: str
    counts: ConfusionCounts
    n_samples: int = 1


def binarize(probabilities: np.ndarray, threshold: float = 0.5) -> np.ndarray:
    """Threshold a probability map into a uint8 {0, 1} mask.

    Values exactly at the threshold map to 1 (>= convention).
    """
    p = np.asarray(probabilities)
    if not np.isfinite(p).all():
        raise ValueError("probabilities contain non-finite values")
    lo, hi = float(p.min(initial=0.0)), float(p.max(initial=0.0))
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"probabilities must lie in [0, 1], got [{lo:.4g}, {hi:.4g}]")
    return (p >= threshold).astype(np.uint8)


def confusion(pred: np.ndarray, target: np.ndarray) -> ConfusionCounts:
    """Pixel confusion counts; inputs are {0, 1} masks of equal shape."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    p = pred.astype(bool)
    t = target.astype(bool)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den > 0 else None


def iou_from_counts(counts: ConfusionCounts, mode: str = "foreground") -> float:
    if mode == "foreground":
        union = counts.tp + counts.fp + counts.fn
        # Two empty masks overlap perfectly.
        return counts.tp / union if union > 0 else 1.0
    if mode == "agreement":
        if counts.total == 0:
            raise ValueError("empty confusion counts")
        return (counts.tp + counts.tn) / counts.total
    raise ValueError(f"mode must be one of {IOU_MODES}, got {mode!r}")


def iou(pred: np.ndarray, target: np.ndarray, mode: str = "foreground") -> float:
    return iou_from_counts(confusion(pred, target), mode)


def score(counts: ConfusionCounts, iou_mode: str = "foreground",
          n_samples: int = 1) -> MetricsReport:
    """Compute all five metrics from confusion counts."""
    if counts.total <= 0:
        raise ValueError("confusion counts are empty")
    if iou_mode not in IOU_MODES:
        raise ValueError(f"iou_mode must be one of {IOU_MODES}, got {iou_mode!r}")
    return MetricsReport(
        accuracy=(counts.tp + counts.tn) / counts.total,
        precision=_ratio(counts.tp, counts.tp + counts.fp),
        sensitivity=_ratio(counts.tp, counts.tp + counts.fn),
        specificity=_ratio(counts.tn, counts.tn + counts.fp),
        iou=iou_from_counts(counts, iou_mode),
        iou_mode=iou_mode,
        counts=counts,
        n_samples=n_samples,
    )


def aggregate(reports) -> MetricsReport:
    """Micro-average: sum counts over samples, then score once.

    All reports must share one iou_mode.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("cannot aggregate zero reports")
    modes = {r.iou_mode for r in reports}
    if len(modes) != 1:
        raise ValueError(f"mixed iou modes {sorted(modes)}")
    total = reports[0].counts
    for r in reports[1:]:
        total = total + r.counts
    return score(total, iou_mode=reports[0].iou_mode,
                 n_samples=sum(r.n_samples for r in reports))


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "precision": report.precision,
        "sensitivity": report.sensitivity,
        "specificity": report.specificity,
        "iou": report.iou,
        "iou_mode": report.iou_mode,
        "counts": {"tp": report.counts.tp, "tn": report.counts.tn,
                   "fp": report.counts.fp, "fn": report.counts.fn},
        "n_samples": report.n_samples,
    }


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"
