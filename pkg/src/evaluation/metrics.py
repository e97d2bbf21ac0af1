"""
Confusion-matrix IoU and confidence histograms.
"""
import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from src.config import HISTOGRAM_BINS, OVERCONFIDENCE_THRESHOLD
from src.errors import ShapeError, ValidationError
from src.imaging.types import IGNORE_ID, LabelMap, require_same_size
from src.learning.losses import LossConfig, normalized_softmax, softmax

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i, j] = non-ignored pixels with ground truth i predicted as j."""
    counts: np.ndarray

    @classmethod
    def empty(cls, num_classes: int) -> 'ConfusionMatrix':
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64))

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def accumulate(pred: LabelMap, gt: LabelMap, cm: ConfusionMatrix) -> ConfusionMatrix:
    """
    Add one prediction to the matrix; ignored ground-truth pixels are skipped.

    Raises:
        ShapeError: If the maps differ in size
        ValidationError: If a predicted or ground-truth id is not below K
    """
    require_same_size(pred, gt)
    k = cm.num_classes
    valid = gt != IGNORE_ID
    truth = gt[valid].astype(np.int64)
    guess = pred[valid].astype(np.int64)
    if truth.size and (truth.max() >= k or guess.max() >= k or guess.min() < 0):
        raise ValidationError(f"Class id out of range for {k} classes")
    counts = np.bincount(truth * k + guess, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(cm.counts + counts)


def miou(cm: ConfusionMatrix) -> tuple[list[float | None], float]:
    """
    Per-class IoU = TP / (TP + FP + FN) and their mean.

    Classes with an empty union are reported as None and left out of the mean.

    Raises:
        ValidationError: If every class is absent
    """
    tp = np.diag(cm.counts).astype(np.float64)
    union = cm.counts.sum(axis=0) + cm.counts.sum(axis=1) - tp
    per_class = [float(t / u) if u > 0 else None for t, u in zip(tp, union)]
    present = [v for v in per_class if v is not None]
    if not present:
        raise ValidationError("mIoU is undefined: no class present in ground truth or prediction")
    return per_class, float(np.mean(present))


@dataclass(frozen=True)
class ConfidenceHistogram:
    """Counts of per-pixel confidences, for all pixels and erroneous ones."""
    edges: np.ndarray
    counts_all: np.ndarray
    counts_erroneous: np.ndarray

    @classmethod
    def empty(cls, bins: int = HISTOGRAM_BINS) -> 'ConfidenceHistogram':
        return cls(np.linspace(0.0, 1.0, bins + 1), np.zeros(bins, dtype=np.int64),
                   np.zeros(bins, dtype=np.int64))

    def add(self, logits: np.ndarray, gt: LabelMap, use_norm: bool = False,
            cfg: LossConfig | None = None) -> 'ConfidenceHistogram':
        if logits.ndim != 3 or logits.shape[:2] != gt.shape:
            raise ShapeError(f"Logits {logits.shape} and labels {gt.shape} do not agree")
        probs = normalized_softmax(logits, cfg or LossConfig()) if use_norm else softmax(logits)
        valid = gt != IGNORE_ID
        confidence = probs.max(axis=-1)[valid]
        wrong = probs.argmax(axis=-1)[valid] != gt[valid]
        span = (0.0, 1.0)
        all_counts, _ = np.histogram(confidence, bins=self.edges.size - 1, range=span)
        err_counts, _ = np.histogram(confidence[wrong], bins=self.edges.size - 1, range=span)
        return ConfidenceHistogram(self.edges, self.counts_all + all_counts,
                                   self.counts_erroneous + err_counts)


def confidence_report(logit_maps: Iterable[np.ndarray], gt_maps: Iterable[LabelMap],
                      bins: int = HISTOGRAM_BINS, use_norm: bool = False,
                      cfg: LossConfig | None = None) -> ConfidenceHistogram:
    """
    Histogram of per-pixel maximum probability over a set of predictions.

    Args:
        logit_maps (Iterable[np.ndarray]): H x W x K logits per image
        gt_maps (Iterable[LabelMap]): Matching ground truth
        bins (int): Number of equal-width bins over [0, 1]
        use_norm (bool): Use the normalised softmax instead of the plain one
        cfg (LossConfig | None): Norm guard when use_norm is set

    Returns:
        ConfidenceHistogram: Counts for all and for erroneous pixels
    """
    hist = ConfidenceHistogram.empty(bins)
    for logits, gt in zip(logit_maps, gt_maps, strict=True):
        hist = hist.add(logits, gt, use_norm, cfg)
    return hist


def overconfident_error_fraction(hist: ConfidenceHistogram,
                                 threshold: float = OVERCONFIDENCE_THRESHOLD) -> float:
    """
    Share of erroneous pixels falling in bins at or above ``threshold``.

    ``threshold`` is rounded to the nearest bin edge. Returns 0.0 when there
    are no erroneous pixels.
    """
    errors = int(hist.counts_erroneous.sum())
    if errors == 0:
        return 0.0
    first = int(np.argmin(np.abs(hist.edges[:-1] - threshold)))
    return float(hist.counts_erroneous[first:].sum() / errors)
