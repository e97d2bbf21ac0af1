"""
ClassMix compositing of source and target images.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.imaging.types import IGNORE_ID, Image, LabelMap, ScalarMap, require_same_size

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MixResult:
    """Composite image and label; mask is 1 where the source pixel was kept."""
    mixed_image: Image
    mixed_label: LabelMap
    mask: ScalarMap
    classes: tuple[int, ...]


def class_mask(labels: LabelMap, classes: Sequence[int]) -> ScalarMap:
    """Binary map, 1.0 on pixels whose label is in ``classes``."""
    return np.isin(labels, np.asarray(classes, dtype=np.int64)).astype(np.float64)


def composite(mask: ScalarMap, source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Take ``source`` where mask is 1 and ``target`` where it is 0."""
    keep = mask.astype(bool)
    if source.ndim == 3:
        keep = keep[..., np.newaxis]
    return np.where(keep, source, target)


def classmix(src_img: Image, src_label: LabelMap, tgt_img: Image, tgt_label: LabelMap,
             rng: np.random.Generator, selected: Sequence[int] | None = None) -> MixResult:
    """
    Paste the pixels of half of the source classes onto the target.

    ceil(n / 2) of the n classes present in ``src_label`` are drawn without
    replacement from ``rng``; ``selected`` forces the class set instead.

    Args:
        src_img (Image): Source image
        src_label (LabelMap): Source ground truth
        tgt_img (Image): Target image
        tgt_label (LabelMap): Target (pseudo) labels
        rng (np.random.Generator): Sampling generator
        selected (Sequence[int] | None): Explicit class set

    Returns:
        MixResult: Mixed image, mixed label, mask and the pasted classes
    """
    require_same_size(src_img, src_label, tgt_img, tgt_label)
    if selected is None:
        present = np.unique(src_label)
        present = present[present != IGNORE_ID]
        if present.size == 0:
            logger.warning("ClassMix source has no labeled pixels; target passes through unchanged")
        elif present.size == 1:
            logger.debug("ClassMix source holds a single class")
        count = math.ceil(present.size / 2)
        selected = np.sort(rng.choice(present, size=count, replace=False)) if count else []
    classes = tuple(int(c) for c in selected)
    mask = class_mask(src_label, classes)
    return MixResult(
        mixed_image=composite(mask, src_img, tgt_img),
        mixed_label=composite(mask, src_label, tgt_label).astype(np.uint8),
        mask=mask,
        classes=classes,
    )
