"""
Checkpoint evaluation: IoU table and confidence histograms as CSV.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from tqdm import tqdm

from src.config import HISTOGRAM_BINS, OVERCONFIDENCE_THRESHOLD, SHOW_PROGRESS
from src.data.dataset import load_pairs
from src.errors import DataFileError
from src.evaluation.metrics import (
    ConfidenceHistogram,
    ConfusionMatrix,
    accumulate,
    miou,
    overconfident_error_fraction,
)
from src.learning.model import ModelParams, load_checkpoint, predict

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ('section', 'key', 'value')


@dataclass(frozen=True)
class EvalReport:
    per_class: list[float | None]
    miou: float
    histogram: ConfidenceHistogram
    overconfident_errors: float
    pixels: int

    def rows(self) -> list[tuple[str, str, str]]:
        rows = [('iou', str(c), 'absent' if v is None else repr(v))
                for c, v in enumerate(self.per_class)]
        rows.append(('miou', 'mean', repr(self.miou)))
        rows.append(('overconfidence', f"error_fraction_above_{OVERCONFIDENCE_THRESHOLD}",
                     repr(self.overconfident_errors)))
        edges = self.histogram.edges
        for name, counts in (('hist_all', self.histogram.counts_all),
                             ('hist_erroneous', self.histogram.counts_erroneous)):
            rows += [(name, f"{edges[i]:.2f}-{edges[i + 1]:.2f}", str(int(n)))
                     for i, n in enumerate(counts)]
        return rows


def evaluate_params(params: ModelParams, image_dir: Path, label_dir: Path,
                    bins: int = HISTOGRAM_BINS, use_norm: bool = False) -> EvalReport:
    """Plain-argmax inference over a labeled split."""
    num_classes = params.dims[2]
    pairs = load_pairs(image_dir, label_dir, num_classes)
    cm = ConfusionMatrix.empty(num_classes)
    hist = ConfidenceHistogram.empty(bins)
    for img, gt in tqdm(pairs, desc='eval', disable=not SHOW_PROGRESS):
        pred, logits = predict(params, img)
        cm = accumulate(pred, gt, cm)
        hist = hist.add(logits, gt, use_norm)
    per_class, mean = miou(cm)
    return EvalReport(per_class, mean, hist, overconfident_error_fraction(hist), cm.total)


def write_report(path: Path, report: EvalReport) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(REPORT_COLUMNS)
            writer.writerows(report.rows())
    except OSError as exc:
        raise DataFileError(f"Cannot write report {path}: {exc}") from exc


def evaluate(checkpoint: Path, image_dir: Path, label_dir: Path, out_csv: Path,
             bins: int = HISTOGRAM_BINS, use_norm: bool = False) -> EvalReport:
    """
    Evaluate a checkpoint and write the CSV report.

    Args:
        checkpoint (Path): Student checkpoint
        image_dir (Path): Images to segment
        label_dir (Path): Ground truth with matching file stems
        out_csv (Path): Report destination (columns section, key, value)
        bins (int): Histogram bins over [0, 1]
        use_norm (bool): Histogram the normalised softmax instead

    Returns:
        EvalReport: Per-class IoU, mIoU and confidence histograms
    """
    report = evaluate_params(load_checkpoint(checkpoint), image_dir, label_dir, bins, use_norm)
    write_report(out_csv, report)
    logger.info("mIoU %.4f over %d pixels, written to %s", report.miou, report.pixels, out_csv)
    return report
