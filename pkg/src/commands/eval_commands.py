"""
Evaluation command.
"""
import argparse
from pathlib import Path

from src.config import HISTOGRAM_BINS
from src.evaluation.report import evaluate
from src.manifest import RunManifest


def eval_command(args: argparse.Namespace) -> int:
    """Segment a labeled split with a checkpoint and write the report."""
    settings = {'checkpoint': str(args.checkpoint), 'images': str(args.images),
                'labels': str(args.labels), 'bins': str(args.bins), 'use_norm': str(args.use_norm)}
    RunManifest('eval', settings, 0).write(args.out.with_suffix('.manifest.txt'))
    report = evaluate(args.checkpoint, args.images, args.labels, args.out, args.bins, args.use_norm)
    for cls, iou in enumerate(report.per_class):
        print(f"class {cls}: {'absent' if iou is None else f'{iou:.4f}'}")
    print(f"mIoU: {report.miou:.4f}")
    return 0


def setup_eval_commands(subparsers) -> None:
    """Register the eval command."""
    parser = subparsers.add_parser('eval', help='mIoU and confidence histograms of a checkpoint')
    parser.add_argument('--checkpoint', type=Path, required=True)
    parser.add_argument('--images', type=Path, required=True, help='directory of .ppm images')
    parser.add_argument('--labels', type=Path, required=True, help='directory of .pgm labels')
    parser.add_argument('--out', type=Path, required=True, help='report CSV')
    parser.add_argument('--bins', type=int, default=HISTOGRAM_BINS)
    parser.add_argument('--use-norm', action='store_true',
                        help='histogram the normalised softmax instead of the plain softmax')
    parser.set_defaults(handler=eval_command)
