"""
Training and gradient-verification commands.
"""
import argparse
import logging
from pathlib import Path

from src.commands.options import add_config_option, resolve_config
from src.config import GRADCHECK_TOLERANCE
from src.learning.gradcheck import run_gradcheck
from src.learning.train_config import AblationMode
from src.learning.trainer import train

logger = logging.getLogger(__name__)


def train_command(args: argparse.Namespace) -> int:
    """Self-train a student and write checkpoint, metrics and manifest."""
    cfg = resolve_config(args.config, ablation=args.ablation, seed=args.seed, max_iters=args.iters,
                         warmup_iters=args.warmup)
    result = train(cfg, args.source, args.target, args.out)
    last = result.metrics[-1]
    print(f"{cfg.ablation.value}: {last.iteration} iterations, loss_src={last.loss_src:.4f} "
          f"lambda={last.lam:.3f}; checkpoint {result.checkpoint}")
    return 0


def gradcheck_command(args: argparse.Namespace) -> int:
    """Compare analytic and finite-difference loss gradients."""
    logger.info("gradcheck classes=%d trials=%d seed=%d tolerance=%g",
                args.classes, args.trials, args.seed, args.tolerance)
    report = run_gradcheck(args.classes, args.trials, args.seed)
    print(f"K={report.num_classes} trials={report.trials}")
    print(f"max relative error (ce): {report.max_rel_error_ce:.3e}")
    print(f"max relative error (lc): {report.max_rel_error_lc:.3e}")
    if not report.passed(args.tolerance):
        print(f"FAILED: tolerance {args.tolerance:g} exceeded")
        return 1
    return 0


def setup_train_commands(subparsers) -> None:
    """
    Register the train and gradcheck commands.

    Args:
        subparsers: The CLI's subparser collection
    """
    parser = subparsers.add_parser('train', help='teacher-student self-training')
    parser.add_argument('--source', type=Path, required=True, help='labeled source split')
    parser.add_argument('--target', type=Path, required=True, help='unlabeled target images')
    parser.add_argument('--out', type=Path, required=True, help='output directory')
    parser.add_argument('--ablation', choices=[m.value for m in AblationMode])
    parser.add_argument('--seed', type=int)
    parser.add_argument('--iters', type=int, help='number of iterations')
    parser.add_argument('--warmup', type=int, help='source-only iterations before self-training')
    add_config_option(parser)
    parser.set_defaults(handler=train_command)

    check = subparsers.add_parser('gradcheck', help='verify loss gradients numerically')
    check.add_argument('--classes', type=int, default=5)
    check.add_argument('--trials', type=int, default=1000)
    check.add_argument('--seed', type=int, default=0)
    check.add_argument('--tolerance', type=float, default=GRADCHECK_TOLERANCE)
    check.set_defaults(handler=gradcheck_command)
