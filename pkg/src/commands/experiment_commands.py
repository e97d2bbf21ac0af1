"""
Experiment commands: component ablation and hyperparameter sweeps.
"""
import argparse
from pathlib import Path

from src.commands.options import add_config_option, float_list, int_list, mode_list, resolve_config
from src.experiments import SWEEP_PARAMS, run_ablation, run_sweep, summarize
from src.learning.train_config import AblationMode, config_to_mapping
from src.manifest import MANIFEST_NAME, RunManifest


def _eval_dirs(args: argparse.Namespace) -> tuple[Path, Path]:
    return args.eval_images or args.target, args.labels


def ablate_command(args: argparse.Namespace) -> int:
    """Train every ablation mode over several seeds and compare them."""
    cfg = resolve_config(args.config, max_iters=args.iters, warmup_iters=args.warmup)
    RunManifest('ablate', config_to_mapping(cfg), cfg.seed).write(args.out / MANIFEST_NAME)
    images, labels = _eval_dirs(args)
    scores = run_ablation(args.source, args.target, images, labels, args.out, cfg,
                          args.seeds, args.modes)
    print(f"{'mode':<12} {'runs':>4} {'mIoU':>8} {'overconf':>9}")
    for label, (runs, mean_miou, overconf) in summarize(scores).items():
        print(f"{label:<12} {runs:>4} {mean_miou:>8.4f} {overconf:>9.4f}")
    return 0


def sweep_command(args: argparse.Namespace) -> int:
    """Vary one hyperparameter of the full method."""
    cfg = resolve_config(args.config, seed=args.seed, max_iters=args.iters,
                         warmup_iters=args.warmup)
    RunManifest('sweep', config_to_mapping(cfg), cfg.seed).write(args.out / MANIFEST_NAME)
    images, labels = _eval_dirs(args)
    scores = run_sweep(args.source, args.target, images, labels, args.out, cfg,
                       args.param, args.values)
    for score in scores:
        print(f"{score.label}: mIoU {score.miou:.4f}")
    return 0


def _add_split_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--source', type=Path, required=True, help='labeled source split')
    parser.add_argument('--target', type=Path, required=True, help='unlabeled target images')
    parser.add_argument('--labels', type=Path, required=True, help='target ground truth for scoring')
    parser.add_argument('--eval-images', type=Path, help='images to score (default: --target)')
    parser.add_argument('--out', type=Path, required=True, help='output directory')
    parser.add_argument('--iters', type=int, help='iterations per run')
    parser.add_argument('--warmup', type=int, help='source-only iterations before self-training')
    add_config_option(parser)


def setup_experiment_commands(subparsers) -> None:
    """Register the ablate and sweep commands."""
    ablate = subparsers.add_parser('ablate', help='compare training modes over seeds')
    _add_split_options(ablate)
    ablate.add_argument('--seeds', type=int_list, default=[0, 1, 2], help='e.g. 0,1,2')
    ablate.add_argument('--modes', type=mode_list, default=list(AblationMode),
                        help='e.g. source-only,vblc')
    ablate.set_defaults(handler=ablate_command)

    sweep = subparsers.add_parser('sweep', help='hyperparameter sensitivity of the full method')
    _add_split_options(sweep)
    sweep.add_argument('--param', choices=SWEEP_PARAMS, required=True)
    sweep.add_argument('--values', type=float_list, required=True, help='e.g. 3.0,3.5,4.0')
    sweep.add_argument('--seed', type=int)
    sweep.set_defaults(handler=sweep_command)
