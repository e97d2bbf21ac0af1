"""
Ablation and hyperparameter-sensitivity experiments on a generated benchmark.
"""
import csv
import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from src.config import MAX_WORKERS
from src.errors import ConfigError, DataFileError
from src.evaluation.report import evaluate
from src.learning.train_config import AblationMode, TrainConfig, config_from_mapping
from src.learning.trainer import train

logger = logging.getLogger(__name__)

ABLATION_NAME = 'ablation.csv'
ABLATION_SUMMARY_NAME = 'ablation_summary.csv'
SWEEP_NAME = 'sweep.csv'
SWEEP_PARAMS = ('alpha', 'delta', 'gamma')


@dataclass(frozen=True)
class RunScore:
    """Outcome of one train-then-evaluate run."""
    label: str
    seed: int
    miou: float
    overconfident_errors: float


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise DataFileError(f"Cannot write {path}: {exc}") from exc


def _train_and_score(cfg: TrainConfig, label: str, source_dir: Path, target_dir: Path,
                     eval_images: Path, eval_labels: Path, run_dir: Path) -> RunScore:
    result = train(cfg, source_dir, target_dir, run_dir)
    report = evaluate(result.checkpoint, eval_images, eval_labels, run_dir / 'eval.csv')
    logger.info("%s seed %d: mIoU %.4f, overconfident errors %.4f",
                label, cfg.seed, report.miou, report.overconfident_errors)
    return RunScore(label, cfg.seed, report.miou, report.overconfident_errors)


def _run_all(jobs: list[tuple], workers: int | None) -> list[RunScore]:
    """Train and score every job in a process pool; scores come back in job order."""
    if workers == 1 or len(jobs) <= 1:
        return [_train_and_score(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_train_and_score, *zip(*jobs)))


def run_ablation(source_dir: Path, target_dir: Path, eval_images: Path, eval_labels: Path,
                 out_dir: Path, base_config: TrainConfig, seeds: Sequence[int],
                 modes: Sequence[AblationMode] = tuple(AblationMode),
                 workers: int | None = MAX_WORKERS) -> list[RunScore]:
    """
    Train and evaluate every mode for every seed.

    Each run lives in ``out_dir/<mode>/seed<k>``. Writes ``ablation.csv``
    with one row per run and ``ablation_summary.csv`` with per-mode means.

    Args:
        source_dir (Path): Labeled source split
        target_dir (Path): Unlabeled target images used for training
        eval_images (Path): Images to evaluate on
        eval_labels (Path): Their ground truth
        out_dir (Path): Output directory
        base_config (TrainConfig): Settings shared by all runs
        seeds (Sequence[int]): Seeds to average over
        modes (Sequence[AblationMode]): Modes to compare
        workers (int | None): Parallel runs; None uses every CPU, 1 runs inline

    Returns:
        list[RunScore]: One score per (mode, seed), in mode-major order
    """
    out_dir = Path(out_dir)
    jobs = []
    for mode in modes:
        mode = AblationMode(mode)
        for seed in seeds:
            cfg = dataclasses.replace(base_config, ablation=mode, seed=seed)
            jobs.append((cfg, mode.value, source_dir, target_dir, eval_images, eval_labels,
                         out_dir / mode.value / f"seed{seed}"))
    scores = _run_all(jobs, workers)

    _write_csv(out_dir / ABLATION_NAME, ('mode', 'seed', 'miou', 'overconfident_error_fraction'),
               [(s.label, str(s.seed), repr(s.miou), repr(s.overconfident_errors)) for s in scores])
    summary = summarize(scores)
    _write_csv(out_dir / ABLATION_SUMMARY_NAME,
               ('mode', 'runs', 'mean_miou', 'mean_overconfident_error_fraction'),
               [(label, str(n), repr(m), repr(o)) for label, (n, m, o) in summary.items()])
    return scores


def summarize(scores: Sequence[RunScore]) -> dict[str, tuple[int, float, float]]:
    """Run count, mean mIoU and mean overconfident-error fraction per label."""
    grouped: dict[str, list[RunScore]] = {}
    for score in scores:
        grouped.setdefault(score.label, []).append(score)
    return {
        label: (len(runs),
                float(np.mean([r.miou for r in runs])),
                float(np.mean([r.overconfident_errors for r in runs])))
        for label, runs in grouped.items()
    }


def run_sweep(source_dir: Path, target_dir: Path, eval_images: Path, eval_labels: Path,
              out_dir: Path, base_config: TrainConfig, param: str,
              values: Sequence[float], workers: int | None = MAX_WORKERS) -> list[RunScore]:
    """
    Repeat the full method while varying one of alpha, delta or gamma.

    Writes ``sweep.csv`` with columns param, value, miou and
    overconfident_error_fraction.

    Raises:
        ConfigError: If ``param`` cannot be swept or a value is out of range
    """
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"Cannot sweep {param!r}; choose one of {SWEEP_PARAMS}")
    out_dir = Path(out_dir)
    jobs = []
    for value in values:
        cfg = config_from_mapping({param: repr(float(value))}, base_config)
        jobs.append((cfg, f"{param}={float(value)!r}", source_dir, target_dir, eval_images,
                     eval_labels, out_dir / f"{param}_{float(value)!r}"))
    scores = _run_all(jobs, workers)
    _write_csv(out_dir / SWEEP_NAME, ('param', 'value', 'miou', 'overconfident_error_fraction'),
               [(param, repr(float(v)), repr(s.miou), repr(s.overconfident_errors))
                for v, s in zip(values, scores)])
    return scores
