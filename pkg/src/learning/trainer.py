"""
Teacher-student self-training loop.

The first ``warmup_iters`` iterations train on the source alone while the
teacher tracks the student. From then on each iteration updates the EMA
teacher, pseudo-labels the boosted targets with it, mixes source classes
onto both the raw and the boosted target with one shared mask, and takes a
single SGD step on

    L(source) + lambda * L(target mix) + lambda * L(boosted mix)

where lambda is the fraction of confident teacher pixels.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from tqdm import tqdm

from src.config import SHOW_PROGRESS
from src.data.dataset import assert_no_labels, load_source, load_target
from src.errors import DataFileError, ShapeError
from src.imaging.types import Image, LabelMap
from src.learning.losses import LossConfig, image_loss, normalized_confidence, softmax
from src.learning.mixing import classmix, composite
from src.learning.model import (
    FeatureMap,
    ModelParams,
    SgdState,
    backward,
    featurize,
    forward,
    init_params,
    save_checkpoint,
    sgd_step,
)
from src.learning.train_config import TrainConfig, config_to_mapping
from src.manifest import MANIFEST_NAME, RunManifest
from src.validation import check_range
from src.visibility.boost import boost

logger = logging.getLogger(__name__)

METRICS_NAME = 'metrics.csv'
CHECKPOINT_NAME = 'checkpoint.bin'
METRICS_COLUMNS = ('iter', 'loss_src', 'loss_t_mix', 'loss_b_mix', 'lambda')

SourcePair = tuple[Image, LabelMap]


@dataclass
class TrainState:
    """Student, EMA teacher, iteration counter, momentum buffer and RNG."""
    student: ModelParams
    teacher: ModelParams
    iteration: int
    optimizer: SgdState
    rng: np.random.Generator


@dataclass(frozen=True)
class StepMetrics:
    iteration: int
    loss_src: float
    loss_t_mix: float
    loss_b_mix: float
    lam: float

    def as_row(self) -> list[str]:
        return [str(self.iteration), repr(self.loss_src), repr(self.loss_t_mix),
                repr(self.loss_b_mix), repr(self.lam)]


@dataclass
class TrainResult:
    checkpoint: Path
    metrics_csv: Path
    manifest: Path
    metrics: list[StepMetrics] = field(default_factory=list)
    params: ModelParams | None = None


def init_state(cfg: TrainConfig, feature_dim: int | None = None) -> TrainState:
    """Seeded student; the teacher starts as an exact copy."""
    rng = np.random.default_rng(cfg.seed)
    kwargs = {} if feature_dim is None else {'feature_dim': feature_dim}
    student = init_params(cfg.num_classes, cfg.hidden_dim, rng, **kwargs)
    return TrainState(
        student=student,
        teacher=student.copy(),
        iteration=0,
        optimizer=SgdState(student.zeros_like()),
        rng=rng,
    )


def ema_update(teacher: ModelParams, student: ModelParams, alpha: float) -> ModelParams:
    """
    teacher' = alpha * teacher + (1 - alpha) * student, elementwise.

    Each result stays within [min(teacher, student), max(teacher, student)].

    Raises:
        ShapeError: If the two models have different layouts
        ConfigError: If alpha is outside [0, 1]
    """
    check_range('alpha', alpha, 0.0, 1.0)
    if not teacher.same_shape(student):
        raise ShapeError("Teacher and student parameter shapes differ")
    arrays = []
    for t, s in zip(teacher.arrays(), student.arrays()):
        mixed = alpha * t + (1.0 - alpha) * s
        arrays.append(np.clip(mixed, np.minimum(t, s), np.maximum(t, s)))
    return ModelParams(*arrays)


def ema_ratio(iteration: int, alpha: float, warmup_iters: int = 0) -> float:
    """
    EMA ratio used at ``iteration``.

    Zero until the warm-up ends, so the teacher starts self-training as a
    copy of the warmed-up student. Afterwards min(1 - 1 / (m + 1), alpha)
    with m counted from the end of the warm-up: the teacher is the running
    mean of the students until that reaches alpha.
    """
    steps = iteration - warmup_iters
    if steps <= 0:
        return 0.0
    return min(1.0 - 1.0 / (steps + 1), alpha)


def confidence_fraction(probs: np.ndarray, delta: float) -> float:
    """Fraction of pixels whose maximum class probability exceeds delta."""
    return float(np.mean(probs.max(axis=-1) > delta))


def pseudo_label(teacher: ModelParams, img: Image, delta: float, cfg: LossConfig,
                 use_norm: bool = True, feats: FeatureMap | None = None) -> tuple[LabelMap, float]:
    """
    Hard teacher labels for every pixel and the confidence weight lambda.

    With ``use_norm`` a pixel is confident when its largest normalised
    probability p* exceeds delta times the ceiling p* can reach for K
    classes, which makes lambda independent of the logit scale. Otherwise
    the plain softmax maximum is thresholded.

    Args:
        teacher (ModelParams): EMA teacher
        img (Image): Target image, boosted when the mode uses the boost
        delta (float): Confidence threshold in (0, 1)
        cfg (LossConfig): Norm guard for the normalised softmax
        use_norm (bool): Threshold p* relative to its ceiling
        feats (FeatureMap | None): Precomputed ``featurize(img)``

    Returns:
        tuple[LabelMap, float]: Argmax labels and lambda in [0, 1]
    """
    check_range('delta', delta, 0.0, 1.0, low_open=True, high_open=True)
    logits = forward(teacher, featurize(img) if feats is None else feats)
    if use_norm:
        lam = float(np.mean(normalized_confidence(logits, cfg) > delta))
    else:
        lam = confidence_fraction(softmax(logits), delta)
    return logits.argmax(axis=-1).astype(np.uint8), lam


def _term(params: ModelParams, img: Image, labels: LabelMap, weight: float, cfg: TrainConfig,
          constrained: bool, feats: FeatureMap | None = None) -> tuple[float, ModelParams]:
    if feats is None:
        feats = featurize(img)
    loss, grad_logits = image_loss(forward(params, feats), labels, weight, cfg.loss, constrained)
    return loss, backward(params, feats, grad_logits)


def _accumulate(total: ModelParams | None, grad: ModelParams) -> ModelParams:
    if total is None:
        return grad
    return ModelParams(*(a + b for a, b in zip(total.arrays(), grad.arrays())))


def _pick(items: Sequence | None, i: int):
    return None if items is None else items[i]


def train_step(state: TrainState, src_batch: Sequence[SourcePair], tgt_batch: Sequence[Image],
               cfg: TrainConfig, boosted: Sequence[Image] | None = None,
               src_feats: Sequence[FeatureMap] | None = None,
               pseudo_feats: Sequence[FeatureMap] | None = None) -> tuple[TrainState, StepMetrics]:
    """
    One self-training iteration over a batch of (source, target) pairs.

    Before ``cfg.warmup_iters`` only the source term is trained.

    Args:
        state (TrainState): Current state
        src_batch (Sequence[SourcePair]): Labeled source images
        tgt_batch (Sequence[Image]): Unlabeled target images, same length
        cfg (TrainConfig): Hyperparameters and ablation mode
        boosted (Sequence[Image] | None): Precomputed boosts of
            ``tgt_batch``; computed here when omitted
        src_feats (Sequence[FeatureMap] | None): Precomputed features of
            the source images
        pseudo_feats (Sequence[FeatureMap] | None): Precomputed features of
            the images the teacher labels (boosted or raw targets)

    Returns:
        tuple[TrainState, StepMetrics]: Next state and the batch-mean terms
    """
    if len(src_batch) != len(tgt_batch) or not src_batch:
        raise ShapeError(f"Batch needs equal, non-zero source and target counts, "
                         f"got {len(src_batch)} and {len(tgt_batch)}")
    mode = cfg.ablation
    teacher = ema_update(state.teacher, state.student,
                         ema_ratio(state.iteration, cfg.alpha, cfg.warmup_iters))
    self_training = mode.uses_target and state.iteration >= cfg.warmup_iters
    if self_training and mode.uses_vbm and boosted is None:
        boosted = [boost(img, cfg.vbm) for img in tgt_batch]

    student = state.student
    grad = None
    sums = np.zeros(4)
    for i, ((src_img, src_label), tgt_img) in enumerate(zip(src_batch, tgt_batch)):
        loss, g = _term(student, src_img, src_label, 1.0, cfg, mode.source_constrained,
                        _pick(src_feats, i))
        grad = _accumulate(grad, g)
        sums[0] += loss
        if not self_training:
            continue

        labeled_img = boosted[i] if mode.uses_vbm else tgt_img
        labels, lam = pseudo_label(teacher, labeled_img, cfg.delta, cfg.loss,
                                   use_norm=cfg.pseudo_confidence == 'normalized',
                                   feats=_pick(pseudo_feats, i))
        mix = classmix(src_img, src_label, tgt_img, labels, state.rng)
        loss, g = _term(student, mix.mixed_image, mix.mixed_label, lam, cfg, mode.target_constrained)
        grad = _accumulate(grad, g)
        sums[1] += loss
        sums[3] += lam

        if mode.uses_vbm:
            boosted_mix = composite(mix.mask, src_img, boosted[i])
            loss, g = _term(student, boosted_mix, mix.mixed_label, lam, cfg, mode.target_constrained)
            grad = _accumulate(grad, g)
            sums[2] += loss

    n = len(src_batch)
    grad = ModelParams(*(a / n for a in grad.arrays()))
    student, optimizer = sgd_step(student, grad, cfg.lr, cfg.momentum, state.optimizer)
    iteration = state.iteration + 1
    means = sums / n
    metrics = StepMetrics(iteration, float(means[0]), float(means[1]), float(means[2]), float(means[3]))
    return TrainState(student, teacher, iteration, optimizer, state.rng), metrics


def write_metrics(path: Path, metrics: Sequence[StepMetrics]) -> None:
    try:
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(METRICS_COLUMNS)
            writer.writerows(m.as_row() for m in metrics)
    except OSError as exc:
        raise DataFileError(f"Cannot write metrics {path}: {exc}") from exc


def train(config: TrainConfig, source_dir: Path, target_dir: Path, out_dir: Path) -> TrainResult:
    """
    Run ``config.max_iters`` iterations and write the run artifacts.

    Writes ``run_manifest.txt`` before loading any data, then
    ``metrics.csv`` (one row per iteration) and ``checkpoint.bin`` with the
    final student.

    Args:
        config (TrainConfig): Hyperparameters, seed and ablation mode
        source_dir (Path): Directory with ``images/*.ppm`` and ``labels/*.pgm``
        target_dir (Path): Directory with adverse ``*.ppm`` images only
        out_dir (Path): Output directory

    Returns:
        TrainResult: Paths of the written files plus the metrics

    Raises:
        DataFileError: On a missing or corrupt input file, or an empty split
        ValidationError: If the target directory holds label files
    """
    out_dir = Path(out_dir)
    manifest = RunManifest('train', config_to_mapping(config), config.seed).write(out_dir / MANIFEST_NAME)

    assert_no_labels(target_dir)
    sources = load_source(source_dir, config.num_classes)
    targets = load_target(target_dir)
    boosted = [boost(img, config.vbm) for img in targets] if config.ablation.uses_vbm else None
    # Fixed inputs are featurised once; mixed images still are per step
    src_feats = [featurize(img) for img, _ in sources]
    pseudo_feats = None
    if config.ablation.uses_target:
        pseudo_feats = [featurize(img) for img in (boosted or targets)]
    logger.info("Training %s for %d iterations (%d warm-up) on %d source / %d target images",
                config.ablation.value, config.max_iters, config.warmup_iters, len(sources), len(targets))

    if config.ablation.uses_target and config.warmup_iters >= config.max_iters:
        logger.warning("Warm-up of %d iterations covers the whole run; no self-training happens",
                       config.warmup_iters)

    state = init_state(config)
    history: list[StepMetrics] = []
    for _ in tqdm(range(config.max_iters), desc=f"train {config.ablation.value}",
                  disable=not SHOW_PROGRESS):
        src_idx = state.rng.integers(0, len(sources), size=config.batch)
        tgt_idx = state.rng.integers(0, len(targets), size=config.batch)
        state, metrics = train_step(
            state,
            [sources[i] for i in src_idx],
            [targets[i] for i in tgt_idx],
            config,
            boosted=[boosted[i] for i in tgt_idx] if boosted is not None else None,
            src_feats=[src_feats[i] for i in src_idx],
            pseudo_feats=[pseudo_feats[i] for i in tgt_idx] if pseudo_feats is not None else None,
        )
        history.append(metrics)
        logger.debug("iter %d: src=%.4f t_mix=%.4f b_mix=%.4f lambda=%.3f", metrics.iteration,
                     metrics.loss_src, metrics.loss_t_mix, metrics.loss_b_mix, metrics.lam)

    metrics_path = out_dir / METRICS_NAME
    write_metrics(metrics_path, history)
    checkpoint = out_dir / CHECKPOINT_NAME
    save_checkpoint(checkpoint, state.student)
    logger.info("Finished training; final source loss %.4f", history[-1].loss_src)
    return TrainResult(checkpoint, metrics_path, manifest, history, state.student)
