"""
Finite-difference verification of the analytic loss gradients.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.config import GRADCHECK_STEP
from src.learning.losses import LossConfig, ce_loss_grad, lc_loss_grad

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradcheckReport:
    """Worst relative error per loss over all trials."""
    num_classes: int
    trials: int
    max_rel_error_ce: float
    max_rel_error_lc: float

    def passed(self, tolerance: float) -> bool:
        return max(self.max_rel_error_ce, self.max_rel_error_lc) <= tolerance


def central_difference(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                       step: float = GRADCHECK_STEP) -> np.ndarray:
    """
    Centred-difference gradient of a scalar function of a vector.

    ``func`` is called once on a (2n, n) batch of perturbed copies of ``x``
    and must return the (2n,) function values.
    """
    n = x.shape[0]
    offsets = np.eye(n) * step
    batch = np.concatenate([x + offsets, x - offsets])
    values = func(batch)
    return (values[:n] - values[n:]) / (2 * step)


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """||a - n|| / max(||a||, ||n||), with a tiny floor for the zero gradient."""
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


def run_gradcheck(num_classes: int, trials: int, seed: int, cfg: LossConfig | None = None,
                  step: float = GRADCHECK_STEP) -> GradcheckReport:
    """
    Compare analytic and finite-difference gradients on random logits.

    Args:
        num_classes (int): K
        trials (int): Number of random (z, label) pairs
        seed (int): RNG seed
        cfg (LossConfig | None): Loss configuration, defaults if None
        step (float): Finite-difference step

    Returns:
        GradcheckReport: Worst relative errors for both losses
    """
    cfg = cfg or LossConfig()
    rng = np.random.default_rng(seed)
    worst_ce = worst_lc = 0.0
    for _ in range(trials):
        z = rng.normal(scale=3.0, size=num_classes)
        label = int(rng.integers(num_classes))
        batch_labels = np.full(2 * num_classes, label)

        _, grad = ce_loss_grad(z, label)
        numeric = central_difference(lambda b: ce_loss_grad(b, batch_labels)[0], z, step)
        worst_ce = max(worst_ce, relative_error(grad, numeric))

        _, grad = lc_loss_grad(z, label, cfg)
        numeric = central_difference(lambda b: lc_loss_grad(b, batch_labels, cfg)[0], z, step)
        worst_lc = max(worst_lc, relative_error(grad, numeric))

    logger.info("Gradcheck K=%d trials=%d: ce=%.3e lc=%.3e",
                num_classes, trials, worst_ce, worst_lc)
    return GradcheckReport(num_classes, trials, worst_ce, worst_lc)
