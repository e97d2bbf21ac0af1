"""
Visibility boost: saturation-modulated dark-channel dehazing with an
inverse switch for low-light inputs.

The scatter model I = J * t + A * (1 - t) is inverted with a transmission
map whose strength is scaled by omega_s = exp(-mean_saturation * gamma).
Dark images are inverted first, dehazed, and inverted back.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.config import (
    ATMOSPHERIC_LIGHT_FLOOR,
    DEFAULT_GAMMA,
    DEFAULT_LIGHT_SAMPLE_COUNT,
    DEFAULT_NIGHT_LUMINANCE_THRESHOLD,
    DEFAULT_PATCH_RADIUS,
    DEFAULT_T_FLOOR,
)
from src.errors import ShapeError
from src.imaging.ops import invert, luminance_map, mean_luminance, mean_saturation, min_filter
from src.imaging.types import Image, ScalarMap
from src.validation import check_range

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VbmConfig:
    """Parameters of the visibility boost."""
    gamma: float = DEFAULT_GAMMA
    patch_radius: int = DEFAULT_PATCH_RADIUS
    light_sample_count: int = DEFAULT_LIGHT_SAMPLE_COUNT
    night_luminance_threshold: float = DEFAULT_NIGHT_LUMINANCE_THRESHOLD
    t_floor: float = DEFAULT_T_FLOOR

    def __post_init__(self):
        check_range('gamma', self.gamma, 0.0, low_open=True)
        check_range('patch_radius', self.patch_radius, 0)
        check_range('light_sample_count', self.light_sample_count, 1)
        check_range('night_luminance_threshold', self.night_luminance_threshold, 0.0, 1.0)
        check_range('t_floor', self.t_floor, 0.0, 1.0, low_open=True, high_open=True)


@dataclass(frozen=True)
class AtmosphericLight:
    """Global per-channel airlight A, every channel > 0."""
    r: float
    g: float
    b: float

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)


@dataclass(frozen=True)
class BoostResult:
    """Boosted image plus the statistics reported per image."""
    image: Image
    night: bool
    mean_sat_before: float
    mean_sat_after: float
    omega_s: float
    light: AtmosphericLight


def estimate_atmospheric_light(img: Image, cfg: VbmConfig) -> AtmosphericLight:
    """
    Average the brightest pixels per channel.

    Pixels are ranked by (r + g + b) / 3, descending; ties keep row-major
    order. Each channel is floored so later divisions stay finite.

    Args:
        img (Image): Input image
        cfg (VbmConfig): Supplies light_sample_count

    Returns:
        AtmosphericLight: The estimated airlight
    """
    pixels = img.reshape(-1, 3)
    count = min(cfg.light_sample_count, pixels.shape[0])
    order = np.argsort(-luminance_map(img).ravel(), kind='stable')
    light = pixels[order[:count]].mean(axis=0)
    light = np.maximum(light, ATMOSPHERIC_LIGHT_FLOOR)
    return AtmosphericLight(*(float(c) for c in light))


def omega_s(mean_sat: float, gamma: float) -> float:
    """Saturation-adaptive modulation coefficient exp(-mean_sat * gamma)."""
    return math.exp(-mean_sat * gamma)


def dark_channel(img: Image, a: AtmosphericLight, cfg: VbmConfig) -> ScalarMap:
    """
    Windowed minimum of I^c / A^c over channels, clamped to [0, 1].

    Args:
        img (Image): Input image
        a (AtmosphericLight): Airlight, every channel > 0
        cfg (VbmConfig): Supplies patch_radius

    Returns:
        ScalarMap: Dark channel of the normalised image
    """
    ratio = (img / a.as_array()).min(axis=2)
    return np.clip(min_filter(ratio, cfg.patch_radius), 0.0, 1.0)


def transmission(dark: ScalarMap, w: float, cfg: VbmConfig) -> ScalarMap:
    """Modulated transmission max(1 - w * dark, t_floor)."""
    return np.maximum(1.0 - w * dark, cfg.t_floor)


def recover(img: Image, t: ScalarMap, a: AtmosphericLight, clip: bool = True) -> Image:
    """
    Solve I = J * t + A * (1 - t) for J.

    Args:
        img (Image): Observed image
        t (ScalarMap): Transmission, strictly positive
        a (AtmosphericLight): Airlight
        clip (bool): Clamp the result to [0, 1]

    Returns:
        Image: Recovered scene radiance
    """
    if t.shape != img.shape[:2]:
        raise ShapeError(f"Transmission {t.shape} does not match image {img.shape[:2]}")
    light = a.as_array()
    tt = t[..., np.newaxis]
    scene = (img - light * (1.0 - tt)) / tt
    return np.clip(scene, 0.0, 1.0) if clip else scene


def _dehaze(work: Image, cfg: VbmConfig) -> tuple[Image, float, AtmosphericLight]:
    w = omega_s(mean_saturation(work), cfg.gamma)
    light = estimate_atmospheric_light(work, cfg)
    t = transmission(dark_channel(work, light, cfg), w, cfg)
    return recover(work, t, light), w, light


def boost_with_stats(img: Image, cfg: VbmConfig) -> BoostResult:
    """
    Run the visibility boost and report the per-image statistics.

    Images whose mean luminance is below the night threshold are inverted,
    dehazed and inverted back; saturation and airlight are measured on the
    image actually dehazed.

    Args:
        img (Image): Adverse-condition image
        cfg (VbmConfig): Boost parameters

    Returns:
        BoostResult: Enhanced image with night flag, saturation before and
            after, omega_s and the airlight used
    """
    night = mean_luminance(img) < cfg.night_luminance_threshold
    work = invert(img) if night else img
    enhanced, w, light = _dehaze(work, cfg)
    if night:
        enhanced = invert(enhanced)
    result = BoostResult(
        image=enhanced,
        night=night,
        mean_sat_before=mean_saturation(img),
        mean_sat_after=mean_saturation(enhanced),
        omega_s=w,
        light=light,
    )
    logger.debug("Boost: night=%s omega_s=%.4f sat %.4f -> %.4f",
                 night, w, result.mean_sat_before, result.mean_sat_after)
    return result


def boost(img: Image, cfg: VbmConfig) -> Image:
    """Visibility-boosted copy of ``img``; output values lie in [0, 1]."""
    return boost_with_stats(img, cfg).image


def boost_core(img: Image, cfg: VbmConfig) -> Image:
    """Dehaze without the inverse switch."""
    return _dehaze(img, cfg)[0]
