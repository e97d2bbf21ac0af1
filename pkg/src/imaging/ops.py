"""
Pixel-level primitives: saturation, inversion, min-filtering and luminance.
"""
import numpy as np
from scipy.ndimage import minimum_filter

from src.errors import ValidationError
from src.imaging.types import Image, ScalarMap


def saturation_map(img: Image) -> ScalarMap:
    """
    Per-pixel saturation (max_c - min_c) / max_c.

    Pure black pixels have no chroma and map to 0.

    Args:
        img (Image): Input image

    Returns:
        ScalarMap: Saturation in [0, 1]
    """
    hi = img.max(axis=2)
    lo = img.min(axis=2)
    out = np.zeros_like(hi)
    np.divide(hi - lo, hi, out=out, where=hi > 0)
    return out


def mean_saturation(img: Image) -> float:
    """Mean of the saturation map over all pixels."""
    return float(saturation_map(img).mean())


def invert(img: Image) -> Image:
    """
    Channel-wise 1 - I.

    invert(invert(I)) == I bit for bit when every value is a multiple of
    2**-53, which numpy uniform samples are.
    """
    return 1.0 - img


def min_filter(values: ScalarMap, radius: int) -> ScalarMap:
    """
    Minimum over a (2 * radius + 1)^2 square window, clamping at the border.

    Args:
        values (ScalarMap): Input map
        radius (int): Window radius in pixels, radius >= 0

    Returns:
        ScalarMap: Filtered map, pointwise <= the input
    """
    if radius < 0:
        raise ValidationError(f"radius must be >= 0, got {radius}")
    if radius == 0:
        return values.copy()
    return minimum_filter(values, size=2 * radius + 1, mode='nearest')


def luminance_map(img: Image) -> ScalarMap:
    """Per-pixel (r + g + b) / 3."""
    return img.mean(axis=2)


def mean_luminance(img: Image) -> float:
    """Mean over pixels of (r + g + b) / 3."""
    return float(luminance_map(img).mean())
