"""
Range checks for configuration values.
"""
import math

import validators

from src.errors import ConfigError


def check_range(name: str, value: float, low: float | None = None, high: float | None = None,
                *, low_open: bool = False, high_open: bool = False) -> None:
    """
    Raise ConfigError unless ``value`` lies in the given interval.

    Args:
        name (str): Field name used in the diagnostic
        value (float): Value to check
        low (float | None): Lower bound, or None for unbounded
        high (float | None): Upper bound, or None for unbounded
        low_open (bool): Exclude the lower bound
        high_open (bool): Exclude the upper bound
    """
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value}")
    # validators.between refuses mixed int/float operands
    bounds = {}
    if low is not None:
        bounds['min_val'] = float(low)
    if high is not None:
        bounds['max_val'] = float(high)
    if not validators.between(value, **bounds):
        raise ConfigError(f"{name}={value} is outside [{low}, {high}]")
    if (low_open and value == low) or (high_open and value == high):
        left = '(' if low_open else '['
        right = ')' if high_open else ']'
        raise ConfigError(f"{name}={value} is outside {left}{low}, {high}{right}")
