"""
Argument helpers shared by the command modules.
"""
import argparse
from pathlib import Path

from src.learning.train_config import AblationMode, TrainConfig, config_from_mapping, parse_config


def int_list(text: str) -> list[int]:
    """argparse type for comma-separated integers."""
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def float_list(text: str) -> list[float]:
    """argparse type for comma-separated numbers."""
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def mode_list(text: str) -> list[AblationMode]:
    """argparse type for comma-separated ablation modes."""
    try:
        return [AblationMode(part.strip()) for part in text.split(',') if part.strip()]
    except ValueError as exc:
        choices = ', '.join(m.value for m in AblationMode)
        raise argparse.ArgumentTypeError(f"modes must be among {choices}, got {text!r}") from exc


def add_config_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', type=Path, help='key=value configuration file')


def resolve_config(path: Path | None, **overrides) -> TrainConfig:
    """
    Load ``path`` (or the defaults) and apply the non-None overrides.

    Args:
        path (Path | None): Configuration file, if any
        **overrides: Flat configuration keys set on the command line

    Returns:
        TrainConfig: The fully resolved configuration
    """
    base = parse_config(path) if path is not None else TrainConfig()
    values = {key: str(getattr(value, 'value', value)) for key, value in overrides.items()
              if value is not None}
    return config_from_mapping(values, base) if values else base
