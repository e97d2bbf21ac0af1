"""
Training configuration: hyperparameters, ablation modes and the
key=value configuration file format.
"""
import dataclasses
import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from dotenv.parser import parse_stream

from src.config import (
    DEFAULT_ALPHA,
    DEFAULT_BATCH,
    DEFAULT_DELTA,
    DEFAULT_HIDDEN_DIM,
    DEFAULT_LR,
    DEFAULT_MAX_ITERS,
    DEFAULT_MOMENTUM,
    DEFAULT_PSEUDO_CONFIDENCE,
    DEFAULT_WARMUP_ITERS,
)
from src.errors import ConfigError, DataFileError
from src.learning.losses import LossConfig
from src.validation import check_range
from src.visibility.boost import VbmConfig

logger = logging.getLogger(__name__)


class AblationMode(str, Enum):
    """Which loss terms and modules take part in training."""
    SOURCE_ONLY = 'source-only'
    CE_ST = 'ce-st'
    VBM_CE = 'vbm-ce'
    VBM_LC = 'vbm-lc'
    VBLC = 'vblc'

    @property
    def uses_target(self) -> bool:
        return self is not AblationMode.SOURCE_ONLY

    @property
    def uses_vbm(self) -> bool:
        return self in (AblationMode.VBM_CE, AblationMode.VBM_LC, AblationMode.VBLC)

    @property
    def source_constrained(self) -> bool:
        return self is AblationMode.VBLC

    @property
    def target_constrained(self) -> bool:
        return self in (AblationMode.VBM_LC, AblationMode.VBLC)


PSEUDO_CONFIDENCE_SOURCES = ('softmax', 'normalized')


@dataclass(frozen=True)
class TrainConfig:
    """Self-training hyperparameters with the boost and loss settings."""
    delta: float = DEFAULT_DELTA
    alpha: float = DEFAULT_ALPHA
    max_iters: int = DEFAULT_MAX_ITERS
    warmup_iters: int = DEFAULT_WARMUP_ITERS
    batch: int = DEFAULT_BATCH
    lr: float = DEFAULT_LR
    momentum: float = DEFAULT_MOMENTUM
    seed: int = 0
    hidden_dim: int = DEFAULT_HIDDEN_DIM
    num_classes: int = 5
    ablation: AblationMode = AblationMode.VBLC
    pseudo_confidence: str = DEFAULT_PSEUDO_CONFIDENCE
    vbm: VbmConfig = field(default_factory=VbmConfig)
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        check_range('delta', self.delta, 0.0, 1.0, low_open=True, high_open=True)
        check_range('alpha', self.alpha, 0.0, 1.0)
        check_range('max_iters', self.max_iters, 1)
        check_range('warmup_iters', self.warmup_iters, 0)
        check_range('batch', self.batch, 1)
        check_range('lr', self.lr, 0.0)
        check_range('momentum', self.momentum, 0.0, 1.0, high_open=True)
        check_range('hidden_dim', self.hidden_dim, 1)
        check_range('num_classes', self.num_classes, 2, 255)
        if self.pseudo_confidence not in PSEUDO_CONFIDENCE_SOURCES:
            raise ConfigError(f"pseudo_confidence must be one of {PSEUDO_CONFIDENCE_SOURCES}, "
                              f"got {self.pseudo_confidence!r}")
        object.__setattr__(self, 'ablation', AblationMode(self.ablation))


# Flat file key -> (section, type); section None means TrainConfig itself
_KEYS = {
    'delta': (None, float),
    'alpha': (None, float),
    'max_iters': (None, int),
    'warmup_iters': (None, int),
    'batch': (None, int),
    'lr': (None, float),
    'momentum': (None, float),
    'seed': (None, int),
    'hidden_dim': (None, int),
    'num_classes': (None, int),
    'ablation': (None, AblationMode),
    'pseudo_confidence': (None, str),
    'gamma': ('vbm', float),
    'patch_radius': ('vbm', int),
    'light_sample_count': ('vbm', int),
    'night_luminance_threshold': ('vbm', float),
    't_floor': ('vbm', float),
    'norm_epsilon': ('loss', float),
}


def config_from_mapping(values: dict[str, str], base: TrainConfig | None = None) -> TrainConfig:
    """
    Build a TrainConfig from string values, starting from ``base``.

    Raises:
        ConfigError: On an unknown key or a value of the wrong type or range
    """
    base = base or TrainConfig()
    sections: dict[str | None, dict] = {None: {}, 'vbm': {}, 'loss': {}}
    for key, raw in values.items():
        if key not in _KEYS:
            raise ConfigError(f"Unknown config key: {key}")
        section, kind = _KEYS[key]
        try:
            sections[section][key] = kind(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"Invalid value for {key}: {raw!r}") from exc
    vbm = dataclasses.replace(base.vbm, **sections['vbm'])
    loss = dataclasses.replace(base.loss, **sections['loss'])
    return dataclasses.replace(base, vbm=vbm, loss=loss, **sections[None])


def config_to_mapping(cfg: TrainConfig) -> dict[str, str]:
    """Every key with its resolved value, in file order."""
    out = {}
    for key, (section, _) in _KEYS.items():
        owner = cfg if section is None else getattr(cfg, section)
        value = getattr(owner, key)
        if isinstance(value, Enum):
            value = value.value
        out[key] = repr(value) if isinstance(value, float) else str(value)
    return out


def serialize_config(cfg: TrainConfig) -> str:
    """key=value lines that parse back to ``cfg``."""
    return ''.join(f"{k}={v}\n" for k, v in config_to_mapping(cfg).items())


def parse_config_text(text: str) -> TrainConfig:
    """
    Parse key=value lines; blank lines and '#' comments are skipped.

    Raises:
        ConfigError: Naming the malformed line, unknown key or bad value
    """
    values = {}
    for binding in parse_stream(io.StringIO(text)):
        line = binding.original.line
        if binding.error or (binding.key is not None and binding.value is None):
            raise ConfigError(f"Malformed config line {line}: {binding.original.string.strip()!r}")
        if binding.key is None:
            continue
        if binding.key in values:
            raise ConfigError(f"Duplicate config key {binding.key} on line {line}")
        values[binding.key] = binding.value
    return config_from_mapping(values)


def parse_config(path: Path) -> TrainConfig:
    """Read and parse a configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFileError(f"Cannot read config file {path}: {exc}") from exc
    cfg = parse_config_text(text)
    logger.debug("Parsed config %s", path)
    return cfg
