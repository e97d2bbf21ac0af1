"""
Configuration module for the VBLC desk-scale toolkit.
"""
import logging
import os

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Load environment variables from .env file
load_dotenv()

ARTIFACT_VERSION = "1.0.0"

# Runtime configuration
LOG_LEVEL = os.getenv('VBLC_LOG_LEVEL', 'INFO').upper()
SHOW_PROGRESS = os.getenv('VBLC_PROGRESS', '1') != '0'


def parse_max_workers(raw: str | None) -> int | None:
    """Worker count from the environment; None (the executor default) when unset or invalid."""
    if raw is None or not raw.strip():
        return None
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        logger.warning("Ignoring VBLC_MAX_WORKERS=%r; expected a positive integer", raw)
        return None
    return workers


MAX_WORKERS = parse_max_workers(os.getenv('VBLC_MAX_WORKERS'))

# Visibility boost defaults
DEFAULT_GAMMA = 4.0
DEFAULT_PATCH_RADIUS = 7  # 15x15 window
DEFAULT_LIGHT_SAMPLE_COUNT = 1000
DEFAULT_NIGHT_LUMINANCE_THRESHOLD = 0.25
DEFAULT_T_FLOOR = 0.1
ATMOSPHERIC_LIGHT_FLOOR = 1e-3

# Loss defaults
DEFAULT_NORM_EPSILON = 1e-8

# Self-training defaults
DEFAULT_DELTA = 0.9
DEFAULT_ALPHA = 0.999
DEFAULT_MAX_ITERS = 2000
DEFAULT_WARMUP_ITERS = 500
DEFAULT_BATCH = 4
DEFAULT_LR = 0.05
DEFAULT_MOMENTUM = 0.9
DEFAULT_HIDDEN_DIM = 32
DEFAULT_PSEUDO_CONFIDENCE = 'normalized'

# Synthetic benchmark defaults
DEFAULT_SCENE_SIZE = 64
DEFAULT_SOURCE_COUNT = 200
DEFAULT_TARGET_COUNT = 200
DEFAULT_SYNTH_SEED = 7

# Evaluation
HISTOGRAM_BINS = 20
OVERCONFIDENCE_THRESHOLD = 0.95
GRADCHECK_TOLERANCE = 1e-5
GRADCHECK_STEP = 1e-5
