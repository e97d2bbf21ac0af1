"""
Per-pixel two-layer segmentation model with hand-written backward pass.

Each pixel is described by 12 handcrafted features; the model maps them to
class logits with W2 . relu(W1 . f + b1) + b2.
"""
import logging
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter

from src.errors import DataFileError, ShapeError
from src.imaging.ops import saturation_map
from src.imaging.types import Image

logger = logging.getLogger(__name__)

# H x W x F float64
FeatureMap = np.ndarray

FEATURE_DIM = 12
CHECKPOINT_MAGIC = b'VBLCCKPT'
CHECKPOINT_VERSION = 1
_HEADER_DTYPE = np.dtype('<u4')
_VALUE_DTYPE = np.dtype('<f8')


@dataclass
class ModelParams:
    """Weights of the two-layer model; gradients reuse the same layout."""
    w1: np.ndarray  # F x D
    b1: np.ndarray  # D
    w2: np.ndarray  # D x K
    b2: np.ndarray  # K

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.w1.shape[0], self.w1.shape[1], self.w2.shape[1]

    @property
    def size(self) -> int:
        return sum(getattr(self, f.name).size for f in fields(self))

    def arrays(self) -> list[np.ndarray]:
        return [getattr(self, f.name) for f in fields(self)]

    def copy(self) -> 'ModelParams':
        return ModelParams(*(a.copy() for a in self.arrays()))

    def zeros_like(self) -> 'ModelParams':
        return ModelParams(*(np.zeros_like(a) for a in self.arrays()))

    def same_shape(self, other: 'ModelParams') -> bool:
        return all(a.shape == b.shape for a, b in zip(self.arrays(), other.arrays()))


# Gradients have the same layout as the parameters
ParamGrad = ModelParams


@dataclass
class SgdState:
    """Momentum buffer for sgd_step."""
    velocity: ModelParams


def init_params(num_classes: int, hidden_dim: int, rng: np.random.Generator,
                feature_dim: int = FEATURE_DIM) -> ModelParams:
    """
    Uniform initialisation in [-1/sqrt(fan_in), 1/sqrt(fan_in)].

    Args:
        num_classes (int): K
        hidden_dim (int): D
        rng (np.random.Generator): Seeded generator
        feature_dim (int): F

    Returns:
        ModelParams: Fresh parameters
    """
    def uniform(fan_in, shape):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    return ModelParams(
        w1=uniform(feature_dim, (feature_dim, hidden_dim)),
        b1=uniform(feature_dim, (hidden_dim,)),
        w2=uniform(hidden_dim, (hidden_dim, num_classes)),
        b2=uniform(hidden_dim, (num_classes,)),
    )


def featurize(img: Image) -> FeatureMap:
    """
    Per-pixel features: r, g, b; x / W, y / H; 3x3 channel means; 3x3
    channel standard deviations; saturation.

    Args:
        img (Image): H x W x 3 image

    Returns:
        FeatureMap: H x W x 12 features
    """
    h, w, _ = img.shape
    ys, xs = np.meshgrid(np.arange(h) / h, np.arange(w) / w, indexing='ij')
    local_mean = uniform_filter(img, size=(3, 3, 1), mode='nearest')
    local_sq = uniform_filter(img * img, size=(3, 3, 1), mode='nearest')
    local_std = np.sqrt(np.maximum(local_sq - local_mean * local_mean, 0.0))
    return np.concatenate([
        img,
        xs[..., np.newaxis],
        ys[..., np.newaxis],
        local_mean,
        local_std,
        saturation_map(img)[..., np.newaxis],
    ], axis=2)


def _check_features(params: ModelParams, feats: FeatureMap) -> None:
    if feats.ndim != 3 or feats.shape[2] != params.w1.shape[0]:
        raise ShapeError(f"Features {feats.shape} do not match F={params.w1.shape[0]}")


def forward(params: ModelParams, feats: FeatureMap) -> np.ndarray:
    """
    Logits W2 . relu(W1 . f + b1) + b2 for every pixel.

    Returns:
        LogitMap: H x W x K logits
    """
    _check_features(params, feats)
    hidden = np.maximum(feats @ params.w1 + params.b1, 0.0)
    return hidden @ params.w2 + params.b2


def backward(params: ModelParams, feats: FeatureMap, grad_logits: np.ndarray) -> ParamGrad:
    """
    Gradient of sum over pixels of <grad_logits, logits> w.r.t. every parameter.

    The relu subgradient at 0 is 0.

    Args:
        params (ModelParams): Parameters used in the forward pass
        feats (FeatureMap): H x W x F features
        grad_logits (np.ndarray): H x W x K upstream gradient

    Returns:
        ParamGrad: Gradients in the parameter layout
    """
    _check_features(params, feats)
    if grad_logits.shape != feats.shape[:2] + (params.w2.shape[1],):
        raise ShapeError(f"Logit gradient {grad_logits.shape} does not match features {feats.shape}")
    f = feats.reshape(-1, feats.shape[2])
    g = grad_logits.reshape(-1, grad_logits.shape[2])
    pre = f @ params.w1 + params.b1
    hidden = np.maximum(pre, 0.0)
    g_pre = (g @ params.w2.T) * (pre > 0)
    return ModelParams(
        w1=f.T @ g_pre,
        b1=g_pre.sum(axis=0),
        w2=hidden.T @ g,
        b2=g.sum(axis=0),
    )


def predict(params: ModelParams, img: Image) -> tuple[np.ndarray, np.ndarray]:
    """Plain argmax segmentation of an image, returned with the H x W x K logits."""
    logits = forward(params, featurize(img))
    return logits.argmax(axis=2).astype(np.uint8), logits


def sgd_step(params: ModelParams, grad: ParamGrad, lr: float, momentum: float,
             state: SgdState) -> tuple[ModelParams, SgdState]:
    """
    Heavy-ball step: v = momentum * v + grad; params -= lr * v.

    Expects lr >= 0 and momentum in [0, 1); TrainConfig enforces both.

    Returns:
        tuple[ModelParams, SgdState]: New parameters and momentum state
    """
    velocity = ModelParams(*(momentum * v + g for v, g in
                             zip(state.velocity.arrays(), grad.arrays())))
    updated = ModelParams(*(p - lr * v for p, v in zip(params.arrays(), velocity.arrays())))
    return updated, SgdState(velocity)


def save_checkpoint(path: Path, params: ModelParams) -> None:
    """
    Write parameters as a versioned little-endian blob.

    Layout: magic, uint32 version, uint32 F, D, K, then float64 values of
    W1, b1, W2, b2 in row-major order.
    """
    header = np.array([CHECKPOINT_VERSION, *params.dims], dtype=_HEADER_DTYPE)
    body = np.concatenate([a.ravel() for a in params.arrays()]).astype(_VALUE_DTYPE)
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(CHECKPOINT_MAGIC + header.tobytes() + body.tobytes())
    except OSError as exc:
        raise DataFileError(f"Cannot write checkpoint {path}: {exc}") from exc
    logger.info("Saved checkpoint %s (F=%d D=%d K=%d)", path, *params.dims)


def load_checkpoint(path: Path) -> ModelParams:
    """Read a checkpoint written by save_checkpoint."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataFileError(f"Cannot read checkpoint {path}: {exc}") from exc
    offset = len(CHECKPOINT_MAGIC)
    header_size = 4 * _HEADER_DTYPE.itemsize
    if data[:offset] != CHECKPOINT_MAGIC or len(data) < offset + header_size:
        raise DataFileError(f"Not a checkpoint file: {path}")
    version, f, d, k = np.frombuffer(data, dtype=_HEADER_DTYPE, count=4, offset=offset)
    if version != CHECKPOINT_VERSION:
        raise DataFileError(f"Unsupported checkpoint version {version}: {path}")
    shapes = [(int(f), int(d)), (int(d),), (int(d), int(k)), (int(k),)]
    count = sum(int(np.prod(s)) for s in shapes)
    if (len(data) - offset - header_size) % _VALUE_DTYPE.itemsize:
        raise DataFileError(f"Truncated checkpoint: {path}")
    values = np.frombuffer(data, dtype=_VALUE_DTYPE, offset=offset + header_size)
    if values.size != count:
        raise DataFileError(f"Checkpoint {path} holds {values.size} values, expected {count}")
    arrays, start = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        arrays.append(values[start:start + size].reshape(shape).astype(np.float64))
        start += size
    return ModelParams(*arrays)
