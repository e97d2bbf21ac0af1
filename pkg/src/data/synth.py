"""
Synthetic normal-to-adverse segmentation benchmark.

Clean scenes are jittered colored shapes over a background with a smooth
synthetic depth map. Adverse variants follow the scatter model: fog is
I = J * t + A * (1 - t) with t = exp(-beta * d), and low light is the same
model applied in inverted space.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from tqdm import tqdm

from src.config import DEFAULT_SCENE_SIZE, SHOW_PROGRESS
from src.errors import DataFileError
from src.imaging.codec import write_image, write_labels
from src.imaging.ops import invert
from src.imaging.types import Image, LabelMap, ScalarMap
from src.validation import check_range
from src.visibility.boost import AtmosphericLight

logger = logging.getLogger(__name__)

CLASS_NAMES = ('background', 'circle', 'rectangle', 'triangle', 'stripe')

# Every base color keeps one channel low so clean scenes have a dark channel
BASE_PALETTE = (
    (0.35, 0.45, 0.25),
    (0.85, 0.20, 0.15),
    (0.15, 0.35, 0.80),
    (0.90, 0.75, 0.10),
    (0.60, 0.20, 0.70),
)

MANIFEST_COLUMNS = ('file', 'split', 'condition', 'beta', 'light_r', 'light_g', 'light_b')

FOG_BETA_RANGE = (0.5, 3.0)
FOG_LIGHT_RANGE = (0.8, 1.0)
NIGHT_BETA_RANGE = (4.0, 6.0)
NIGHT_LIGHT_RANGE = (0.9, 1.0)
LIGHT_TINT = 0.02


@dataclass(frozen=True)
class SceneSpec:
    """Canvas size, class set, shape count range and palette."""
    height: int = DEFAULT_SCENE_SIZE
    width: int = DEFAULT_SCENE_SIZE
    num_classes: int = len(CLASS_NAMES)
    min_shapes: int = 3
    max_shapes: int = 6
    palette: tuple[tuple[float, float, float], ...] = BASE_PALETTE
    color_jitter: float = 0.08
    pixel_noise: float = 0.02

    def __post_init__(self):
        check_range('height', self.height, 8)
        check_range('width', self.width, 8)
        check_range('num_classes', self.num_classes, 2, len(self.palette))
        check_range('min_shapes', self.min_shapes, 0)
        check_range('max_shapes', self.max_shapes, self.min_shapes)


@dataclass(frozen=True)
class FogParams:
    """Scattering coefficient per unit depth and airlight."""
    beta: float
    light: AtmosphericLight

    def __post_init__(self):
        check_range('beta', self.beta, 0.0, low_open=True)


@dataclass(frozen=True)
class NightParams:
    """Veil applied in inverted space."""
    veil_beta: float
    dark_light: AtmosphericLight

    def __post_init__(self):
        check_range('veil_beta', self.veil_beta, 0.0, low_open=True)


@dataclass(frozen=True)
class ManifestRow:
    file: str
    split: str
    condition: str
    beta: float | None = None
    light: AtmosphericLight | None = None

    def as_row(self) -> list[str]:
        light = [repr(c) for c in (self.light.r, self.light.g, self.light.b)] if self.light else ['', '', '']
        return [self.file, self.split, self.condition,
                '' if self.beta is None else repr(self.beta), *light]


def _shape_mask(kind: int, spec: SceneSpec, rng: np.random.Generator,
                ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    h, w = spec.height, spec.width
    size = min(h, w)
    if kind == 1:  # circle
        r = rng.uniform(0.08, 0.2) * size
        cy, cx = rng.uniform(r, h - r), rng.uniform(r, w - r)
        return (ys - cy) ** 2 + (xs - cx) ** 2 <= r * r
    if kind == 2:  # rectangle
        rh, rw = rng.uniform(0.15, 0.4) * h, rng.uniform(0.15, 0.4) * w
        y0, x0 = rng.uniform(0, h - rh), rng.uniform(0, w - rw)
        return (ys >= y0) & (ys < y0 + rh) & (xs >= x0) & (xs < x0 + rw)
    if kind == 3:  # triangle, apex up
        th, half = rng.uniform(0.2, 0.4) * h, rng.uniform(0.1, 0.2) * w
        y0, cx = rng.uniform(0, h - th), rng.uniform(half, w - half)
        depth_in = (ys - y0) / th
        return (depth_in >= 0) & (depth_in <= 1) & (np.abs(xs - cx) <= half * depth_in)
    # stripe: tilted band across the full width
    half = rng.uniform(1.5, 3.0)
    slope = rng.uniform(-0.3, 0.3)
    y0 = rng.uniform(0.2, 0.8) * h
    return np.abs(ys - (y0 + slope * (xs - w / 2))) <= half


def gen_scene(spec: SceneSpec, rng: np.random.Generator) -> tuple[Image, LabelMap, ScalarMap]:
    """
    Render one clean scene.

    Args:
        spec (SceneSpec): Scene parameters
        rng (np.random.Generator): Source of all randomness for this scene

    Returns:
        tuple[Image, LabelMap, ScalarMap]: Clean image, exact labels and
            depth in [0, 1]
    """
    h, w = spec.height, spec.width
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64),
                         indexing='ij')
    colors = np.clip(np.asarray(spec.palette[:spec.num_classes])
                     + rng.uniform(-spec.color_jitter, spec.color_jitter,
                                   size=(spec.num_classes, 3)), 0.0, 1.0)

    far, near = rng.uniform(0.7, 1.0), rng.uniform(0.0, 0.2)
    depth = far + (near - far) * ys / max(h - 1, 1)

    labels = np.zeros((h, w), dtype=np.uint8)
    for _ in range(int(rng.integers(spec.min_shapes, spec.max_shapes + 1))):
        kind = int(rng.integers(1, spec.num_classes))
        mask = _shape_mask(kind, spec, rng, ys, xs)
        labels[mask] = kind
        depth[mask] += rng.uniform(-0.1, 0.1)

    clean = colors[labels] + rng.normal(0.0, spec.pixel_noise, size=(h, w, 3))
    return np.clip(clean, 0.0, 1.0), labels, np.clip(depth, 0.0, 1.0)


def _sample_light(rng: np.random.Generator, low: float, high: float) -> AtmosphericLight:
    level = rng.uniform(low, high)
    tint = rng.uniform(-LIGHT_TINT, LIGHT_TINT, size=3)
    return AtmosphericLight(*(float(c) for c in np.clip(level + tint, low, high)))


def sample_fog_params(rng: np.random.Generator) -> FogParams:
    """Fog with beta in [0.5, 3.0] and near-white airlight."""
    return FogParams(float(rng.uniform(*FOG_BETA_RANGE)), _sample_light(rng, *FOG_LIGHT_RANGE))


def sample_night_params(rng: np.random.Generator) -> NightParams:
    """Low light with a dense inverted-space veil."""
    return NightParams(float(rng.uniform(*NIGHT_BETA_RANGE)), _sample_light(rng, *NIGHT_LIGHT_RANGE))


def apply_fog(clean: Image, depth: ScalarMap, p: FogParams) -> Image:
    """I = J * t + A * (1 - t) with t = exp(-beta * d), clamped to [0, 1]."""
    t = np.exp(-p.beta * depth)[..., np.newaxis]
    return np.clip(clean * t + p.light.as_array() * (1.0 - t), 0.0, 1.0)


def apply_lowlight(clean: Image, depth: ScalarMap, p: NightParams) -> Image:
    """1 - fog(1 - J) with the veil parameters, clamped to [0, 1]."""
    veil = FogParams(p.veil_beta, p.dark_light)
    return np.clip(invert(apply_fog(invert(clean), depth, veil)), 0.0, 1.0)


def scene_rng(seed: int, split: str, index: int) -> np.random.Generator:
    """Per-scene generator derived from (seed, split, index)."""
    return np.random.default_rng([seed, 0 if split == 'source' else 1, index])


def gen_dataset(spec: SceneSpec, source_count: int, target_count: int, out_dir: Path,
                seed: int) -> list[ManifestRow]:
    """
    Write the source and target splits plus a manifest CSV.

    Layout under ``out_dir``: ``source/images`` and ``source/labels`` hold
    clean pairs; ``target/images`` holds adverse images (even indices fog,
    odd indices low light); ``target_eval/labels`` holds their labels,
    which training never reads; ``manifest.csv`` lists every file.

    Args:
        spec (SceneSpec): Scene parameters
        source_count (int): Number of labeled clean scenes
        target_count (int): Number of adverse scenes
        out_dir (Path): Output directory
        seed (int): Global seed; scene seeds derive from (seed, split, index)

    Returns:
        list[ManifestRow]: One row per written file
    """
    check_range('source_count', source_count, 0)
    check_range('target_count', target_count, 0)
    out_dir = Path(out_dir)
    rows: list[ManifestRow] = []
    digits = max(4, len(str(max(source_count, target_count))))

    for i in tqdm(range(source_count), desc='source', disable=not SHOW_PROGRESS):
        clean, labels, _ = gen_scene(spec, scene_rng(seed, 'source', i))
        name = f"src_{i:0{digits}d}"
        write_image(out_dir / 'source' / 'images' / f"{name}.ppm", clean)
        write_labels(out_dir / 'source' / 'labels' / f"{name}.pgm", labels)
        rows.append(ManifestRow(f"source/images/{name}.ppm", 'source', 'clear'))
        rows.append(ManifestRow(f"source/labels/{name}.pgm", 'source', 'clear'))

    for i in tqdm(range(target_count), desc='target', disable=not SHOW_PROGRESS):
        rng = scene_rng(seed, 'target', i)
        clean, labels, depth = gen_scene(spec, rng)
        if i % 2 == 0:
            fog = sample_fog_params(rng)
            adverse, condition, beta, light = apply_fog(clean, depth, fog), 'fog', fog.beta, fog.light
        else:
            night = sample_night_params(rng)
            adverse, condition = apply_lowlight(clean, depth, night), 'night'
            beta, light = night.veil_beta, night.dark_light
        name = f"tgt_{i:0{digits}d}"
        write_image(out_dir / 'target' / 'images' / f"{name}.ppm", adverse)
        write_labels(out_dir / 'target_eval' / 'labels' / f"{name}.pgm", labels)
        rows.append(ManifestRow(f"target/images/{name}.ppm", 'target', condition, beta, light))
        rows.append(ManifestRow(f"target_eval/labels/{name}.pgm", 'target_eval', condition, beta, light))

    write_dataset_manifest(out_dir / 'manifest.csv', rows)
    logger.info("Generated %d source and %d target scenes in %s", source_count, target_count, out_dir)
    return rows


def write_dataset_manifest(path: Path, rows: list[ManifestRow]) -> None:
    """Write the file listing with condition tags and degradation parameters."""
    try:
        with open(path, 'w', newline='') as fh:
            writer = csv.writer(fh, lineterminator='\n')
            writer.writerow(MANIFEST_COLUMNS)
            writer.writerows(row.as_row() for row in rows)
    except OSError as exc:
        raise DataFileError(f"Cannot write dataset manifest {path}: {exc}") from exc
