"""
Loading image and label splits from disk.
"""
import logging
from pathlib import Path

from src.errors import DataFileError, ValidationError
from src.imaging.codec import read_image, read_labels
from src.imaging.types import Image, LabelMap, require_same_size

logger = logging.getLogger(__name__)


def image_dir(root: Path) -> Path:
    """``root/images`` when it exists, otherwise ``root`` itself."""
    root = Path(root)
    nested = root / 'images'
    return nested if nested.is_dir() else root


def list_images(root: Path) -> list[Path]:
    """
    Sorted PPM files of a split. A single .ppm file is its own one-image split.

    Raises:
        DataFileError: If the directory is missing or holds no images
    """
    if Path(root).is_file() and Path(root).suffix == '.ppm':
        return [Path(root)]
    folder = image_dir(root)
    if not folder.is_dir():
        raise DataFileError(f"Image directory not found: {folder}")
    paths = sorted(folder.glob('*.ppm'))
    if not paths:
        raise DataFileError(f"No .ppm images in {folder}")
    return paths


def label_path(label_dir: Path, image_path: Path) -> Path:
    return Path(label_dir) / f"{image_path.stem}.pgm"


def load_pairs(images: Path, labels: Path, num_classes: int | None = None) -> list[tuple[Image, LabelMap]]:
    """
    Images with the label map of the same stem.

    Raises:
        DataFileError: Naming the first missing or corrupt file
    """
    pairs = []
    for path in list_images(images):
        lpath = label_path(labels, path)
        if not lpath.is_file():
            raise DataFileError(f"Missing label file for {path.name}: {lpath}")
        img, lbl = read_image(path), read_labels(lpath, num_classes)
        try:
            require_same_size(img, lbl)
        except ValidationError as exc:
            raise DataFileError(f"Label file {lpath} does not match image {path}: {exc}") from exc
        pairs.append((img, lbl))
    logger.debug("Loaded %d labeled images from %s", len(pairs), images)
    return pairs


def load_source(source_dir: Path, num_classes: int | None = None) -> list[tuple[Image, LabelMap]]:
    """Labeled split laid out as ``images/*.ppm`` and ``labels/*.pgm``."""
    return load_pairs(source_dir, Path(source_dir) / 'labels', num_classes)


def load_target(target_dir: Path) -> list[Image]:
    """Unlabeled images of a split."""
    images = [read_image(p) for p in list_images(target_dir)]
    logger.debug("Loaded %d target images from %s", len(images), target_dir)
    return images


def assert_no_labels(target_dir: Path) -> None:
    """
    Refuse a target directory that carries label files.

    Raises:
        ValidationError: If any ``*.pgm`` lies under ``target_dir``
    """
    found = sorted(Path(target_dir).rglob('*.pgm'))
    if found:
        raise ValidationError(f"Target directory {target_dir} contains label files, e.g. {found[0]}")
