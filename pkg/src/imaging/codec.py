"""
Binary PPM (P6) and PGM (P5) codecs for images and label maps.

Images are quantised to 8 bits as round(v * 255); label maps store the class
id directly with 255 reserved as the ignore sentinel.
"""
import io
import logging
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from src.errors import CodecError, DataFileError, ValidationError
from src.imaging.types import Image, LabelMap, validate_image, validate_label_map

logger = logging.getLogger(__name__)

PPM_MAGIC = b'P6'
PGM_MAGIC = b'P5'


def _encode(arr: np.ndarray) -> bytes:
    buffer = io.BytesIO()
    PILImage.fromarray(arr).save(buffer, format='PPM')
    return buffer.getvalue()


def _decode(data: bytes, magic: bytes, mode: str) -> np.ndarray:
    if data[:2] != magic:
        raise CodecError(f"Expected magic {magic!r}, got {data[:2]!r}")
    try:
        with PILImage.open(io.BytesIO(data), formats=['PPM']) as im:
            if im.mode != mode:
                raise CodecError(f"Expected an 8-bit {mode} payload, got mode {im.mode}")
            # Pillow uses its raw decoder only for maxval 255 and rescales other depths
            if not im.tile or im.tile[0][0] != 'raw':
                raise CodecError("Expected maxval 255")
            im.load()
            return np.asarray(im, dtype=np.uint8).copy()
    except CodecError:
        raise
    except (UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise CodecError(f"Malformed header: {exc}") from exc
    except OSError as exc:
        raise CodecError(f"Truncated or unreadable payload: {exc}") from exc


def encode_image(img: Image) -> bytes:
    """
    Encode an image as a binary PPM.

    Args:
        img (Image): Image with values in [0, 1]

    Returns:
        bytes: P6 byte stream with maxval 255
    """
    img = validate_image(img)
    return _encode(np.rint(img * 255.0).astype(np.uint8))


def decode_image(data: bytes) -> Image:
    """
    Decode a binary PPM into an image with values in [0, 1].

    Raises:
        CodecError: On a malformed header, a maxval other than 255 or a
            truncated payload
    """
    return _decode(data, PPM_MAGIC, 'RGB').astype(np.float64) / 255.0


def encode_labels(labels: LabelMap) -> bytes:
    """Encode a label map as a binary PGM, one byte per class id."""
    return _encode(validate_label_map(labels))


def decode_labels(data: bytes, num_classes: int | None = None) -> LabelMap:
    """
    Decode a binary PGM label map.

    Args:
        data (bytes): P5 byte stream
        num_classes (int | None): If given, ids other than the ignore
            sentinel must be below it

    Raises:
        CodecError: On a malformed stream or out-of-range label id
    """
    labels = _decode(data, PGM_MAGIC, 'L')
    try:
        return validate_label_map(labels, num_classes)
    except ValidationError as exc:
        raise CodecError(str(exc)) from exc


def _read_bytes(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise DataFileError(f"Cannot read {path}: {exc}") from exc


def _write_bytes(path: Path, data: bytes) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(data)
    except OSError as exc:
        raise DataFileError(f"Cannot write {path}: {exc}") from exc


def read_image(path: Path) -> Image:
    """Read a PPM file, naming the file in any failure."""
    try:
        return decode_image(_read_bytes(path))
    except CodecError as exc:
        raise DataFileError(f"Corrupt image file {path}: {exc}") from exc


def write_image(path: Path, img: Image) -> None:
    """Write an image as a PPM file."""
    _write_bytes(path, encode_image(img))
    logger.debug("Wrote image %s", path)


def read_labels(path: Path, num_classes: int | None = None) -> LabelMap:
    """Read a PGM label file, naming the file in any failure."""
    try:
        return decode_labels(_read_bytes(path), num_classes)
    except CodecError as exc:
        raise DataFileError(f"Corrupt label file {path}: {exc}") from exc


def write_labels(path: Path, labels: LabelMap) -> None:
    """Write a label map as a PGM file."""
    _write_bytes(path, encode_labels(labels))
    logger.debug("Wrote labels %s", path)
