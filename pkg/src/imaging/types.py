"""
Array conventions for images, scalar maps and label maps.

Every value type is a plain numpy array; the aliases below document the
expected shape and the ``validate_*`` helpers enforce the invariants at
module boundaries.
"""
import numpy as np
from numpy.typing import NDArray

from src.errors import ShapeError, ValidationError

# H x W x 3 float64 intensities in [0, 1], channels in r, g, b order
Image = NDArray[np.float64]
# H x W float64
ScalarMap = NDArray[np.float64]
# H x W uint8 class ids; IGNORE_ID marks unlabeled pixels
LabelMap = NDArray[np.uint8]

IGNORE_ID = 255
CHANNELS = 3


def validate_image(img: np.ndarray) -> Image:
    """
    Check that an array is a valid Image and return it as float64.

    Args:
        img (np.ndarray): Candidate H x W x 3 array

    Returns:
        Image: The same values as a float64 array

    Raises:
        ShapeError: If the array is not H x W x 3
        ValidationError: If any value lies outside [0, 1] or is not finite
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != CHANNELS:
        raise ShapeError(f"Image must be H x W x 3, got shape {arr.shape}")
    if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0):
        raise ValidationError("Image values must be finite and lie in [0, 1]")
    return arr


def validate_label_map(labels: np.ndarray, num_classes: int | None = None) -> LabelMap:
    """
    Check that an array is a valid LabelMap.

    Args:
        labels (np.ndarray): Candidate H x W integer array
        num_classes (int | None): If given, every non-ignored id must be below it

    Returns:
        LabelMap: The labels as uint8
    """
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ShapeError(f"LabelMap must be H x W, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValidationError(f"LabelMap must hold integer ids, got {arr.dtype}")
    if arr.size and (arr.min() < 0 or arr.max() > IGNORE_ID):
        raise ValidationError(f"Label ids must lie in [0, {IGNORE_ID}]")
    if num_classes is not None:
        labelled = arr[arr != IGNORE_ID]
        if labelled.size and labelled.max() >= num_classes:
            raise ValidationError(
                f"Label id {int(labelled.max())} out of range for {num_classes} classes")
    return arr.astype(np.uint8, copy=False)


def require_same_size(*arrays: np.ndarray) -> tuple[int, int]:
    """Return the shared (H, W) of the given arrays or raise ShapeError."""
    sizes = {a.shape[:2] for a in arrays}
    if len(sizes) != 1:
        raise ShapeError(f"Spatial sizes disagree: {sorted(sizes)}")
    return sizes.pop()
