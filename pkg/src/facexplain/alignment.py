"""Landmark-based face alignment onto the canonical 112x112 crop.

The canonical five-point template is the de-facto coordinate set used by
112x112 embedding models (left eye, right eye, nose tip, left and right
mouth corner).  Alignment estimates the least-squares similarity transform
(rotation + uniform scale + translation, reflection excluded) that maps
detected landmarks onto this template, then resamples the image with it.
"""

from __future__ import annotations

import json

import numpy as np
from scipy import ndimage

from .errors import DegenerateLandmarks

ALIGNED_SIZE = 112

# (x, y) per landmark: left eye, right eye, nose tip, left mouth, right mouth.
CANONICAL_TEMPLATE = np.array(
    [
        [38.2946, 51.6963],
        [73.5318, 51.5014],
        [56.0252, 71.7366],
        [41.5493, 92.3655],
        [70.7299, 92.2041],
    ],
    dtype=np.float64,
)

LANDMARK_NAMES = ("left_eye", "right_eye", "nose", "left_mouth", "right_mouth")


def canonical_template_json() -> str:
    """The template as JSON, for adapter authors targeting the same crop."""
    payload = {
        "size": ALIGNED_SIZE,
        "points": {name: list(pt) for name, pt in zip(LANDMARK_NAMES, CANONICAL_TEMPLATE.tolist())},
        "order": list(LANDMARK_NAMES),
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def ensure_not_collinear(points: np.ndarray) -> None:
    centered = np.asarray(points, float) - np.asarray(points, float).mean(axis=0)
    # Rank < 2 means the constellation lies on a line (or a single point).
    if np.linalg.matrix_rank(centered, tol=1e-8) < 2:
        raise DegenerateLandmarks("landmarks are collinear or coincident")


def estimate_similarity(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Least-squares similarity transform mapping src points onto dst.

    Solves for the 2x3 matrix [[a, -b, tx], [b, a, ty]], which parameterizes
    rotation and uniform scale without reflection.  Unique closed-form
    solution of the normal equations; src must not be collinear.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ValueError("expected matching (N, 2) point arrays")
    ensure_not_collinear(src)

    n = src.shape[0]
    design = np.zeros((2 * n, 4))
    design[0::2, 0] = src[:, 0]
    design[0::2, 1] = -src[:, 1]
    design[0::2, 2] = 1.0
    design[1::2, 0] = src[:, 1]
    design[1::2, 1] = src[:, 0]
    design[1::2, 3] = 1.0
    rhs = dst.reshape(-1)

    (a, b, tx, ty), *_ = np.linalg.lstsq(design, rhs, rcond=None)
    if a * a + b * b < 1e-24:
        raise DegenerateLandmarks("similarity transform collapsed to zero scale")
    return np.array([[a, -b, tx], [b, a, ty]], dtype=np.float64)


def transform_points(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    return points @ matrix[:, :2].T + matrix[:, 2]


def transform_scale(matrix: np.ndarray) -> float:
    """Uniform scale factor of the 2x3 similarity matrix."""
    a, b = matrix[0, 0], matrix[1, 0]
    return float(np.hypot(a, b))


def residual_rms(matrix: np.ndarray, src: np.ndarray, dst: np.ndarray) -> float:
    mapped = transform_points(matrix, src)
    return float(np.sqrt(np.mean(np.sum((mapped - np.asarray(dst, float)) ** 2, axis=1))))


def warp_image(pixels: np.ndarray, matrix: np.ndarray, out_size: int = ALIGNED_SIZE) -> np.ndarray:
    """Resample a HxWx3 uint8 image under the source->aligned transform.

    Bilinear interpolation; pixels mapping outside the source are black.
    """
    linear = matrix[:, :2]
    offset = matrix[:, 2]
    inv_linear = np.linalg.inv(linear)
    inv_offset = -inv_linear @ offset

    # scipy indexes (row, col) = (y, x); swap axes of the (x, y) transform.
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    m_yx = swap @ inv_linear @ swap
    off_yx = inv_offset[::-1]

    src = np.asarray(pixels, dtype=np.float64)
    out = np.empty((out_size, out_size, src.shape[2]), dtype=np.float64)
    for c in range(src.shape[2]):
        out[:, :, c] = ndimage.affine_transform(
            src[:, :, c], m_yx, offset=off_yx, output_shape=(out_size, out_size), order=1,
            mode="constant", cval=0.0,
        )
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)
