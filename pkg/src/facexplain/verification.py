"""Face verification core: align, embed, compare, decide."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from . import alignment
from .alignment import ALIGNED_SIZE, CANONICAL_TEMPLATE
from .backends import EmbeddingBackend, FaceDetectorBackend
from .errors import (
    BackendFailure,
    DimensionMismatch,
    FaceXplainError,
    NoFaceFound,
    ZeroNorm,
)

MATCH = "match"
NON_MATCH = "non-match"


@dataclass(frozen=True)
class FaceImage:
    """Raw HxWx3 8-bit input image plus an opaque source identifier."""

    pixels: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("FaceImage requires an HxWx3 raster")
        if px.dtype != np.uint8:
            raise ValueError("FaceImage pixels must be uint8")
        object.__setattr__(self, "pixels", px)


@dataclass(frozen=True)
class Landmarks5:
    """Five (x, y) points: eyes, nose tip, mouth corners, in pixel units."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (5, 2):
            raise ValueError("expected exactly 5 (x, y) landmarks")
        if not np.all(np.isfinite(pts)):
            raise ValueError("landmarks must be finite")
        object.__setattr__(self, "points", pts)

    def check_in_bounds(self, width: float, height: float) -> None:
        pts = self.points
        if np.any(pts[:, 0] < 0) or np.any(pts[:, 0] > width) or np.any(pts[:, 1] < 0) or np.any(pts[:, 1] > height):
            raise ValueError("landmarks fall outside the image bounds")


@dataclass(frozen=True)
class AlignedFace:
    """112x112x3 aligned crop, its landmarks in aligned coordinates, and the
    source->aligned 2x3 similarity matrix that produced it."""

    pixels: np.ndarray
    landmarks: Landmarks5
    transform: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.shape != (ALIGNED_SIZE, ALIGNED_SIZE, 3) or px.dtype != np.uint8:
            raise ValueError("AlignedFace raster must be 112x112x3 uint8")
        tf = np.asarray(self.transform, dtype=np.float64)
        if tf.shape != (2, 3):
            raise ValueError("transform must be 2x3")
        if np.linalg.det(tf[:, :2]) <= 0:
            raise ValueError("transform must not reflect")
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "transform", tf)


@dataclass(frozen=True)
class Embedding:
    vector: np.ndarray
    backend_id: str

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.ndim != 1:
            raise ValueError("embedding vector must be 1-D")
        if not np.all(np.isfinite(vec)):
            raise ValueError("embedding vector must be finite")
        if np.linalg.norm(vec) == 0:
            raise ZeroNorm("embedding has zero norm")
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class VerificationRecord:
    """Outcome of one pair comparison; ``pic`` is 0 until calibrated."""

    score: float
    threshold: float
    decision: str
    pic: float = 0.0
    pair_id: str = ""

    def __post_init__(self):
        if self.decision not in (MATCH, NON_MATCH):
            raise ValueError(f"decision must be {MATCH!r} or {NON_MATCH!r}")
        if (self.decision == MATCH) != (self.score >= self.threshold):
            raise ValueError("decision inconsistent with score/threshold")
        if not 0.0 <= self.pic <= 1.0:
            raise ValueError("pic must be in [0, 1]")


def detect_and_align(img: FaceImage, detector: FaceDetectorBackend) -> AlignedFace:
    """Detect the largest face and warp it onto the canonical 112x112 crop."""
    lock = _serialize_if_needed(detector)
    try:
        if lock is None:
            detections = detector.detect(img.pixels)
        else:
            with lock:
                detections = detector.detect(img.pixels)
    except FaceXplainError:
        raise
    except Exception as exc:
        raise BackendFailure(f"detector {detector.name!r} failed") from exc
    if not detections:
        raise NoFaceFound(image=img.source_id or None)

    best = max(detections, key=lambda d: d.area)
    h, w = img.pixels.shape[:2]
    src = Landmarks5(best.landmarks)
    src.check_in_bounds(w, h)

    matrix = alignment.estimate_similarity(src.points, CANONICAL_TEMPLATE)
    aligned_pts = alignment.transform_points(matrix, src.points)
    aligned_pts = np.clip(aligned_pts, 0.0, ALIGNED_SIZE)
    pixels = alignment.warp_image(img.pixels, matrix)
    return AlignedFace(pixels=pixels, landmarks=Landmarks5(aligned_pts), transform=matrix)


_BACKEND_LOCKS: dict[int, threading.Lock] = {}
_BACKEND_LOCKS_GUARD = threading.Lock()


def _serialize_if_needed(backend) -> threading.Lock | None:
    """Backends that do not declare concurrent safety are called under a lock."""
    if getattr(backend, "concurrent_safe", False):
        return None
    with _BACKEND_LOCKS_GUARD:
        return _BACKEND_LOCKS.setdefault(id(backend), threading.Lock())


def embed(face: AlignedFace, backend: EmbeddingBackend) -> Embedding:
    lock = _serialize_if_needed(backend)
    try:
        if lock is None:
            vector = backend.embed(face.pixels)
        else:
            with lock:
                vector = backend.embed(face.pixels)
    except Exception as exc:
        raise BackendFailure(f"embedder {backend.name!r} failed") from exc
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (backend.dim,):
        raise BackendFailure(
            f"embedder {backend.name!r} returned shape {vector.shape}, declared dim {backend.dim}"
        )
    return Embedding(vector=vector, backend_id=backend.name)


def cosine_similarity(a: Embedding, b: Embedding) -> float:
    va, vb = a.vector, b.vector
    if va.shape != vb.shape:
        raise DimensionMismatch(f"{va.shape} vs {vb.shape}")
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise ZeroNorm("cosine similarity undefined for zero-norm vectors")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


def decide(score: float, threshold: float) -> str:
    """Match iff score >= threshold; a tie counts as match."""
    return MATCH if score >= threshold else NON_MATCH


def pair_id_for(img_a: FaceImage, img_b: FaceImage) -> str:
    return f"{img_a.source_id or 'a'}::{img_b.source_id or 'b'}"


def verify_pair(
    img_a: FaceImage,
    img_b: FaceImage,
    detector: FaceDetectorBackend,
    embedder: EmbeddingBackend,
    threshold: float,
) -> VerificationRecord:
    """Full 1:1 comparison; the ``pic`` field stays 0 until calibration."""
    aligned_a = align_tagged(img_a, detector, "image_a")
    aligned_b = align_tagged(img_b, detector, "image_b")
    emb_a = embed(aligned_a, embedder)
    emb_b = embed(aligned_b, embedder)
    score = cosine_similarity(emb_a, emb_b)
    return VerificationRecord(
        score=score,
        threshold=threshold,
        decision=decide(score, threshold),
        pair_id=pair_id_for(img_a, img_b),
    )


def align_tagged(img: FaceImage, detector: FaceDetectorBackend, tag: str) -> AlignedFace:
    """detect_and_align, tagging NoFaceFound with which image failed."""
    try:
        return detect_and_align(img, detector)
    except NoFaceFound:
        raise NoFaceFound(image=tag) from None
