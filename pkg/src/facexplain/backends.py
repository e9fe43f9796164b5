"""Pluggable detector / embedder backends and their registry.

The shipped reference backends are deterministic mocks so the whole
pipeline runs without model weights.  Real detector/embedder adapters
register themselves under a name and are selected via the
``backends.detector`` / ``backends.embedder`` config keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .alignment import ALIGNED_SIZE, CANONICAL_TEMPLATE
from .errors import UnknownBackend


@dataclass(frozen=True)
class Detection:
    """One detected face: pixel-space box (x0, y0, x1, y1) and 5 landmarks."""

    box: tuple[float, float, float, float]
    landmarks: np.ndarray  # (5, 2) in image pixel coordinates

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.box
        return max(x1 - x0, 0.0) * max(y1 - y0, 0.0)


class FaceDetectorBackend(Protocol):
    name: str
    concurrent_safe: bool

    def detect(self, pixels: np.ndarray) -> list[Detection]:
        """Return all faces found in an HxWx3 uint8 image (may be empty)."""
        ...


class EmbeddingBackend(Protocol):
    name: str
    dim: int
    concurrent_safe: bool

    def embed(self, pixels: np.ndarray) -> np.ndarray:
        """Map an aligned 112x112x3 uint8 raster to a (dim,) float vector."""
        ...


class TemplateDetector:
    """Mock detector: landmarks at a fixed fractional position of the image.

    The fractions are the canonical template normalized by the aligned crop
    size, so a 112x112 input yields exactly the template (identity alignment).
    """

    name = "mock"
    concurrent_safe = True

    def detect(self, pixels: np.ndarray) -> list[Detection]:
        h, w = pixels.shape[:2]
        fractions = CANONICAL_TEMPLATE / ALIGNED_SIZE
        landmarks = fractions * np.array([w, h], dtype=np.float64)
        return [Detection(box=(0.0, 0.0, float(w), float(h)), landmarks=landmarks)]


class DownsampleEmbedder:
    """Mock embedder: 8x8 grayscale average-pool, flattened and L2-normalized.

    The 64 values are zero-padded (or truncated) to ``dim``.  Padding happens
    after normalization, so the norm stays 1.
    """

    name = "mock"
    concurrent_safe = True

    def __init__(self, dim: int = 512):
        self.dim = dim

    def embed(self, pixels: np.ndarray) -> np.ndarray:
        gray = pixels.astype(np.float64) @ np.array([0.299, 0.587, 0.114])
        h, w = gray.shape
        bh, bw = h // 8, w // 8
        pooled = gray[: bh * 8, : bw * 8].reshape(8, bh, 8, bw).mean(axis=(1, 3))
        flat = pooled.reshape(-1)
        norm = np.linalg.norm(flat)
        if norm > 0:
            flat = flat / norm
        else:
            flat = np.zeros(64)
            flat[0] = 1.0  # all-black raster: fall back to a fixed unit vector
        if self.dim <= flat.size:
            out = flat[: self.dim].copy()
            n = np.linalg.norm(out)
            out = out / n if n > 0 else np.eye(self.dim)[0]
        else:
            out = np.zeros(self.dim)
            out[: flat.size] = flat
        return out


_DETECTORS: dict[str, Callable[[], FaceDetectorBackend]] = {}
_EMBEDDERS: dict[str, Callable[[], EmbeddingBackend]] = {}


def register_detector(name: str, factory: Callable[[], FaceDetectorBackend]) -> None:
    _DETECTORS[name] = factory


def register_embedder(name: str, factory: Callable[[], EmbeddingBackend]) -> None:
    _EMBEDDERS[name] = factory


def get_detector(name: str) -> FaceDetectorBackend:
    try:
        return _DETECTORS[name]()
    except KeyError:
        raise UnknownBackend(f"no detector backend named {name!r}") from None


def get_embedder(name: str) -> EmbeddingBackend:
    try:
        return _EMBEDDERS[name]()
    except KeyError:
        raise UnknownBackend(f"no embedder backend named {name!r}") from None


def detector_names() -> list[str]:
    return sorted(_DETECTORS)


def embedder_names() -> list[str]:
    return sorted(_EMBEDDERS)


register_detector("mock", TemplateDetector)
register_embedder("mock", DownsampleEmbedder)
