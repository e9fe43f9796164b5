import numpy as np
import pytest

from facexplain.backends import DownsampleEmbedder, TemplateDetector
from facexplain.sampledata import fixture_pair
from facexplain.verification import align_tagged


@pytest.fixture(scope="session")
def detector():
    return TemplateDetector()


@pytest.fixture(scope="session")
def embedder():
    return DownsampleEmbedder()


@pytest.fixture(scope="session")
def image_pair():
    return fixture_pair()


@pytest.fixture(scope="session")
def aligned_pair(image_pair, detector):
    a, b = image_pair
    return align_tagged(a, detector, "image_a"), align_tagged(b, detector, "image_b")


def naive_mock_embedding(pixels: np.ndarray, dim: int = 512) -> np.ndarray:
    """Independent re-statement of the mock embedder: explicit loops."""
    h, w = pixels.shape[:2]
    gray = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            r, g, b = pixels[y, x]
            gray[y, x] = 0.299 * r + 0.587 * g + 0.114 * b
    bh, bw = h // 8, w // 8
    pooled = np.zeros(64)
    for by in range(8):
        for bx in range(8):
            block = gray[by * bh : (by + 1) * bh, bx * bw : (bx + 1) * bw]
            pooled[by * 8 + bx] = block.mean()
    norm = np.sqrt((pooled**2).sum())
    pooled = pooled / norm
    out = np.zeros(dim)
    out[:64] = pooled
    return out
