"""Deterministic synthetic face-like images.

These are procedural cartoon faces, good enough to drive the mock backends
in demos and tests without shipping any biometric data.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from .verification import FaceImage


def synthetic_face(seed: int, size: tuple[int, int] = (144, 144)) -> FaceImage:
    """Draw a seeded cartoon face; identical seeds yield identical pixels."""
    rng = np.random.default_rng(seed)
    w, h = size
    base = rng.integers(30, 90, size=3)
    img = Image.new("RGB", (w, h), tuple(int(v) for v in base))
    draw = ImageDraw.Draw(img)

    skin = tuple(int(v) for v in rng.integers(120, 230, size=3))
    draw.ellipse([w * 0.12, h * 0.08, w * 0.88, h * 0.95], fill=skin)

    eye = tuple(int(v) for v in rng.integers(0, 80, size=3))
    ex = rng.uniform(0.30, 0.36)
    ey = rng.uniform(0.40, 0.48)
    r = w * rng.uniform(0.04, 0.07)
    for cx in (ex * w, (1 - ex) * w):
        draw.ellipse([cx - r, ey * h - r, cx + r, ey * h + r], fill=eye)

    nose = tuple(int(v) for v in rng.integers(60, 160, size=3))
    draw.polygon(
        [(w * 0.5, h * 0.52), (w * 0.45, h * 0.68), (w * 0.55, h * 0.68)], fill=nose
    )

    mouth = tuple(int(v) for v in rng.integers(100, 200, size=3))
    my = rng.uniform(0.76, 0.84)
    draw.ellipse([w * 0.36, my * h - 4, w * 0.64, my * h + 6], fill=mouth)

    noise = rng.integers(0, 12, size=(h, w, 3), dtype=np.uint8)
    pixels = np.clip(np.asarray(img, dtype=np.int16) + noise, 0, 255).astype(np.uint8)
    return FaceImage(pixels=pixels, source_id=f"synthetic-{seed}")


def fixture_pair() -> tuple[FaceImage, FaceImage]:
    """The canonical demo pair: two different synthetic identities."""
    return synthetic_face(1), synthetic_face(2, size=(160, 150))
