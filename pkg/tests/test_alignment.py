import itertools

import numpy as np
import pytest

from facexplain import alignment
from facexplain.alignment import CANONICAL_TEMPLATE, estimate_similarity, transform_points
from facexplain.errors import DegenerateLandmarks


def test_identity_when_landmarks_equal_template():
    m = estimate_similarity(CANONICAL_TEMPLATE, CANONICAL_TEMPLATE)
    expected = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert np.allclose(m, expected, atol=1e-6)


def test_recovers_half_scale_from_doubled_landmarks():
    # Oracle: src = 2*T + (10, 10) maps onto T under x' = 0.5*x - 5.
    src = CANONICAL_TEMPLATE * 2.0 + np.array([10.0, 10.0])
    m = estimate_similarity(src, CANONICAL_TEMPLATE)
    assert alignment.transform_scale(m) == pytest.approx(0.5, abs=1e-6)
    assert np.allclose(m, [[0.5, 0.0, -5.0], [0.0, 0.5, -5.0]], atol=1e-6)
    assert np.allclose(transform_points(m, src), CANONICAL_TEMPLATE, atol=1e-6)


def test_recovers_pure_rotation():
    theta = 0.3
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    src = CANONICAL_TEMPLATE @ rot.T
    m = estimate_similarity(src, CANONICAL_TEMPLATE)
    assert np.allclose(transform_points(m, src), CANONICAL_TEMPLATE, atol=1e-8)
    assert alignment.transform_scale(m) == pytest.approx(1.0, abs=1e-8)


def test_collinear_landmarks_rejected():
    src = np.array([[i, 2.0 * i + 1.0] for i in range(5)])
    with pytest.raises(DegenerateLandmarks):
        estimate_similarity(src, CANONICAL_TEMPLATE)


def test_coincident_landmarks_rejected():
    src = np.ones((5, 2)) * 17.0
    with pytest.raises(DegenerateLandmarks):
        estimate_similarity(src, CANONICAL_TEMPLATE)


def _grid_search_rms(src, dst):
    """Brute-force similarity fit over a coarse parameter grid."""
    best = np.inf
    scales = np.linspace(0.8, 1.2, 21)
    angles = np.linspace(-0.2, 0.2, 21)
    shifts = np.linspace(-3.0, 3.0, 13)
    for s, th in itertools.product(scales, angles):
        a, b = s * np.cos(th), s * np.sin(th)
        lin = np.array([[a, -b], [b, a]])
        mapped_lin = src @ lin.T
        for tx in shifts:
            for ty in shifts:
                diff = mapped_lin + np.array([tx, ty]) - dst
                rms = np.sqrt(np.mean(np.sum(diff**2, axis=1)))
                best = min(best, rms)
    return best


def test_solver_beats_brute_force_grid_on_perturbed_landmarks():
    rng = np.random.default_rng(7)
    for _ in range(3):
        src = CANONICAL_TEMPLATE + rng.normal(scale=1.5, size=(5, 2))
        m = estimate_similarity(src, CANONICAL_TEMPLATE)
        solver_rms = alignment.residual_rms(m, src, CANONICAL_TEMPLATE)
        assert solver_rms <= _grid_search_rms(src, CANONICAL_TEMPLATE) + 1e-9


def test_warp_identity_preserves_image():
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(112, 112, 3), dtype=np.uint8)
    identity = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    out = alignment.warp_image(img, identity)
    assert np.array_equal(out, img)


def test_warp_translation_shifts_content():
    img = np.zeros((112, 112, 3), dtype=np.uint8)
    img[10, 20] = [255, 255, 255]
    shift = np.array([[1.0, 0.0, 5.0], [0.0, 1.0, 3.0]])  # +5 in x, +3 in y
    out = alignment.warp_image(img, shift)
    assert out[13, 25, 0] == 255
    assert out[10, 20, 0] == 0


def test_template_json_roundtrip():
    import json

    data = json.loads(alignment.canonical_template_json())
    assert data["size"] == 112
    assert list(data["points"]) and len(data["order"]) == 5
    assert data["points"]["left_eye"] == pytest.approx([38.2946, 51.6963])
