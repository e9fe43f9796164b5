"""Black-box occlusion saliency for face pairs.

Five methods, all driven purely through a scorer callable so any embedding
model can be explained without touching its internals:

* single removal      (S0-)  occlude one patch, measure the score drop
* greedy removal      (S1-)  repeatedly occlude the most damaging patch
* single aggregation  (S0+)  restore one patch onto a blurred baseline,
                             measure the score gain
* greedy aggregation  (S1+)  repeatedly restore the most helpful patch
* average             (AVG)  mean of the four normalized maps

Perturbation happens per grid cell rather than per pixel; the default
16px window with 8px stride keeps the scorer call count tractable.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

from .alignment import ALIGNED_SIZE
from .backends import EmbeddingBackend
from .errors import MismatchedPair, ScorerFailure
from .verification import AlignedFace, Embedding, cosine_similarity, embed

BLUR_SIGMA = 8.0
DEFAULT_WINDOW = 16
DEFAULT_STRIDE = 8
DEFAULT_GREEDY_STEPS = 10

PairScorer = Callable[[np.ndarray], float]


class SaliencyMethod(Enum):
    SINGLE_REMOVAL = ("S0minus", "single_removal")
    GREEDY_REMOVAL = ("S1minus", "greedy_removal")
    SINGLE_AGGREGATION = ("S0plus", "single_aggregation")
    GREEDY_AGGREGATION = ("S1plus", "greedy_aggregation")
    AVERAGE = ("AVG", "average")

    def __init__(self, code: str, column: str):
        self.code = code
        self.column = column

    @classmethod
    def from_code(cls, code: str) -> "SaliencyMethod":
        for m in cls:
            if m.code == code:
                return m
        raise KeyError(code)


METHOD_ORDER = (
    SaliencyMethod.SINGLE_REMOVAL,
    SaliencyMethod.GREEDY_REMOVAL,
    SaliencyMethod.SINGLE_AGGREGATION,
    SaliencyMethod.GREEDY_AGGREGATION,
    SaliencyMethod.AVERAGE,
)


@dataclass(frozen=True)
class OcclusionGrid:
    """Rectangular occlusion cells covering the aligned raster."""

    window: int = DEFAULT_WINDOW
    stride: int = DEFAULT_STRIDE
    size: int = ALIGNED_SIZE
    cells: tuple[tuple[int, int, int, int], ...] = ()  # (y0, x0, y1, x1)

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not 1 <= self.stride <= self.window:
            raise ValueError("stride must satisfy 1 <= stride <= window")
        if not self.cells:
            object.__setattr__(self, "cells", tuple(self._sliding_cells()))
        covered = np.zeros((self.size, self.size), dtype=bool)
        for y0, x0, y1, x1 in self.cells:
            covered[y0:y1, x0:x1] = True
        if not covered.all():
            raise ValueError("cells must cover every pixel")

    def _sliding_cells(self):
        anchors = list(range(0, self.size - self.window + 1, self.stride))
        if anchors[-1] != self.size - self.window:
            anchors.append(self.size - self.window)
        for y in anchors:
            for x in anchors:
                yield (y, x, y + self.window, x + self.window)

    @classmethod
    def partition(cls, rows: int, cols: int, size: int = ALIGNED_SIZE) -> "OcclusionGrid":
        """Non-overlapping partition into rows x cols near-equal rectangles.

        Used by the oracle tests: with disjoint cells a strictly additive
        scorer decomposes exactly per cell.
        """
        ys = np.linspace(0, size, rows + 1).round().astype(int)
        xs = np.linspace(0, size, cols + 1).round().astype(int)
        cells = tuple(
            (int(ys[r]), int(xs[c]), int(ys[r + 1]), int(xs[c + 1]))
            for r in range(rows)
            for c in range(cols)
        )
        window = max(max(y1 - y0, x1 - x0) for y0, x0, y1, x1 in cells)
        return cls(window=window, stride=window, size=size, cells=cells)

    def __len__(self):
        return len(self.cells)


@dataclass(frozen=True)
class SaliencyMap:
    values: np.ndarray  # (size, size) floats in [0, 1]
    method: SaliencyMethod
    probe_id: str
    reference_id: str
    raw_range: tuple[float, float]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError("saliency values must be 2-D")
        if vals.min() < 0.0 or vals.max() > 1.0:
            raise ValueError("saliency values must lie in [0, 1]")
        object.__setattr__(self, "values", vals)


def normalize_map(raw: np.ndarray) -> tuple[np.ndarray, tuple[float, float]]:
    """Min-max normalize; a flat raw map becomes 0.5 everywhere."""
    lo, hi = float(raw.min()), float(raw.max())
    if hi - lo == 0.0:
        return np.full_like(raw, 0.5, dtype=np.float64), (lo, hi)
    return (raw - lo) / (hi - lo), (lo, hi)


def _call_scorer(scorer: PairScorer, raster: np.ndarray) -> float:
    try:
        return float(scorer(raster))
    except Exception as exc:
        raise ScorerFailure("pair scorer raised") from exc


def mean_color_fill(pixels: np.ndarray) -> np.ndarray:
    return np.rint(pixels.reshape(-1, 3).mean(axis=0)).astype(np.uint8)


def blur_baseline(pixels: np.ndarray, sigma: float = BLUR_SIGMA) -> np.ndarray:
    blurred = np.empty_like(pixels, dtype=np.float64)
    for c in range(pixels.shape[2]):
        blurred[:, :, c] = ndimage.gaussian_filter(pixels[:, :, c].astype(np.float64), sigma)
    return np.clip(np.rint(blurred), 0, 255).astype(np.uint8)


def _cells_to_pixels(grid: OcclusionGrid, cell_values: np.ndarray) -> np.ndarray:
    """Per-pixel raw value: mean of the values of all covering cells."""
    total = np.zeros((grid.size, grid.size))
    count = np.zeros((grid.size, grid.size))
    for val, (y0, x0, y1, x1) in zip(cell_values, grid.cells):
        total[y0:y1, x0:x1] += val
        count[y0:y1, x0:x1] += 1.0
    return total / count


def _finish(raw: np.ndarray, method, probe_id, reference_id) -> SaliencyMap:
    values, raw_range = normalize_map(raw)
    return SaliencyMap(values, method, probe_id, reference_id, raw_range)


def single_removal(
    probe: AlignedFace, scorer: PairScorer, grid: OcclusionGrid,
    probe_id: str = "", reference_id: str = "",
) -> SaliencyMap:
    """Score drop when each cell is filled with the probe's mean color."""
    fill = mean_color_fill(probe.pixels)
    base = _call_scorer(scorer, probe.pixels)
    drops = np.empty(len(grid))
    for i, (y0, x0, y1, x1) in enumerate(grid.cells):
        occluded = probe.pixels.copy()
        occluded[y0:y1, x0:x1] = fill
        drops[i] = base - _call_scorer(scorer, occluded)
    raw = _cells_to_pixels(grid, drops)
    return _finish(raw, SaliencyMethod.SINGLE_REMOVAL, probe_id, reference_id)


def single_aggregation(
    probe: AlignedFace, scorer: PairScorer, grid: OcclusionGrid,
    probe_id: str = "", reference_id: str = "",
) -> SaliencyMap:
    """Score gain when each cell is restored onto the blurred baseline."""
    baseline = blur_baseline(probe.pixels)
    base = _call_scorer(scorer, baseline)
    gains = np.empty(len(grid))
    for i, (y0, x0, y1, x1) in enumerate(grid.cells):
        restored = baseline.copy()
        restored[y0:y1, x0:x1] = probe.pixels[y0:y1, x0:x1]
        gains[i] = _call_scorer(scorer, restored) - base
    raw = _cells_to_pixels(grid, gains)
    return _finish(raw, SaliencyMethod.SINGLE_AGGREGATION, probe_id, reference_id)


def _greedy(
    start: np.ndarray,
    patch_source: np.ndarray | None,
    fill: np.ndarray | None,
    scorer: PairScorer,
    grid: OcclusionGrid,
    steps: int,
    pick_max: bool,
) -> np.ndarray:
    """Shared greedy loop; returns per-cell importance (steps..1, else 0).

    The best cell each round is the arg-extremum of the candidate score
    itself (the current image's score is a constant within a round, so the
    biggest drop/gain needs no extra scorer call).  Ties go to the lowest
    cell index.
    """
    if not 1 <= steps <= len(grid):
        raise ValueError("steps must be in [1, number of cells]")
    current = start.copy()
    remaining = list(range(len(grid)))
    importance = np.zeros(len(grid))
    for round_no in range(1, steps + 1):
        best_idx = None
        best_score = None
        for idx in remaining:
            y0, x0, y1, x1 = grid.cells[idx]
            candidate = current.copy()
            if fill is not None:
                candidate[y0:y1, x0:x1] = fill
            else:
                candidate[y0:y1, x0:x1] = patch_source[y0:y1, x0:x1]
            score = _call_scorer(scorer, candidate)
            better = best_score is None or (score > best_score if pick_max else score < best_score)
            if better:
                best_idx, best_score = idx, score
        y0, x0, y1, x1 = grid.cells[best_idx]
        if fill is not None:
            current[y0:y1, x0:x1] = fill
        else:
            current[y0:y1, x0:x1] = patch_source[y0:y1, x0:x1]
        importance[best_idx] = steps - round_no + 1
        remaining.remove(best_idx)
    return importance


def greedy_removal(
    probe: AlignedFace, scorer: PairScorer, grid: OcclusionGrid,
    steps: int = DEFAULT_GREEDY_STEPS, probe_id: str = "", reference_id: str = "",
) -> SaliencyMap:
    """Permanently occlude the most damaging cell, ``steps`` times."""
    fill = mean_color_fill(probe.pixels)
    importance = _greedy(probe.pixels, None, fill, scorer, grid, steps, pick_max=False)
    raw = _cells_to_pixels(grid, importance)
    return _finish(raw, SaliencyMethod.GREEDY_REMOVAL, probe_id, reference_id)


def greedy_aggregation(
    probe: AlignedFace, scorer: PairScorer, grid: OcclusionGrid,
    steps: int = DEFAULT_GREEDY_STEPS, probe_id: str = "", reference_id: str = "",
) -> SaliencyMap:
    """Permanently restore the most helpful cell onto the blurred baseline."""
    baseline = blur_baseline(probe.pixels)
    importance = _greedy(baseline, probe.pixels, None, scorer, grid, steps, pick_max=True)
    raw = _cells_to_pixels(grid, importance)
    return _finish(raw, SaliencyMethod.GREEDY_AGGREGATION, probe_id, reference_id)


def average_map(maps: Sequence[SaliencyMap]) -> SaliencyMap:
    """Pixelwise mean of the four method maps, re-normalized."""
    expected = {m for m in SaliencyMethod if m is not SaliencyMethod.AVERAGE}
    if {m.method for m in maps} != expected or len(maps) != 4:
        raise ValueError("average_map needs exactly the four method maps")
    ids = {(m.probe_id, m.reference_id) for m in maps}
    if len(ids) != 1:
        raise MismatchedPair(f"maps come from different pairs: {sorted(ids)}")
    mean = np.mean([m.values for m in maps], axis=0)
    probe_id, reference_id = next(iter(ids))
    return _finish(mean, SaliencyMethod.AVERAGE, probe_id, reference_id)


def make_pair_scorer(reference: AlignedFace, embedder: EmbeddingBackend) -> PairScorer:
    """Similarity of any probe raster against a pre-embedded reference."""
    ref_embedding = embed(reference, embedder)

    def scorer(raster: np.ndarray) -> float:
        vector = np.asarray(embedder.embed(raster), dtype=np.float64)
        return cosine_similarity(Embedding(vector, embedder.name), ref_embedding)

    scorer.concurrent_safe = getattr(embedder, "concurrent_safe", False)
    return scorer


def explain_pair(
    probe: AlignedFace,
    reference: AlignedFace,
    embedder: EmbeddingBackend,
    grid: OcclusionGrid | None = None,
    steps: int = DEFAULT_GREEDY_STEPS,
    probe_id: str = "",
    reference_id: str = "",
) -> list[SaliencyMap]:
    """All five maps for probe-vs-reference, in fixed S0-, S1-, S0+, S1+, AVG order."""
    grid = grid or OcclusionGrid()
    scorer = make_pair_scorer(reference, embedder)
    ids = dict(probe_id=probe_id, reference_id=reference_id)
    s0m = single_removal(probe, scorer, grid, **ids)
    s1m = greedy_removal(probe, scorer, grid, steps, **ids)
    s0p = single_aggregation(probe, scorer, grid, **ids)
    s1p = greedy_aggregation(probe, scorer, grid, steps, **ids)
    avg = average_map([s0m, s1m, s0p, s1p])
    return [s0m, s1m, s0p, s1p, avg]


def jet_colormap(values: np.ndarray) -> np.ndarray:
    """Classic blue->cyan->yellow->red ramp, returned as uint8 RGB."""
    v = np.clip(values, 0.0, 1.0)
    r = np.clip(1.5 - np.abs(4.0 * v - 3.0), 0, 1)
    g = np.clip(1.5 - np.abs(4.0 * v - 2.0), 0, 1)
    b = np.clip(1.5 - np.abs(4.0 * v - 1.0), 0, 1)
    return np.rint(np.stack([r, g, b], axis=-1) * 255).astype(np.uint8)


def to_grayscale_png(smap: SaliencyMap, path: str | Path) -> None:
    gray = np.rint(smap.values * 255).astype(np.uint8)
    Image.fromarray(gray, mode="L").save(path, format="PNG")


def render_overlay(smap: SaliencyMap, face_pixels: np.ndarray, alpha: float = 0.45) -> np.ndarray:
    heat = jet_colormap(smap.values).astype(np.float64)
    blended = (1.0 - alpha) * face_pixels.astype(np.float64) + alpha * heat
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def to_overlay_png(smap: SaliencyMap, face_pixels: np.ndarray, path: str | Path, alpha: float = 0.45) -> None:
    Image.fromarray(render_overlay(smap, face_pixels, alpha), mode="RGB").save(path, format="PNG")


def export_raw(smap: SaliencyMap, base_path: str | Path) -> tuple[Path, Path]:
    """Write row-major float32 values plus a JSON sidecar describing them."""
    base = Path(base_path)
    bin_path = base.with_suffix(".bin")
    meta_path = base.with_suffix(".json")
    flat = smap.values.astype("<f4").reshape(-1)
    bin_path.write_bytes(struct.pack(f"<{flat.size}f", *flat))
    meta_path.write_text(
        json.dumps(
            {
                "height": smap.values.shape[0],
                "width": smap.values.shape[1],
                "method": smap.method.code,
                "raw_min": smap.raw_range[0],
                "raw_max": smap.raw_range[1],
                "dtype": "float32",
                "layout": "row-major",
            },
            indent=2,
            sort_keys=True,
        )
    )
    return bin_path, meta_path


def load_raw(base_path: str | Path) -> SaliencyMap:
    base = Path(base_path)
    meta = json.loads(base.with_suffix(".json").read_text())
    data = np.frombuffer(base.with_suffix(".bin").read_bytes(), dtype="<f4")
    values = data.reshape(meta["height"], meta["width"]).astype(np.float64)
    return SaliencyMap(
        values=np.clip(values, 0.0, 1.0),
        method=SaliencyMethod.from_code(meta["method"]),
        probe_id="",
        reference_id="",
        raw_range=(meta["raw_min"], meta["raw_max"]),
    )
