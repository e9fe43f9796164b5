"""Facial-region scoring: saliency maps -> explainability table.

Nine fixed regions (eyebrows, eyes, cheeks, chin, lips, nose) are defined
as polygons in the aligned crop, anchored to the canonical landmark
template.  Each region gets a 1-5 importance score per saliency method
(1 = most important), summarized per row by the mean score and the ratio
of methods that scored the region 1.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from typing import Protocol

import numpy as np
from PIL import Image, ImageDraw

from . import alignment
from .alignment import ALIGNED_SIZE, CANONICAL_TEMPLATE
from .errors import EmptyMask
from .saliency import METHOD_ORDER, SaliencyMap, SaliencyMethod

REGION_NAMES = (
    "left_eyebrow",
    "right_eyebrow",
    "left_eye",
    "right_eye",
    "left_cheek",
    "right_cheek",
    "chin",
    "lips",
    "nose",
)

SCORE_COLUMNS = tuple(m.column for m in METHOD_ORDER)

CSV_HEADER = ("region",) + SCORE_COLUMNS + ("mean", "ratio_of_1s")


@dataclass(frozen=True)
class FacialRegion:
    name: str
    mask: np.ndarray  # (112, 112) bool

    def __post_init__(self):
        if self.name not in REGION_NAMES:
            raise ValueError(f"unknown region {self.name!r}")
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (ALIGNED_SIZE, ALIGNED_SIZE) or not mask.any():
            raise ValueError("mask must be a nonempty 112x112 boolean raster")
        object.__setattr__(self, "mask", mask)


@dataclass(frozen=True)
class RegionRow:
    region: str
    scores: tuple[int, ...]  # one per method, in METHOD_ORDER
    mean: float
    ratio_of_1s: float


@dataclass(frozen=True)
class ExplainabilityTable:
    rows: tuple[RegionRow, ...]
    pair_id: str = ""

    @classmethod
    def from_scores(cls, scores_by_region: dict[str, tuple[int, ...]], pair_id: str = "") -> "ExplainabilityTable":
        """Build from per-region method scores, computing the summary columns."""
        rows = []
        for name in REGION_NAMES:
            scores = tuple(int(s) for s in scores_by_region[name])
            if len(scores) != len(METHOD_ORDER) or any(not 1 <= s <= 5 for s in scores):
                raise ValueError(f"region {name!r} needs {len(METHOD_ORDER)} scores in 1..5")
            rows.append(
                RegionRow(
                    region=name,
                    scores=scores,
                    mean=sum(scores) / len(scores),
                    ratio_of_1s=scores.count(1) / len(scores),
                )
            )
        return cls(rows=tuple(rows), pair_id=pair_id)

    def row(self, region: str) -> RegionRow:
        for r in self.rows:
            if r.region == region:
                return r
        raise KeyError(region)


def _load_template() -> dict:
    text = resources.files("facexplain").joinpath("assets/region_template.json").read_text()
    return json.loads(text)


_TEMPLATE = _load_template()


def _rasterize(polygon: list[list[float]]) -> np.ndarray:
    img = Image.new("L", (ALIGNED_SIZE, ALIGNED_SIZE), 0)
    # Rounding the vertices keeps rasterization stable under the tiny
    # numeric noise of a near-identity landmark transform.
    points = [(round(float(x), 6), round(float(y), 6)) for x, y in polygon]
    ImageDraw.Draw(img).polygon(points, fill=1)
    return np.asarray(img, dtype=bool)


class RegionMasker(Protocol):
    """Region-geometry provider contract.

    ``region_masks`` is the built-in 5-landmark implementation; adapters
    driven by denser landmark models plug in behind the same signature.
    """

    def __call__(self, landmarks) -> list[FacialRegion]: ...


def region_masks(landmarks) -> list[FacialRegion]:
    """The canonical region polygons, moved with the detected landmarks.

    ``landmarks`` is a Landmarks5 in aligned coordinates; the polygons are
    mapped by the similarity transform taking the canonical template onto
    those landmarks, then rasterized.
    """
    pts = np.asarray(getattr(landmarks, "points", landmarks), dtype=np.float64)
    alignment.ensure_not_collinear(pts)
    matrix = alignment.estimate_similarity(CANONICAL_TEMPLATE, pts)
    regions = []
    for name in REGION_NAMES:
        vertices = np.asarray(_TEMPLATE["regions"][name], dtype=np.float64)
        moved = alignment.transform_points(matrix, vertices)
        regions.append(FacialRegion(name=name, mask=_rasterize(moved.tolist())))
    return regions


def template_regions() -> list[FacialRegion]:
    """Region masks at the canonical landmark positions."""
    return [
        FacialRegion(name=name, mask=_rasterize(_TEMPLATE["regions"][name]))
        for name in REGION_NAMES
    ]


def region_template_json() -> str:
    return json.dumps(_TEMPLATE, indent=2, sort_keys=True)


def quantize_region(smap: SaliencyMap, region: FacialRegion, statistic: str = "mean") -> int:
    """Map the region's saliency to a 1-5 score (1 = top fifth of [0, 1]).

    ``statistic`` aggregates the masked values: "mean" (default, robust to
    speckle) or "max" (sensitive to small hot spots).
    """
    if not region.mask.any():
        raise EmptyMask(region.name)
    inside = smap.values[region.mask]
    if statistic == "mean":
        v = float(inside.mean())
    elif statistic == "max":
        v = float(inside.max())
    else:
        raise ValueError(f"unknown statistic {statistic!r}")
    interval = min(int(np.floor(5.0 * v)), 4)
    return 5 - interval


def build_table(
    maps: list[SaliencyMap], regions: list[FacialRegion], statistic: str = "mean"
) -> ExplainabilityTable:
    """Score all nine regions under all five methods."""
    by_method = {m.method: m for m in maps}
    if set(by_method) != set(METHOD_ORDER) or len(maps) != len(METHOD_ORDER):
        raise ValueError("build_table needs exactly the five method maps")
    by_name = {r.name: r for r in regions}
    if set(by_name) != set(REGION_NAMES):
        raise ValueError("build_table needs exactly the nine regions")
    pair_ids = {(m.probe_id, m.reference_id) for m in maps}
    pair_id = "::".join(next(iter(pair_ids))) if len(pair_ids) == 1 else ""
    scores = {
        name: tuple(
            quantize_region(by_method[m], by_name[name], statistic) for m in METHOD_ORDER
        )
        for name in REGION_NAMES
    }
    return ExplainabilityTable.from_scores(scores, pair_id=pair_id)


def rank_regions(table: ExplainabilityTable) -> list[str]:
    """Most important first: ascending mean, then descending ratio of 1s,
    then the fixed region order."""
    order = {name: i for i, name in enumerate(REGION_NAMES)}
    ranked = sorted(table.rows, key=lambda r: (r.mean, -r.ratio_of_1s, order[r.region]))
    return [r.region for r in ranked]


def table_to_csv(table: ExplainabilityTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in table.rows:
        writer.writerow(
            [row.region, *row.scores, f"{row.mean:.1f}", f"{row.ratio_of_1s:.1f}"]
        )
    return buf.getvalue()


def table_to_json(table: ExplainabilityTable) -> str:
    payload = {
        "pair_id": table.pair_id,
        "rows": [
            {
                "region": row.region,
                **{col: s for col, s in zip(SCORE_COLUMNS, row.scores)},
                "mean": row.mean,
                "ratio_of_1s": row.ratio_of_1s,
            }
            for row in table.rows
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def table_from_json(text: str) -> ExplainabilityTable:
    data = json.loads(text)
    scores = {
        row["region"]: tuple(row[col] for col in SCORE_COLUMNS) for row in data["rows"]
    }
    return ExplainabilityTable.from_scores(scores, pair_id=data.get("pair_id", ""))
