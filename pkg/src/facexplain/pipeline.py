"""End-to-end glue: bytes in, explained verification out.

Shared by the HTTP service and the CLI so both surfaces produce identical
tables, contexts, and heatmaps for the same inputs.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import backends as backend_registry
from . import qa as qa_registry
from .calibration import CalibrationSet, PicModel, fit_pic, pic_confidence
from .config import ServiceConfig
from .context import GeneralContextInfo, QAContext, build_context
from .errors import FaceXplainError
from .regions import ExplainabilityTable, build_table, region_masks
from .saliency import OcclusionGrid, SaliencyMap, explain_pair
from .verification import (
    AlignedFace,
    FaceImage,
    VerificationRecord,
    align_tagged,
    cosine_similarity,
    decide,
    embed,
)


class UndecodableImage(FaceXplainError):
    def __init__(self, part: str):
        super().__init__(f"could not decode {part} as PNG or JPEG")
        self.part = part


def decode_image(data: bytes, part: str) -> FaceImage:
    """PNG/JPEG bytes -> FaceImage; the source id hashes the content."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise UndecodableImage(part) from exc
    digest = hashlib.sha1(data).hexdigest()[:12]
    return FaceImage(pixels=pixels, source_id=digest)


def default_synthetic_calibration(seed: int = 42, n: int = 10_000) -> CalibrationSet:
    """The seeded two-Gaussian score set used when no calibration is given."""
    rng = np.random.default_rng(seed)
    gen = np.clip(rng.normal(0.7, 0.1, n), -1.0, 1.0)
    imp = np.clip(rng.normal(0.2, 0.1, n), -1.0, 1.0)
    return CalibrationSet(gen, imp)


@dataclass
class Runtime:
    """Backends and calibration resolved once from a config."""

    config: ServiceConfig
    detector: object
    embedder: object
    qa: object
    sentence_embedder: object
    pic_model: PicModel

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "Runtime":
        config.validate()
        if config.pic_model_path:
            pic_model = PicModel.load(config.pic_model_path)
        else:
            pic_model = fit_pic(default_synthetic_calibration())
        return cls(
            config=config,
            detector=backend_registry.get_detector(config.detector),
            embedder=backend_registry.get_embedder(config.embedder),
            qa=qa_registry.get_qa_backend(config.qa),
            sentence_embedder=qa_registry.get_sentence_embedder(config.sentence_embedder),
            pic_model=pic_model,
        )

    def grid(self) -> OcclusionGrid:
        return OcclusionGrid(window=self.config.window, stride=self.config.stride)


@dataclass
class PairExplanation:
    record: VerificationRecord
    confidence: float  # probability the decision is correct
    aligned_a: AlignedFace
    aligned_b: AlignedFace
    maps: dict[str, SaliencyMap]  # keyed by method code, "_rev" suffix for B-vs-A
    table: ExplainabilityTable
    context: QAContext


def verify_and_align(img_a: FaceImage, img_b: FaceImage, runtime: Runtime):
    aligned_a = align_tagged(img_a, runtime.detector, "image_a")
    aligned_b = align_tagged(img_b, runtime.detector, "image_b")
    emb_a = embed(aligned_a, runtime.embedder)
    emb_b = embed(aligned_b, runtime.embedder)
    score = cosine_similarity(emb_a, emb_b)
    threshold = runtime.config.threshold
    record = VerificationRecord(
        score=score,
        threshold=threshold,
        decision=decide(score, threshold),
        pic=runtime.pic_model(score),
        pair_id=f"{img_a.source_id}::{img_b.source_id}",
    )
    return record, aligned_a, aligned_b


def explain_verified_pair(img_a: FaceImage, img_b: FaceImage, runtime: Runtime) -> PairExplanation:
    """Verification, saliency, region table, and context for one pair."""
    record, aligned_a, aligned_b = verify_and_align(img_a, img_b, runtime)
    grid = runtime.grid()
    steps = runtime.config.greedy_steps

    maps_fwd = explain_pair(
        aligned_a, aligned_b, runtime.embedder, grid, steps,
        probe_id=img_a.source_id, reference_id=img_b.source_id,
    )
    maps = {m.method.code: m for m in maps_fwd}
    if runtime.config.symmetric_maps:
        for m in explain_pair(
            aligned_b, aligned_a, runtime.embedder, grid, steps,
            probe_id=img_b.source_id, reference_id=img_a.source_id,
        ):
            maps[f"{m.method.code}_rev"] = m

    regions = region_masks(aligned_a.landmarks)
    table = build_table(maps_fwd, regions)
    info = GeneralContextInfo.from_record(
        record,
        system_name=runtime.config.system_name,
        model_description=runtime.config.model_description,
    )
    context = build_context(record, table, info)
    confidence = pic_confidence(runtime.pic_model, record.score, record.decision)
    return PairExplanation(
        record=record,
        confidence=confidence,
        aligned_a=aligned_a,
        aligned_b=aligned_b,
        maps=maps,
        table=table,
        context=context,
    )


def table_payload(table: ExplainabilityTable) -> dict:
    from .regions import SCORE_COLUMNS

    return {
        "pair_id": table.pair_id,
        "rows": [
            {
                "region": row.region,
                **{col: score for col, score in zip(SCORE_COLUMNS, row.scores)},
                "mean": row.mean,
                "ratio_of_1s": row.ratio_of_1s,
            }
            for row in table.rows
        ],
    }
