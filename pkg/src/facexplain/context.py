"""Textualization of a verification outcome for the QA engine.

The context is a fixed-order sequence of plain-English sentences covering
the decision, the score and threshold, the confidence, every region row of
the explainability table, the region ranking, and a small glossary.  The
template is versioned; QA regression tests depend on its exact wording.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PairMismatch
from .regions import ExplainabilityTable, rank_regions
from .saliency import METHOD_ORDER
from .verification import VerificationRecord

TEMPLATE_VERSION = "1.0"

XAI_DEFINITION = (
    "Explainable AI refers to techniques that make the decisions of machine "
    "learning models understandable to humans"
)
SALIENCY_DEFINITION = (
    "A saliency heatmap is an image that highlights the parts of a face that "
    "contribute most to the similarity score"
)

DEFAULT_METHOD_GLOSSARY = {
    "single_removal": (
        "Single removal measures how much the similarity score drops when one "
        "image patch is hidden"
    ),
    "greedy_removal": (
        "Greedy removal repeatedly hides the patch whose removal hurts the "
        "similarity score the most"
    ),
    "single_aggregation": (
        "Single aggregation measures how much the similarity score recovers "
        "when one original patch is restored onto a blurred image"
    ),
    "greedy_aggregation": (
        "Greedy aggregation repeatedly restores the patch that helps the "
        "similarity score the most"
    ),
    "average": (
        "The average method combines the four saliency methods into one "
        "consensus heatmap"
    ),
}


@dataclass(frozen=True)
class GeneralContextInfo:
    system_name: str
    model_description: str
    threshold: float
    score: float
    decision: str
    confidence_pct: float
    xai_method_glossary: dict = field(default_factory=lambda: dict(DEFAULT_METHOD_GLOSSARY))

    def __post_init__(self):
        if not 0.0 <= self.confidence_pct <= 100.0:
            raise ValueError("confidence_pct must be in [0, 100]")
        for name in ("system_name", "model_description", "decision"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")

    @classmethod
    def from_record(
        cls,
        record: VerificationRecord,
        system_name: str = "FaceXplain",
        model_description: str = (
            "The system compares two aligned face images using the cosine "
            "similarity of their feature embeddings"
        ),
        glossary: dict | None = None,
    ) -> "GeneralContextInfo":
        confidence = record.pic if record.decision == "match" else 1.0 - record.pic
        return cls(
            system_name=system_name,
            model_description=model_description,
            threshold=record.threshold,
            score=record.score,
            decision=record.decision,
            confidence_pct=100.0 * confidence,
            xai_method_glossary=glossary or dict(DEFAULT_METHOD_GLOSSARY),
        )


@dataclass(frozen=True)
class QAContext:
    text: str
    sentences: tuple[str, ...]
    template_version: str = TEMPLATE_VERSION

    def __post_init__(self):
        if " ".join(self.sentences) != self.text:
            raise ValueError("sentences joined by single spaces must equal text")
        for s in self.sentences:
            if not s.endswith("."):
                raise ValueError(f"sentence missing terminal period: {s!r}")

    @classmethod
    def from_sentences(cls, sentences: list[str], template_version: str = TEMPLATE_VERSION) -> "QAContext":
        return cls(" ".join(sentences), tuple(sentences), template_version)

    @classmethod
    def from_text(cls, text: str, template_version: str = TEMPLATE_VERSION) -> "QAContext":
        return cls.from_sentences(split_sentences(text), template_version)


def region_label(name: str) -> str:
    return name.replace("_", " ")


def build_context(
    record: VerificationRecord,
    table: ExplainabilityTable,
    info: GeneralContextInfo,
) -> QAContext:
    """Serialize one verified pair into the QA context text."""
    if record.pair_id and table.pair_id and record.pair_id != table.pair_id:
        raise PairMismatch(f"record pair {record.pair_id!r} vs table pair {table.pair_id!r}")
    if info.decision != record.decision or info.score != record.score:
        raise PairMismatch("general info disagrees with the verification record")

    sentences = [
        f"The deployed face recognition system is called {info.system_name}.",
        f"{info.model_description}.",
        f"The decision is {info.decision} with a confidence of {info.confidence_pct:.1f} percent.",
        f"The similarity score is {info.score:.3f} and the decision threshold is {info.threshold:.3f}.",
        (
            f"This decision comes from comparing the similarity score of {info.score:.3f} "
            f"with the decision threshold of {info.threshold:.3f}."
        ),
        (
            "The system makes the decision based on whether the similarity score "
            "meets the decision threshold."
        ),
        (
            "The reasoning behind the decision is whether the similarity score is "
            "above the decision threshold."
        ),
        f"The system is {info.confidence_pct:.1f} percent sure about this decision.",
    ]

    for row in table.rows:
        label = region_label(row.region)
        s = row.scores
        sentences.append(
            f"The {label} facial region has a score of {s[0]} for single removal, "
            f"{s[1]} for greedy removal, {s[2]} for single aggregation, "
            f"{s[3]} for greedy aggregation, and {s[4]} for average, "
            f"with a mean score of {row.mean:.1f} and a ratio of ones of {row.ratio_of_1s:.1f}."
        )

    ranked = rank_regions(table)
    sentences.append(f"The most important facial region is the {region_label(ranked[0])}.")
    sentences.append(f"The least important facial region is the {region_label(ranked[-1])}.")

    for method in METHOD_ORDER:
        description = info.xai_method_glossary.get(
            method.column, DEFAULT_METHOD_GLOSSARY[method.column]
        )
        sentences.append(f"{description}.")
    sentences.append(f"{XAI_DEFINITION}.")
    sentences.append(f"{SALIENCY_DEFINITION}.")

    return QAContext.from_sentences(sentences)


_SENTENCE_SPLIT = re.compile(r"(?<=\.)\s+")


def split_sentences(text: str) -> list[str]:
    """Split on a period followed by whitespace; keep terminal periods."""
    parts = _SENTENCE_SPLIT.split(text)
    return [p.strip() for p in parts if p.strip()]
