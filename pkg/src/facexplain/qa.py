"""Extractive question answering over a verification context.

A question is first answered over the full context.  When the backend's
confidence falls below the threshold, the most question-similar sentences
are retrieved (by sentence-embedding cosine) into a smaller sub-context
and the question is asked once more over that.

The shipped reference backends are deterministic and dependency-free: a
keyword-overlap span extractor and a hashed bag-of-words sentence
embedder.  Transformer-backed adapters can register under their own names.
"""

from __future__ import annotations

import json
import re
import time
import zlib
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Protocol

import numpy as np

from .context import QAContext
from .errors import BackendFailure, EmptyContext, UnknownBackend

DEFAULT_TAU = 0.3
DEFAULT_TOP_K = 5


class QABackend(Protocol):
    name: str
    concurrent_safe: bool

    def __call__(self, question: str, context: str) -> tuple[str, float]:
        """Return (answer span, confidence in [0, 1]); the span must be a
        contiguous substring of ``context``."""
        ...


class SentenceEmbedder(Protocol):
    name: str
    dim: int
    concurrent_safe: bool

    def __call__(self, text: str) -> np.ndarray:
        """Return a unit-norm vector of fixed dimension."""
        ...


@dataclass(frozen=True)
class AnswerResult:
    answer: str
    confidence: float
    used_subcontext: bool
    subcontext_sentences: tuple[str, ...]
    latency_ms: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")
        if self.used_subcontext and not self.subcontext_sentences:
            raise ValueError("used_subcontext implies a nonempty sub-context")


_STOPWORDS = frozenset(
    """a an the is are was were be been being am do does did done doing what which
    who whom whose how why when where you your yours i me my mine we us our it its
    they them their of to in on at by for with about into onto over under from as
    and or nor not no yes this that these those there here can could would should
    will shall may might must have has had having get gets got if then than so very
    please tell say says said give gives show shows me""".split()
)

_IRREGULAR_STEMS = {"made": "make", "came": "come", "makes": "make", "comes": "come"}


def tokenize(text: str) -> list[str]:
    """Lowercase content words with a light plural/gerund stem."""
    words = re.findall(r"[a-z0-9]+", text.lower())
    out = []
    for w in words:
        if w in _STOPWORDS:
            continue
        if w in _IRREGULAR_STEMS:
            w = _IRREGULAR_STEMS[w]
        elif len(w) > 5 and w.endswith("ing"):
            w = w[:-3]
        elif len(w) > 3 and w.endswith("s"):
            w = w[:-1]
        out.append(w)
    return out


class KeywordSpanExtractor:
    """Reference QA backend: return the sentence sharing the most content
    words with the question; confidence is the matched fraction of the
    question's content words."""

    name = "keyword"
    concurrent_safe = True

    def __call__(self, question: str, context: str) -> tuple[str, float]:
        from .context import split_sentences

        sentences = split_sentences(context)
        if not sentences:
            return "", 0.0
        q_tokens = set(tokenize(question))
        if not q_tokens:
            return sentences[0], 0.0
        best_idx, best_overlap = 0, -1
        for i, sentence in enumerate(sentences):
            overlap = len(q_tokens & set(tokenize(sentence)))
            if overlap > best_overlap:
                best_idx, best_overlap = i, overlap
        return sentences[best_idx], best_overlap / len(q_tokens)


class HashedBowEmbedder:
    """Bag-of-words sentence embedding with stable crc32 token hashing."""

    name = "bow"
    concurrent_safe = True

    def __init__(self, dim: int = 512):
        self.dim = dim

    def __call__(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for token in tokenize(text):
            vec[zlib.crc32(token.encode()) % self.dim] += 1.0
        norm = np.linalg.norm(vec)
        if norm == 0:
            vec[0] = 1.0
            return vec
        return vec / norm


def select_subcontext(
    question: str, ctx: QAContext, emb: SentenceEmbedder, k: int
) -> list[str]:
    """Top-k sentences by embedding cosine, returned in original order."""
    if not ctx.sentences:
        raise EmptyContext("context has no sentences")
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, len(ctx.sentences))
    try:
        q_vec = np.asarray(emb(question), dtype=np.float64)
        sims = []
        for sentence in ctx.sentences:
            s_vec = np.asarray(emb(sentence), dtype=np.float64)
            denom = np.linalg.norm(q_vec) * np.linalg.norm(s_vec)
            sims.append(float(q_vec @ s_vec / denom) if denom > 0 else 0.0)
    except Exception as exc:
        raise BackendFailure("sentence embedder raised") from exc
    # Ties resolve to the earlier context position.
    ranked = sorted(range(len(sims)), key=lambda i: (-sims[i], i))[:k]
    return [ctx.sentences[i] for i in sorted(ranked)]


def answer(
    question: str,
    ctx: QAContext,
    qa: QABackend,
    emb: SentenceEmbedder,
    tau: float = DEFAULT_TAU,
    k: int = DEFAULT_TOP_K,
) -> AnswerResult:
    """Ask over the full context; retry once over a sub-context when the
    first answer's confidence falls below ``tau``."""
    if not question:
        raise ValueError("question must be nonempty")
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    if not ctx.sentences or not ctx.text.strip():
        raise EmptyContext("cannot answer over an empty context")

    start = time.perf_counter()
    span, confidence = _call_backend(qa, question, ctx.text)
    if confidence >= tau:
        latency = (time.perf_counter() - start) * 1000.0
        return AnswerResult(span, confidence, False, (), latency)

    selected = select_subcontext(question, ctx, emb, k)
    sub_text = " ".join(selected)
    span, confidence = _call_backend(qa, question, sub_text)
    latency = (time.perf_counter() - start) * 1000.0
    return AnswerResult(span, confidence, True, tuple(selected), latency)


def _call_backend(qa: QABackend, question: str, context: str) -> tuple[str, float]:
    try:
        span, confidence = qa(question, context)
    except Exception as exc:
        raise BackendFailure("QA backend raised") from exc
    if span and span not in context:
        raise BackendFailure(
            f"backend {getattr(qa, 'name', '?')!r} broke the extractive contract"
        )
    return span, float(np.clip(confidence, 0.0, 1.0))


def _normalize_question(text: str) -> str:
    return " ".join(re.findall(r"[a-z0-9]+", text.lower()))


def _load_faq() -> list[dict]:
    text = resources.files("facexplain").joinpath("assets/faq.json").read_text()
    return json.loads(text)["entries"]


_FAQ = _load_faq()


def canned_faq(question: str) -> str | None:
    """Exact (normalized) match against the FAQ map; None means 'ask the
    backend instead'."""
    normalized = _normalize_question(question)
    if not normalized:
        return None
    for entry in _FAQ:
        if normalized in (_normalize_question(p) for p in entry["patterns"]):
            return entry["answer"]
    return None


def ask_question(
    question: str,
    ctx: QAContext,
    qa: QABackend,
    emb: SentenceEmbedder,
    tau: float = DEFAULT_TAU,
    k: int = DEFAULT_TOP_K,
) -> AnswerResult:
    """FAQ routing plus the extractive pipeline: the full ask entry point."""
    start = time.perf_counter()
    canned = canned_faq(question)
    if canned is not None:
        latency = (time.perf_counter() - start) * 1000.0
        return AnswerResult(canned, 1.0, False, (), latency)
    return answer(question, ctx, qa, emb, tau=tau, k=k)


_QA_BACKENDS: dict[str, Callable[[], QABackend]] = {"keyword": KeywordSpanExtractor}
_SENTENCE_EMBEDDERS: dict[str, Callable[[], SentenceEmbedder]] = {"bow": HashedBowEmbedder}


def register_qa_backend(name: str, factory: Callable[[], QABackend]) -> None:
    _QA_BACKENDS[name] = factory


def register_sentence_embedder(name: str, factory: Callable[[], SentenceEmbedder]) -> None:
    _SENTENCE_EMBEDDERS[name] = factory


def get_qa_backend(name: str) -> QABackend:
    try:
        return _QA_BACKENDS[name]()
    except KeyError:
        raise UnknownBackend(f"no QA backend named {name!r}") from None


def get_sentence_embedder(name: str) -> SentenceEmbedder:
    try:
        return _SENTENCE_EMBEDDERS[name]()
    except KeyError:
        raise UnknownBackend(f"no sentence embedder named {name!r}") from None
