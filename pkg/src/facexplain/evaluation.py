"""Evaluation harness: QA correctness suites and FR metric reports.

QA suites pair each question with paraphrase variants and a matcher that
judges the answer string.  Entries may carry a follow-up question that is
asked whenever the first answer fails its matcher, mirroring how a user
would sharpen an ambiguous question; both rates are reported.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .calibration import compute_det, eer, fnmr_at_fmr, load_calibration_csv
from .context import QAContext
from .errors import FaceXplainError
from .qa import DEFAULT_TAU, DEFAULT_TOP_K, QABackend, SentenceEmbedder, ask_question

# Published operating points for a strong embedding model on a public
# benchmark; kept as documentation in reports, never asserted by tests.
PUBLISHED_REFERENCE = {
    "note": "published ArcFace/LFW operating points, not reproduced by this harness",
    "eer_pct": 5.12,
    "fnmr_pct_at_fmr_0.01pct": 6.07,
}


@dataclass(frozen=True)
class Matcher:
    type: str  # contains | regex | numeric_within
    spec: str
    tolerance: float | None = None

    def __post_init__(self):
        if self.type not in ("contains", "regex", "numeric_within"):
            raise ValueError(f"unknown matcher type {self.type!r}")
        if not self.spec:
            raise ValueError("matcher spec must be nonempty")

    def passes(self, answer: str) -> bool:
        if self.type == "contains":
            return self.spec.lower() in answer.lower()
        if self.type == "regex":
            return re.search(self.spec, answer, re.IGNORECASE) is not None
        found = re.search(r"-?\d+(?:\.\d+)?", answer)
        if not found:
            return False
        tol = self.tolerance if self.tolerance is not None else 0.0
        return abs(float(found.group()) - float(self.spec)) <= tol


@dataclass(frozen=True)
class SuiteEntry:
    canonical: str
    variants: tuple[str, ...]
    matcher: Matcher
    follow_up: str | None = None

    def __post_init__(self):
        if not self.variants:
            raise ValueError("each entry needs at least one variant")


@dataclass(frozen=True)
class QuestionSuite:
    entries: tuple[SuiteEntry, ...]

    @classmethod
    def from_dict(cls, data: dict) -> "QuestionSuite":
        entries = []
        for raw in data["entries"]:
            m = raw["matcher"]
            entries.append(
                SuiteEntry(
                    canonical=raw["canonical"],
                    variants=tuple(raw["variants"]),
                    matcher=Matcher(m["type"], m["spec"], m.get("tolerance")),
                    follow_up=raw.get("follow_up"),
                )
            )
        return cls(entries=tuple(entries))

    @classmethod
    def load(cls, path: str | Path) -> "QuestionSuite":
        text = Path(path).read_text()
        data = yaml.safe_load(text) if str(path).endswith((".yaml", ".yml")) else json.loads(text)
        return cls.from_dict(data)

    def canonical_only(self) -> "QuestionSuite":
        """The same suite with each entry reduced to its canonical phrasing."""
        return QuestionSuite(
            entries=tuple(
                SuiteEntry(e.canonical, (e.canonical,), e.matcher, e.follow_up)
                for e in self.entries
            )
        )


def load_builtin_suite() -> QuestionSuite:
    text = resources.files("facexplain").joinpath("assets/question_suite.yaml").read_text()
    return QuestionSuite.from_dict(yaml.safe_load(text))


@dataclass(frozen=True)
class VariantOutcome:
    question: str
    answer: str
    confidence: float
    passed: bool
    followup_answer: str | None = None
    passed_with_followup: bool | None = None


@dataclass(frozen=True)
class QuestionReport:
    canonical: str
    rate: float
    rate_with_followup: float | None
    outcomes: tuple[VariantOutcome, ...]


@dataclass(frozen=True)
class CorrectnessReport:
    questions: tuple[QuestionReport, ...]
    conversations: int
    overall_rate: float

    def to_json(self) -> str:
        payload = {
            "conversations": self.conversations,
            "overall_rate": self.overall_rate,
            "questions": [
                {
                    "canonical": q.canonical,
                    "rate": q.rate,
                    "rate_with_followup": q.rate_with_followup,
                    "outcomes": [
                        {
                            "question": o.question,
                            "answer": o.answer,
                            "confidence": o.confidence,
                            "passed": o.passed,
                            "followup_answer": o.followup_answer,
                            "passed_with_followup": o.passed_with_followup,
                        }
                        for o in q.outcomes
                    ],
                }
                for q in self.questions
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"{'question':60s} {'rate':>8s} {'w/ follow-up':>12s}"]
        for q in self.questions:
            follow = f"{q.rate_with_followup:.2%}" if q.rate_with_followup is not None else "-"
            lines.append(f"{q.canonical[:60]:60s} {q.rate:8.2%} {follow:>12s}")
        lines.append(f"conversations: {self.conversations}  overall rate: {self.overall_rate:.2%}")
        return "\n".join(lines)


def run_qa_suite(
    suite: QuestionSuite,
    contexts: list[QAContext],
    qa: QABackend,
    emb: SentenceEmbedder,
    tau: float = DEFAULT_TAU,
    k: int = DEFAULT_TOP_K,
) -> CorrectnessReport:
    """Ask every variant against the contexts round-robin and score answers.

    Engine errors count as failed variants rather than aborting the run.
    """
    if not contexts:
        raise ValueError("need at least one context/session")
    reports = []
    turn = 0
    total_passed = 0
    total = 0
    for entry in suite.entries:
        outcomes = []
        passed_plain = 0
        passed_followup = 0
        for variant in entry.variants:
            ctx = contexts[turn % len(contexts)]
            turn += 1
            try:
                result = ask_question(variant, ctx, qa, emb, tau=tau, k=k)
                answer_text, confidence = result.answer, result.confidence
            except FaceXplainError as exc:
                answer_text, confidence = f"<error: {exc}>", 0.0
            passed = entry.matcher.passes(answer_text)
            followup_answer = None
            passed_with_followup = None
            if entry.follow_up is not None:
                passed_with_followup = passed
                if not passed:
                    try:
                        follow = ask_question(entry.follow_up, ctx, qa, emb, tau=tau, k=k)
                        followup_answer = follow.answer
                    except FaceXplainError as exc:
                        followup_answer = f"<error: {exc}>"
                    passed_with_followup = entry.matcher.passes(followup_answer)
            outcomes.append(
                VariantOutcome(
                    question=variant,
                    answer=answer_text,
                    confidence=confidence,
                    passed=passed,
                    followup_answer=followup_answer,
                    passed_with_followup=passed_with_followup,
                )
            )
            passed_plain += int(passed)
            if entry.follow_up is not None:
                passed_followup += int(bool(passed_with_followup))
        n = len(entry.variants)
        reports.append(
            QuestionReport(
                canonical=entry.canonical,
                rate=passed_plain / n,
                rate_with_followup=(passed_followup / n) if entry.follow_up else None,
                outcomes=tuple(outcomes),
            )
        )
        total += n
        total_passed += passed_followup if entry.follow_up else passed_plain
    return CorrectnessReport(
        questions=tuple(reports),
        conversations=total,
        overall_rate=total_passed / total,
    )


def run_fr_eval(
    scores_csv: str | Path,
    targets: tuple[float, ...] = (0.1, 0.01, 0.001),
    n_thresholds: int = 1000,
) -> dict:
    """EER and FNMR-at-FMR report for a genuine/impostor score CSV."""
    cal = load_calibration_csv(scores_csv)
    det = compute_det(cal, n_thresholds)
    fnmr_at: dict[str, float | None] = {}
    for target in targets:
        try:
            fnmr_at[f"{target:g}"] = fnmr_at_fmr(det, target)
        except FaceXplainError:
            fnmr_at[f"{target:g}"] = None
    report = {
        "eer": eer(det),
        "fnmr_at_fmr": fnmr_at,
        "n_genuine": int(cal.genuine_scores.size),
        "n_impostor": int(cal.impostor_scores.size),
        "n_thresholds": n_thresholds,
        "published_reference": PUBLISHED_REFERENCE,
    }
    return report


def det_points_csv(scores_csv: str | Path, n_thresholds: int = 1000) -> str:
    """DET polyline as CSV text for external plotting."""
    cal = load_calibration_csv(scores_csv)
    det = compute_det(cal, n_thresholds)
    lines = ["threshold,fmr,fnmr"]
    lines += [f"{p.threshold:.6f},{p.fmr:.6f},{p.fnmr:.6f}" for p in det]
    return "\n".join(lines) + "\n"
