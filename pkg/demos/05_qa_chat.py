"""
Question answering over a verification
======================================

Build the plain-text context for a verified pair and let the extractive
QA layer answer a scripted conversation, including one vague question
that falls back to the retrieved sub-context.
"""

from facexplain.config import ServiceConfig
from facexplain.pipeline import Runtime, explain_verified_pair
from facexplain.qa import ask_question
from facexplain.sampledata import fixture_pair

runtime = Runtime.from_config(ServiceConfig())
img_a, img_b = fixture_pair()
result = explain_verified_pair(img_a, img_b, runtime)

print(f"decision: {result.record.decision}  score: {result.record.score:.3f}  "
      f"confidence: {result.confidence:.1%}")
print(f"context: {len(result.context.sentences)} sentences\n")

questions = [
    "What is the decision?",
    "How did you come to this decision?",
    "How sure are you about the decision?",
    "What is the most important feature of this decision?",
    "What is explainable AI?",
    "Do eyebrows matter here?",  # vague: expect the sub-context fallback
]
for question in questions:
    answer = ask_question(
        question, result.context, runtime.qa, runtime.sentence_embedder,
        tau=runtime.config.tau, k=runtime.config.top_k,
    )
    marker = "  [sub-context]" if answer.used_subcontext else ""
    print(f"Q: {question}")
    print(f"A: {answer.answer} ({answer.confidence:.2f}){marker}\n")
