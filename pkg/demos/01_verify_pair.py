"""
Verify two face images
======================

Align two synthetic faces, embed them with the mock backend, and compare
them with cosine similarity.
"""

from facexplain.backends import DownsampleEmbedder, TemplateDetector
from facexplain.sampledata import fixture_pair, synthetic_face
from facexplain.verification import verify_pair

detector = TemplateDetector()
embedder = DownsampleEmbedder()

# Two different synthetic identities.
img_a, img_b = fixture_pair()
record = verify_pair(img_a, img_b, detector, embedder, threshold=0.5)
print(f"pair {record.pair_id}")
print(f"  score    {record.score:+.4f}")
print(f"  decision {record.decision} (threshold {record.threshold})")

# The same identity twice gives cosine similarity 1.
same = synthetic_face(7)
record = verify_pair(same, same, detector, embedder, threshold=0.5)
print(f"identical image: score {record.score:.4f} -> {record.decision}")
