"""
Explainability table
====================

Condense the five saliency maps into per-region 1-5 importance scores
(1 = most important) with Mean and Ratio-of-1s summary columns, then rank
the facial regions.
"""

from facexplain.backends import DownsampleEmbedder, TemplateDetector
from facexplain.regions import build_table, rank_regions, region_masks, table_to_csv
from facexplain.saliency import OcclusionGrid, explain_pair
from facexplain.sampledata import fixture_pair
from facexplain.verification import align_tagged

detector = TemplateDetector()
embedder = DownsampleEmbedder()
img_a, img_b = fixture_pair()
probe = align_tagged(img_a, detector, "image_a")
reference = align_tagged(img_b, detector, "image_b")

maps = explain_pair(probe, reference, embedder, OcclusionGrid(), steps=10)
regions = region_masks(probe.landmarks)
table = build_table(maps, regions)

print(table_to_csv(table))
ranked = rank_regions(table)
print(f"most important region:  {ranked[0]}")
print(f"least important region: {ranked[-1]}")
