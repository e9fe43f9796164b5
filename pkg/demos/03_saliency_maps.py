"""
Black-box saliency maps
=======================

Compute the five occlusion-based heatmaps for a probe face against a
reference face and export them as grayscale and overlay PNGs.
"""

from pathlib import Path

from facexplain.backends import DownsampleEmbedder, TemplateDetector
from facexplain.saliency import OcclusionGrid, explain_pair, to_grayscale_png, to_overlay_png
from facexplain.sampledata import fixture_pair
from facexplain.verification import align_tagged

detector = TemplateDetector()
embedder = DownsampleEmbedder()
img_a, img_b = fixture_pair()
probe = align_tagged(img_a, detector, "image_a")
reference = align_tagged(img_b, detector, "image_b")

# 16px occlusion window sliding by 8px; greedy methods take 10 rounds.
grid = OcclusionGrid(window=16, stride=8)
maps = explain_pair(probe, reference, embedder, grid, steps=10,
                    probe_id=img_a.source_id, reference_id=img_b.source_id)

out = Path("saliency_out")
out.mkdir(exist_ok=True)
for smap in maps:
    lo, hi = smap.raw_range
    print(f"{smap.method.code:8s} raw range [{lo:+.4f}, {hi:+.4f}]")
    to_grayscale_png(smap, out / f"{smap.method.code}.png")
    to_overlay_png(smap, probe.pixels, out / f"{smap.method.code}_overlay.png")
print(f"wrote 10 PNGs to {out}/")
