"""
Calibrated confidence and FR metrics
====================================

Fit the score -> probability lookup on a synthetic genuine/impostor score
set, then read off the usual verification metrics (DET, EER, FNMR@FMR).
"""

import numpy as np

from facexplain.calibration import compute_det, eer, fit_pic, fnmr_at_fmr, pic_confidence
from facexplain.pipeline import default_synthetic_calibration

cal = default_synthetic_calibration()
print(f"{cal.genuine_scores.size} genuine / {cal.impostor_scores.size} impostor scores")

model = fit_pic(cal)
for s in (0.2, 0.45, 0.55, 0.7):
    print(f"  PIC({s:.2f}) = {model(s):.3f}")

# Confidence of a *decision* flips for non-matches: a score this low is
# almost certainly an impostor, so 'non-match' is the confident call.
print(f"match    confidence at 0.30: {pic_confidence(model, 0.30, 'match'):.3f}")
print(f"non-match confidence at 0.30: {pic_confidence(model, 0.30, 'non-match'):.3f}")

det = compute_det(cal, 1000)
print(f"EER = {eer(det):.4f}")
print(f"FNMR at FMR=1% = {fnmr_at_fmr(det, 0.01):.4f}")

# DET polyline, ready for plotting.
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fmr = [p.fmr for p in det]
    fnmr = [p.fnmr for p in det]
    plt.figure(figsize=(4, 4))
    plt.loglog(fmr, fnmr)
    plt.xlabel("FMR")
    plt.ylabel("FNMR")
    plt.title("DET curve (synthetic scores)")
    plt.tight_layout()
    plt.savefig("det_curve.png", dpi=120)
    print("wrote det_curve.png")
except ImportError:
    print("matplotlib not installed; skipping the DET plot")
