"""Score calibration and FR error metrics.

Genuine/impostor score densities are estimated with Gaussian KDE
(Silverman bandwidth) and turned into the probability that a score came
from the genuine distribution, assuming equal priors:

    p(s) = f_gen(s) / (f_gen(s) + f_imp(s))

The raw ratio is made monotone with isotonic regression and clamped away
from 0/1 so the service never claims absolute certainty.  The same score
sets drive DET curves, EER, and FNMR at a fixed FMR.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DegenerateDistribution,
    InsufficientData,
    NoCrossing,
    TargetUnreachable,
)

MIN_SCORES_PER_CLASS = 50
GRID_POINTS = 512
DEFAULT_EPS = 1e-3


@dataclass(frozen=True)
class CalibrationSet:
    genuine_scores: np.ndarray
    impostor_scores: np.ndarray

    def __post_init__(self):
        gen = np.asarray(self.genuine_scores, dtype=np.float64)
        imp = np.asarray(self.impostor_scores, dtype=np.float64)
        for name, arr in (("genuine", gen), ("impostor", imp)):
            if arr.ndim != 1 or arr.size < MIN_SCORES_PER_CLASS:
                raise InsufficientData(
                    f"need at least {MIN_SCORES_PER_CLASS} {name} scores, got {arr.size}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} scores must be finite")
        object.__setattr__(self, "genuine_scores", gen)
        object.__setattr__(self, "impostor_scores", imp)


@dataclass(frozen=True)
class PicModel:
    """Monotone piecewise-linear score -> probability lookup."""

    grid: np.ndarray
    values: np.ndarray
    eps: float
    meta: dict = field(default_factory=dict)

    def __call__(self, score: float) -> float:
        return float(np.interp(score, self.grid, self.values))

    def to_json(self) -> str:
        return json.dumps(
            {
                "grid": self.grid.tolist(),
                "values": self.values.tolist(),
                "eps": self.eps,
                "meta": self.meta,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "PicModel":
        data = json.loads(text)
        return cls(
            grid=np.asarray(data["grid"], dtype=np.float64),
            values=np.asarray(data["values"], dtype=np.float64),
            eps=float(data["eps"]),
            meta=data.get("meta", {}),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "PicModel":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class DetPoint:
    threshold: float
    fmr: float
    fnmr: float

    def __post_init__(self):
        if not (0.0 <= self.fmr <= 1.0 and 0.0 <= self.fnmr <= 1.0):
            raise ValueError("fmr and fnmr must be in [0, 1]")


def silverman_bandwidth(samples: np.ndarray) -> float:
    n = samples.size
    std = float(np.std(samples, ddof=1))
    return std * (3.0 * n / 4.0) ** (-1.0 / 5.0)


def _log_kde(grid: np.ndarray, samples: np.ndarray, bandwidth: float) -> np.ndarray:
    """Log of the Gaussian-KDE density on the grid, stable in the far tails."""
    z = (grid[:, None] - samples[None, :]) / bandwidth
    log_norm = np.log(samples.size * bandwidth * np.sqrt(2.0 * np.pi))
    return logsumexp(-0.5 * z**2, axis=1) - log_norm


def _log_density_pair(cal: CalibrationSet, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gen = np.sort(cal.genuine_scores)
    imp = np.sort(cal.impostor_scores)
    h_gen = silverman_bandwidth(gen)
    h_imp = silverman_bandwidth(imp)
    if h_gen == 0 or h_imp == 0:
        raise DegenerateDistribution("zero-variance score set")
    return _log_kde(grid, gen, h_gen), _log_kde(grid, imp, h_imp)


def raw_density_ratio(cal: CalibrationSet, grid: np.ndarray) -> np.ndarray:
    """Pre-isotonic PIC values f_gen / (f_gen + f_imp) on the grid."""
    log_gen, log_imp = _log_density_pair(cal, grid)
    # 1 / (1 + f_imp/f_gen), evaluated in log space so tails never hit 0/0.
    return 1.0 / (1.0 + np.exp(np.clip(log_imp - log_gen, -700, 700)))


def isotonic_fit(values: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Pool-adjacent-violators: closest nondecreasing sequence (weighted L2)."""
    n_pts = len(values)
    if weights is None:
        weights = np.ones(n_pts)
    level = np.asarray(values, dtype=np.float64)
    weight = np.asarray(weights, dtype=np.float64)
    blocks_level = np.empty(n_pts)
    blocks_weight = np.empty(n_pts)
    blocks_count = np.empty(n_pts, dtype=int)
    n = 0  # active blocks
    for v, w in zip(level, weight):
        blocks_level[n] = v
        blocks_weight[n] = w
        blocks_count[n] = 1
        n += 1
        while n > 1 and blocks_level[n - 2] > blocks_level[n - 1]:
            merged_w = blocks_weight[n - 2] + blocks_weight[n - 1]
            if merged_w > 0:
                blocks_level[n - 2] = (
                    blocks_level[n - 2] * blocks_weight[n - 2]
                    + blocks_level[n - 1] * blocks_weight[n - 1]
                ) / merged_w
            else:
                blocks_level[n - 2] = 0.5 * (blocks_level[n - 2] + blocks_level[n - 1])
            blocks_weight[n - 2] = merged_w
            blocks_count[n - 2] += blocks_count[n - 1]
            n -= 1
    return np.repeat(blocks_level[:n], blocks_count[:n])


def fit_pic(cal: CalibrationSet, eps: float = DEFAULT_EPS) -> PicModel:
    """Fit the score -> genuine-probability lookup from calibration scores."""
    grid = np.linspace(-1.0, 1.0, GRID_POINTS)
    log_gen, log_imp = _log_density_pair(cal, grid)
    raw = 1.0 / (1.0 + np.exp(np.clip(log_imp - log_gen, -700, 700)))
    # Weight each grid point by its density mass so empty tails, where the
    # raw ratio is pure noise, cannot drag the pooled blocks around.
    evidence = np.exp(log_gen) + np.exp(log_imp)
    monotone = isotonic_fit(raw, weights=evidence)
    clamped = np.clip(monotone, eps, 1.0 - eps)
    meta = {
        "bandwidth_genuine": silverman_bandwidth(cal.genuine_scores),
        "bandwidth_impostor": silverman_bandwidth(cal.impostor_scores),
        "n_genuine": int(cal.genuine_scores.size),
        "n_impostor": int(cal.impostor_scores.size),
        "grid_points": GRID_POINTS,
    }
    return PicModel(grid=grid, values=clamped, eps=eps, meta=meta)


def pic_confidence(model: PicModel, score: float, decision: str) -> float:
    """Probability the decision is correct: p for match, 1-p for non-match."""
    p = model(score)
    return p if decision == "match" else 1.0 - p


def error_rates(cal: CalibrationSet, threshold: float) -> tuple[float, float]:
    """(FMR, FNMR) at one threshold: impostors >= t, genuines < t."""
    fmr = float(np.mean(cal.impostor_scores >= threshold))
    fnmr = float(np.mean(cal.genuine_scores < threshold))
    return fmr, fnmr


def compute_det(cal: CalibrationSet, n_thresholds: int = 1000) -> list[DetPoint]:
    """DET points on a uniform threshold grid over the observed score range."""
    if n_thresholds < 2:
        raise ValueError("n_thresholds must be >= 2")
    gen = np.sort(cal.genuine_scores)
    imp = np.sort(cal.impostor_scores)
    lo = min(gen[0], imp[0])
    hi = max(gen[-1], imp[-1])
    thresholds = np.linspace(lo, hi, n_thresholds)
    fmr = 1.0 - np.searchsorted(imp, thresholds, side="left") / imp.size
    fnmr = np.searchsorted(gen, thresholds, side="left") / gen.size
    return [DetPoint(float(t), float(a), float(r)) for t, a, r in zip(thresholds, fmr, fnmr)]


def eer(det: list[DetPoint]) -> float:
    """Equal error rate by linear interpolation at the FMR/FNMR crossing."""
    if not det:
        raise NoCrossing("empty DET sequence")
    diffs = np.array([p.fmr - p.fnmr for p in det])
    exact = np.nonzero(diffs == 0.0)[0]
    if exact.size:
        p = det[int(exact[0])]
        return (p.fmr + p.fnmr) / 2.0
    signs = np.sign(diffs)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    if not flips.size:
        raise NoCrossing("fmr - fnmr never changes sign")
    i = int(flips[0])
    a, b = det[i], det[i + 1]
    alpha = diffs[i] / (diffs[i] - diffs[i + 1])
    fmr = a.fmr + alpha * (b.fmr - a.fmr)
    fnmr = a.fnmr + alpha * (b.fnmr - a.fnmr)
    return float((fmr + fnmr) / 2.0)


def fnmr_at_fmr(det: list[DetPoint], target_fmr: float) -> float:
    """FNMR at the operating point where FMR passes through the target.

    FMR is nonincreasing along the threshold-ordered DET sequence.  An exact
    hit on an FMR plateau returns the plateau's lowest FNMR (its most
    favorable threshold); otherwise FNMR is interpolated in FMR between the
    bracketing points.
    """
    if not 0.0 < target_fmr <= 1.0:
        raise ValueError("target_fmr must be in (0, 1]")
    fmr = np.array([p.fmr for p in det])
    fnmr = np.array([p.fnmr for p in det])
    positive = fmr[fmr > 0.0]
    if positive.size == 0 or target_fmr < positive.min():
        raise TargetUnreachable(
            f"target FMR {target_fmr} is below the resolution of the impostor set"
        )
    exact = np.nonzero(fmr == target_fmr)[0]
    if exact.size:
        return float(fnmr[exact[0]])
    at_or_above = np.nonzero(fmr >= target_fmr)[0]
    i = int(at_or_above[-1])
    if i + 1 >= len(det):
        return float(fnmr[i])
    alpha = (fmr[i] - target_fmr) / (fmr[i] - fmr[i + 1])
    return float(fnmr[i] + alpha * (fnmr[i + 1] - fnmr[i]))


def load_calibration_csv(path: str | Path) -> CalibrationSet:
    """Two-column CSV ``score,label`` with label in {genuine, impostor}."""
    genuine, impostor = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(map(str.strip, reader.fieldnames)) != {"score", "label"}:
            raise ValueError("expected CSV header 'score,label'")
        for row in reader:
            label = row["label"].strip().lower()
            score = float(row["score"])
            if label == "genuine":
                genuine.append(score)
            elif label == "impostor":
                impostor.append(score)
            else:
                raise ValueError(f"unknown label {row['label']!r}")
    return CalibrationSet(np.asarray(genuine), np.asarray(impostor))


def save_calibration_csv(cal: CalibrationSet, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["score", "label"])
        for s in cal.genuine_scores:
            writer.writerow([repr(float(s)), "genuine"])
        for s in cal.impostor_scores:
            writer.writerow([repr(float(s)), "impostor"])
