"""ROC/AUC and background-anomaly separation statistics."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .core import GroundTruthMask, ScoreMap
from .errors import ParameterError

__all__ = [
    "RocCurve",
    "ClassSummary",
    "SeparationStats",
    "roc_curve",
    "auc",
    "separation_stats",
    "normalize_scores",
    "roc_to_csv",
    "separation_to_csv",
]


@dataclass(frozen=True, eq=False)
class RocCurve:
    far: np.ndarray
    dp: np.ndarray
    thresholds: np.ndarray
    # Integer detection / false-alarm counts behind far and dp, when known.
    tp: np.ndarray | None = None
    fp: np.ndarray | None = None

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.far.tolist(), self.dp.tolist()))


@dataclass(frozen=True)
class ClassSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.min, self.q1, self.median, self.q3, self.max)


@dataclass(frozen=True)
class SeparationStats:
    background: ClassSummary
    anomaly: ClassSummary

    @property
    def gap(self) -> float:
        """Anomaly minimum minus background maximum; positive means fully separated."""
        return self.anomaly.min - self.background.max


def _scores_and_labels(scores, truth) -> tuple[np.ndarray, np.ndarray]:
    s = scores.scores if isinstance(scores, ScoreMap) else np.asarray(scores, dtype=np.float64)
    y = truth.labels if isinstance(truth, GroundTruthMask) else np.asarray(truth)
    if s.shape != y.shape:
        raise ParameterError(f"score shape {s.shape} does not match truth shape {y.shape}")
    s, y = s.ravel(), y.ravel().astype(bool)
    if y.all() or not y.any():
        raise ParameterError("truth must contain both anomaly and background pixels")
    return s, y


def roc_curve(scores, truth) -> RocCurve:
    """Detection probability vs false alarm rate, one point per distinct score.

    Pixels are declared anomalous when ``score >= threshold``; equal scores
    therefore cross the threshold together. The first point (threshold
    ``+inf``) is ``(0, 0)`` and the last is ``(1, 1)``.
    """
    s, y = _scores_and_labels(scores, truth)
    order = np.argsort(-s, kind="mergesort")
    s_sorted, y_sorted = s[order], y[order]
    # Last index of every tie group in the descending order.
    ends = np.flatnonzero(np.diff(s_sorted) != 0)
    ends = np.append(ends, s_sorted.size - 1)
    tp = np.cumsum(y_sorted)[ends]
    fp = np.cumsum(~y_sorted)[ends]
    n_pos, n_neg = y.sum(), (~y).sum()
    far = np.concatenate([[0.0], fp / n_neg])
    dp = np.concatenate([[0.0], tp / n_pos])
    thresholds = np.concatenate([[np.inf], s_sorted[ends]])
    return RocCurve(
        far=far,
        dp=dp,
        thresholds=thresholds,
        tp=np.concatenate([[0], tp]),
        fp=np.concatenate([[0], fp]),
    )


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve over the false-alarm axis.

    Curves from :func:`roc_curve` are integrated on their integer counts, so
    the result is the exact pair statistic up to one final rounding.
    """
    if curve.tp is not None and curve.fp is not None:
        tp, fp = curve.tp.astype(np.int64), curve.fp.astype(np.int64)
        twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
        return twice_area / (2 * int(tp[-1]) * int(fp[-1]))
    far, dp = curve.far, curve.dp
    return float(np.sum(np.diff(far) * (dp[1:] + dp[:-1])) / 2.0)


def _minmax(s: np.ndarray) -> np.ndarray:
    lo, hi = float(s.min()), float(s.max())
    if hi <= lo:
        return np.zeros_like(s, dtype=np.float64)
    return (s - lo) / (hi - lo)


def normalize_scores(scores) -> ScoreMap:
    """Min-max scaling to [0, 1]; a constant map becomes all zeros."""
    s = scores.scores if isinstance(scores, ScoreMap) else np.asarray(scores, dtype=np.float64)
    return ScoreMap(_minmax(s))


def _summary(v: np.ndarray) -> ClassSummary:
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
    return ClassSummary(*(float(x) for x in q))


def separation_stats(scores, truth) -> SeparationStats:
    """Five-number summaries of jointly normalized scores, per class."""
    s, y = _scores_and_labels(scores, truth)
    norm = _minmax(s)
    return SeparationStats(background=_summary(norm[~y]), anomaly=_summary(norm[y]))


def roc_to_csv(curve: RocCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["threshold", "far", "dp"])
    for t, f, d in zip(curve.thresholds, curve.far, curve.dp):
        writer.writerow([repr(float(t)), repr(float(f)), repr(float(d))])
    return buf.getvalue()


def separation_to_csv(stats: SeparationStats) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class", "min", "q1", "median", "q3", "max"])
    for name, summary in (("background", stats.background), ("anomaly", stats.anomaly)):
        writer.writerow([name, *(repr(v) for v in summary.as_tuple())])
    return buf.getvalue()
