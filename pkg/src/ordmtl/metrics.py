"""ROC curves and the TNR-at-minimum-TPR operating point."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class OperatingPoint:
    cutoff: float
    tpr: float
    tnr: float


@dataclass(frozen=True)
class RocCurve:
    """One point per distinct score, highest cutoff first.

    A sample counts as predicted positive iff ``score >= cutoff``. The last
    point is the accept-all cutoff (the minimum score).
    """

    cutoffs: np.ndarray
    tpr: np.ndarray
    tnr: np.ndarray
    n_pos: int
    n_neg: int

    @property
    def points(self) -> list[OperatingPoint]:
        return [OperatingPoint(float(c), float(p), float(n)) for c, p, n in zip(self.cutoffs, self.tpr, self.tnr)]

    def __len__(self):
        return len(self.cutoffs)


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise MetricError("scores and labels must be vectors of equal length")
    if not np.all(np.isfinite(s)):
        raise MetricError("scores must be finite")
    if not np.isin(y, (0, 1)).all():
        raise MetricError("labels must be 0 or 1")
    y = y.astype(bool)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("ROC undefined without both classes")

    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tp = np.cumsum(y)
    fp = np.cumsum(~y)
    # last index of each run of equal scores
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    return RocCurve(
        cutoffs=s[last],
        tpr=tp[last] / n_pos,
        tnr=(n_neg - fp[last]) / n_neg,
        n_pos=n_pos,
        n_neg=n_neg,
    )


def tnr_at_tpr(curve: RocCurve, min_tpr: float = 0.95) -> OperatingPoint:
    """Best specificity among points whose sensitivity reaches ``min_tpr``; no interpolation."""
    if not 0.0 < min_tpr <= 1.0:
        raise MetricError(f"min_tpr must lie in (0, 1], got {min_tpr}")
    ok = np.flatnonzero(curve.tpr >= min_tpr)
    # ties in tnr -> earliest point, i.e. the highest cutoff
    best = ok[np.argmax(curve.tnr[ok])]
    return OperatingPoint(float(curve.cutoffs[best]), float(curve.tpr[best]), float(curve.tnr[best]))


def auc(curve: RocCurve) -> float:
    fpr = np.r_[0.0, 1.0 - curve.tnr, 1.0]
    tpr = np.r_[0.0, curve.tpr, 1.0]
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def mean_operating_tnr(points: Sequence[OperatingPoint]) -> float:
    if not points:
        raise MetricError("no operating points to average")
    return float(np.mean([p.tnr for p in points]))
