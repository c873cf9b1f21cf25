"""Confusion-matrix construction, rate metrics, and rank-based AUC.

The positive class is Normal throughout: tp counts normal windows predicted
normal and tn counts attack windows predicted attack. Detection rate is the
fraction of attacks caught, tn / (tn + fp). Ratios with an empty denominator
are reported as absent (None) rather than silently coerced to 0 or 1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotEnoughDataError, SingleClassError
from .traces import Label


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int  # normal predicted normal
    fn: int  # normal predicted attack
    fp: int  # attack predicted normal
    tn: int  # attack predicted attack

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.fn + self.fp + self.tn

    def to_dict(self):
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}


@dataclass(frozen=True)
class MetricsReport:
    dr: float | None = None
    fpr: float | None = None
    fnr: float | None = None
    far: float | None = None
    tpr: float | None = None
    accuracy: float | None = None
    auc: float | None = None

    def to_dict(self):
        # absent ratios are omitted so degenerate runs are visible in reports
        return {k: v for k, v in vars(self).items() if v is not None}


def build_confusion(truth, predicted):
    t = np.asarray([int(v) for v in truth], dtype=np.int64)
    p = np.asarray([int(v) for v in predicted], dtype=np.int64)
    if t.shape != p.shape:
        raise DimensionError(f"truth and predictions differ in length: {t.shape} vs {p.shape}")
    if t.size == 0:
        raise NotEnoughDataError("cannot build a confusion matrix from zero instances")
    truth_normal = t == int(Label.NORMAL)
    pred_normal = p == int(Label.NORMAL)
    return ConfusionMatrix(
        tp=int(np.sum(truth_normal & pred_normal)),
        fn=int(np.sum(truth_normal & ~pred_normal)),
        fp=int(np.sum(~truth_normal & pred_normal)),
        tn=int(np.sum(~truth_normal & ~pred_normal)),
    )


def compute_metrics(cm, auc=None):
    """Rates from a confusion matrix; undefined ratios come back as None.

    dr = tn/(tn+fp), fpr = fp/(fp+tn), fnr = fn/(fn+tp), tpr = tp/(tp+fn),
    far = (fpr+fnr)/2, accuracy = (tp+tn)/total.
    """
    attacks = cm.tn + cm.fp
    normals = cm.tp + cm.fn
    dr = cm.tn / attacks if attacks else None
    fpr = cm.fp / attacks if attacks else None
    fnr = cm.fn / normals if normals else None
    tpr = cm.tp / normals if normals else None
    far = (fpr + fnr) / 2.0 if fpr is not None and fnr is not None else None
    accuracy = (cm.tp + cm.tn) / cm.total if cm.total else None
    return MetricsReport(dr=dr, fpr=fpr, fnr=fnr, far=far, tpr=tpr,
                         accuracy=accuracy, auc=auc)


def single_point_auc(cm):
    """Area under the one-point operating curve of a hard classifier."""
    report = compute_metrics(cm)
    if report.tpr is None or report.fpr is None:
        raise SingleClassError("point AUC needs both classes present")
    return (1.0 + report.tpr - report.fpr) / 2.0


def _doubled_midranks(values):
    # twice the 1-based midrank of each value; integers even under ties
    order = np.argsort(values, kind="stable")
    ranks2 = np.empty(values.shape[0], dtype=np.int64)
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j < n and values[order[j]] == values[order[i]]:
            j += 1
        ranks2[order[i:j]] = (i + 1) + j  # min rank + max rank
        i = j
    return ranks2


def roc_auc(scores, truth):
    """Probability a random normal scores above a random attack, ties half.

    Rank (Wilcoxon) formulation, equal to the trapezoidal ROC area. Computed
    in integer arithmetic with a single final division, so results match
    exhaustive pair counting bit for bit.
    """
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray([int(v) for v in truth], dtype=np.int64)
    if s.shape != t.shape or s.ndim != 1:
        raise DimensionError("scores and truth must be equal-length vectors")
    pos = t == int(Label.NORMAL)
    n_pos = int(pos.sum())
    n_neg = int(s.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("AUC needs scores from both classes")
    ranks2 = _doubled_midranks(s)
    numerator = int(ranks2[pos].sum()) - n_pos * (n_pos + 1)
    return numerator / (2 * n_pos * n_neg)
